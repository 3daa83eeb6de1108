#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "cost_tables.hpp"
#include "test_support.hpp"

using namespace incentive_ledger;
using namespace incentive_ledger::testing;

TEST(Wei, ParseAndPrintRoundTrip) {
  for (const char* s : {"0", "1", "-7", "100000000000000000000", "-491024880000000000"})
    EXPECT_EQ(Wei::parse(s).str(), s);
  EXPECT_THROW(Wei::parse("12a"), std::invalid_argument);
  EXPECT_THROW(Wei::parse(""), std::invalid_argument);
}

TEST(Wei, RoundingHelpers) {
  EXPECT_EQ(mul_div_floor(Wei(19), 5, 100), Wei(0));
  EXPECT_EQ(mul_div_ceil(Wei(19), 5, 100), Wei(1));
  EXPECT_EQ(mul_div_ceil(Wei(20), 5, 100), Wei(1));
  EXPECT_EQ(mul_div_ceil(Wei(21), 5, 100), Wei(2));
  EXPECT_EQ(mul_div_ceil(Wei(0), 5, 100), Wei(0));
}

TEST(Chain, CreateAccounts) {
  ChainState chain;
  auto a = chain.create_accounts(1000, Wei::from_ether(100));
  ASSERT_EQ(a.size(), 1000u);
  for (Address x : a) EXPECT_EQ(chain.balance(x), Wei::from_ether(100));
  EXPECT_EQ(chain.balance(chain.miner_sink()), Wei(0));
  EXPECT_EQ(chain.total_value(), Wei::from_ether(100'000));

  ChainState one;
  auto b = one.create_accounts(1, Wei(0));
  EXPECT_EQ(one.balance(b[0]), Wei(0));

  ChainState three;
  three.create_accounts(3, Wei::from_ether(5));
  EXPECT_EQ(three.total_value(), Wei::from_ether(15));
  EXPECT_EQ(three.initial_total(), Wei::from_ether(15));

  EXPECT_ERRC(three.create_accounts(0, Wei(0)), Errc::BadConfig);
}

TEST(Chain, NullAddressNeverAnAccount) {
  ChainState chain;
  chain.create_accounts(2, Wei(1));
  EXPECT_FALSE(chain.exists(Address::null()));
  EXPECT_ERRC(chain.balance(Address::null()), Errc::UnknownAccount);
}

TEST(Chain, DeploymentFeeMatchesTable) {
  ChainState chain;
  auto p = chain.create_accounts(1, Wei::from_ether(100))[0];
  auto r = chain.execute(p, Fn::Deployment);
  EXPECT_EQ(r.gas_used, 6'724'230u);
  EXPECT_EQ(r.gas_fee, Wei(484'144'560'000'000'000));  // 0.48414456 ETH
  EXPECT_NEAR(r.usd_cost, 831.03, 0.02);
  EXPECT_EQ(chain.balance(p), Wei::from_ether(100) - r.gas_fee);
  EXPECT_EQ(chain.balance(chain.miner_sink()), r.gas_fee);
}

TEST(Chain, AddDataRequesterFee) {
  ChainState chain;
  auto p = chain.create_accounts(1, Wei::from_ether(1))[0];
  auto r = chain.execute(p, Fn::AddDataRequester);
  EXPECT_EQ(r.gas_fee, Wei(34'204'824'000'000'000));
  EXPECT_NEAR(r.usd_cost, 58.70, 0.02);
}

TEST(Chain, EveryTableRowReproducesEtherAndUsd) {
  ChainState chain;
  auto p = chain.create_accounts(1, Wei::from_ether(100))[0];
  auto check = [&](const CostRow& row) {
    auto r = chain.execute(p, row.fn);
    EXPECT_EQ(r.gas_used, row.gas) << to_string(row.fn);
    EXPECT_EQ(r.gas_fee, gwei72(row.gas));
    EXPECT_EQ(ether_e5(r.gas_fee), row.ether_e5) << to_string(row.fn);
    EXPECT_LE(std::llabs(chain.price().to_cents(r.gas_fee) - row.usd_cents), 2) << to_string(row.fn);
  };
  for (const auto& row : kDatasetTable) check(row);
  for (const auto& row : kRegistryTable) check(row);
}

TEST(Chain, UpdateCostCalibration) {
  // Oracle: gas that buys $64.30 at 72 Gwei and $1716.52/ETH, minus the base update,
  // spread over 60 holders.
  const long double total_gas = 64.30L / 1716.52L / 72e-9L;
  const long double per_head = (total_gas - 43'799.0L) / 60.0L;
  EXPECT_NEAR(static_cast<double>(per_head), 7941.2, 0.1);
  EXPECT_EQ(GasSchedule::kDefaultPerRequesterUpdateGas, static_cast<Gas>(per_head + 0.5L));

  ChainState chain;
  auto p = chain.create_accounts(1, Wei::from_ether(1))[0];
  auto r0 = chain.execute(p, Fn::UpdateData);
  EXPECT_NEAR(r0.usd_cost, 5.40, 0.02);
  auto r60 = chain.execute(p, Fn::UpdateData, 60 * chain.schedule().per_requester_update_gas());
  EXPECT_NEAR(r60.usd_cost, 64.30, 0.01);
}

TEST(Chain, InsufficientFundsIsAtomic) {
  ChainState chain;
  auto a = chain.create_accounts(2, gwei72(43'799) - Wei(1));
  EXPECT_ERRC(chain.execute(a[0], Fn::UpdateData), Errc::InsufficientFunds);
  EXPECT_EQ(chain.balance(a[0]), gwei72(43'799) - Wei(1));
  EXPECT_TRUE(chain.receipts().empty());

  // fee alone affordable, fee + value not
  EXPECT_ERRC(chain.execute(a[1], Fn::UpdateData, 0, Wei(1), a[0]), Errc::InsufficientFunds);
  EXPECT_EQ(chain.total_value(), chain.initial_total());
}

TEST(Chain, UnknownFunction) {
  ChainState chain(GasSchedule{});
  auto a = chain.create_accounts(1, Wei::from_ether(1))[0];
  EXPECT_ERRC(chain.execute(a, Fn::Deployment), Errc::UnknownFunction);
  ChainState full;
  auto b = full.create_accounts(1, Wei::from_ether(1))[0];
  EXPECT_ERRC(full.execute(b, Fn::Destroy), Errc::UnknownFunction);
}

TEST(Chain, WeiToUsd) {
  PriceModel px;
  // 0.48414 * 1716.52 = 831.0420 exactly; published figure is 831.03
  EXPECT_EQ(px.format_usd(Wei(484'140'000'000'000'000)), "831.04");
  EXPECT_NEAR(px.to_usd(Wei(484'140'000'000'000'000)), 831.03, 0.02);
  EXPECT_EQ(px.format_usd(Wei(0)), "0.00");
  // 0.04472 ETH -> $76.76 published; exact product is 76.762...
  EXPECT_NEAR(px.to_usd(Wei(44'720'000'000'000'000)), 76.76, 0.02);
  EXPECT_EQ(px.format_usd(-Wei::from_ether(1)), "-1716.52");
}

TEST(Chain, ValueTransfersAndConservationProperty) {
  // Random metered calls with value transfers between random accounts.
  std::mt19937_64 rng(42);
  ChainState chain;
  auto acc = chain.create_accounts(20, Wei::from_ether(2));
  const auto fns = std::array{Fn::UpdateData, Fn::RenewToken, Fn::AddDataRequester, Fn::SetPrice};
  std::uniform_int_distribution<std::size_t> who(0, acc.size() - 1), fn(0, fns.size() - 1);
  std::uniform_int_distribution<std::int64_t> amount(0, 300'000'000);
  std::size_t rejected = 0;
  for (int i = 0; i < 3000; ++i) {
    const Address from = acc[who(rng)], to = acc[who(rng)];
    const Wei value = Wei::from_gwei(amount(rng));
    const Wei before = chain.balance(from);
    try {
      auto r = chain.execute(from, fns[fn(rng)], 0, value, to);
      EXPECT_EQ(r.gas_fee, chain.price().fee(r.gas_used));
    } catch (const ContractError& e) {
      ASSERT_EQ(e.code(), Errc::InsufficientFunds);
      EXPECT_EQ(chain.balance(from), before);
      ++rejected;
    }
    ASSERT_EQ(chain.total_value(), chain.initial_total());
    for (Address a : acc) ASSERT_GE(chain.balance(a), Wei(0));
  }
  EXPECT_GT(rejected, 0u);
}

TEST(GasSchedule, Overrides) {
  GasSchedule s = GasSchedule::defaults();
  std::istringstream in("# comment\nupdateData = 50000\nperRequesterUpdateGas=8000\n\nregistry.checkUser=1\n");
  s.apply_overrides(in);
  EXPECT_EQ(s.gas(Fn::UpdateData), 50'000u);
  EXPECT_EQ(s.entry(Fn::UpdateData).execution, 20'863u);
  EXPECT_EQ(s.per_requester_update_gas(), 8'000u);
  EXPECT_EQ(s.gas(Fn::CheckUser), 1u);

  std::istringstream bad1("nosuchfn=5\n"), bad2("updateData=0\n"), bad3("updateData\n"), bad4("destroy=5\n");
  EXPECT_ERRC(s.apply_overrides(bad1), Errc::BadConfig);
  EXPECT_ERRC(s.apply_overrides(bad2), Errc::BadConfig);
  EXPECT_ERRC(s.apply_overrides(bad3), Errc::BadConfig);
  EXPECT_ERRC(s.apply_overrides(bad4), Errc::BadConfig);
}

TEST(Chain, TransactionCsv) {
  ChainState chain;
  auto a = chain.create_accounts(2, Wei::from_ether(1));
  chain.set_period(3);
  chain.execute(a[0], Fn::RenewToken, 0, Wei(5), a[1]);
  std::ostringstream os;
  write_transactions_csv(os, chain.receipts(), chain.price());
  EXPECT_EQ(os.str(),
            "index,period,caller,function,gasUsed,gasFeeWei,valueWei,recipient,usdCost\n"
            "0,3," + a[0].str() + ",renewToken,45211,3255192000000000,5," + a[1].str() + ",5.59\n");
}
