#include <gtest/gtest.h>

#include <sstream>

#include "test_support.hpp"

using namespace incentive_ledger;

namespace {
SimResult run(Scenario s, std::uint64_t seed, std::int64_t actions = 500) {
  SimConfig c;
  c.scenario = s;
  c.seed = seed;
  c.action_ticker = actions;
  return run_simulation(c);
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

template <class F>
std::string capture(F&& f) {
  std::ostringstream os;
  f(os);
  return os.str();
}
}  // namespace

TEST(Reporting, EmptyResultWritesHeadersOnly) {
  SimResult r;
  EXPECT_EQ(lines(capture([&](auto& os) { write_profit_series(os, r); })).size(), 1u);
  EXPECT_EQ(lines(capture([&](auto& os) { write_periods_csv(os, r.series); })).size(), 1u);
  EXPECT_EQ(lines(capture([&](auto& os) { write_actions_csv(os, r); })).size(), 1u);
  EXPECT_EQ(lines(capture([&](auto& os) { write_cost_overlay(os, r); })).size(), 1u);
  EXPECT_EQ(lines(capture([&](auto& os) { write_top_requesters(os, r); })).size(), 1u);
}

TEST(Reporting, ProfitSeriesShapes) {
  auto s1 = run(Scenario::NoCompensation, 3);
  for (std::size_t i = 1; i < s1.series.size(); ++i) EXPECT_LE(s1.series[i].profit, s1.series[i - 1].profit);

  auto s3 = run(Scenario::Profit, 3);
  auto be = break_even_period(s3);
  ASSERT_TRUE(be);
  for (const auto& s : s3.series) {
    if (s.period < *be) {
      EXPECT_LT(s.profit, Wei(0));
    }
    if (s.period == *be) {
      EXPECT_GE(s.profit, Wei(0));
    }
  }
  auto csv = lines(capture([&](auto& os) { write_profit_series(os, s3); }));
  EXPECT_EQ(csv.size(), s3.series.size() + 1);
}

TEST(Reporting, UpdateSpikesAndSinkingAccessCosts) {
  auto r = run(Scenario::CostCompensation, 7);
  std::size_t updates = 0;
  for (const auto& rec : r.records) {
    if (rec.kind != ActionKind::Update) continue;
    ++updates;
    EXPECT_GT(rec.cost_after, rec.cost_before);
    // end-of-period cost exceeds the previous period's, unless payments later that period drained it
    const auto& s = r.series.at(static_cast<std::size_t>(rec.period - 1));
    if (rec.period > 1) {
      const auto& prev = r.series.at(static_cast<std::size_t>(rec.period - 2));
      bool paid_after = false;
      for (const auto& x : r.records)
        paid_after |= x.period == rec.period && x.index > rec.index && x.payment > Wei(0);
      if (!paid_after) {
        EXPECT_GT(s.current_cost, prev.current_cost);
      }
    }
  }
  EXPECT_GT(updates, 0u);

  Wei last = Wei(-1);
  for (const auto& rec : r.records) {
    if (rec.kind == ActionKind::Update || rec.kind == ActionKind::Publish) {
      last = Wei(-1);
      continue;
    }
    if (last >= Wei(0)) {
      EXPECT_LE(rec.payment, last);
    }
    last = rec.payment;
  }
}

TEST(Reporting, ZeroActionTailIsFlat) {
  // a one-action run has one period; the overlay has one tx and one cost row
  auto r = run(Scenario::CostCompensation, 1, 1);
  auto overlay = lines(capture([&](auto& os) { write_cost_overlay(os, r); }));
  ASSERT_EQ(overlay.size(), 3u);
  EXPECT_EQ(overlay[1].substr(0, 5), "1,tx,");
  EXPECT_EQ(overlay[2].substr(0, 7), "1,cost,");
}

TEST(Reporting, RequesterBreakdown) {
  auto s1 = run(Scenario::NoCompensation, 2);
  auto rows = lines(capture([&](auto& os) { write_requester_breakdown(os, s1); }));
  ASSERT_EQ(rows.size(), 3u);
  auto field = [](const std::string& row, std::size_t i) {
    std::istringstream in(row);
    std::string f;
    for (std::size_t k = 0; k <= i; ++k) std::getline(in, f, ',');
    return f;
  };
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(field(rows[i], 4), "0") << rows[i];
    EXPECT_EQ(field(rows[i], 6), "0.00") << rows[i];
  }
  EXPECT_NEAR(std::stod(field(rows[1], 5)), 58.70, 0.02);
  EXPECT_NEAR(std::stod(field(rows[2], 5)), 5.59, 0.02);
}

TEST(Reporting, ProviderCostBand) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto s = summarize(run(Scenario::CostCompensation, seed));
    EXPECT_GE(s.provider_cost_usd, 1000.0);
    EXPECT_LE(s.provider_cost_usd, 5000.0);
  }
}

TEST(Reporting, EarlyRequestersPayMost) {
  auto r = run(Scenario::CostCompensation, 4);
  std::vector<Wei> first_payment;
  for (const auto& rec : r.records)
    if (rec.kind == ActionKind::Request) first_payment.push_back(rec.payment);
  ASSERT_GE(first_payment.size(), 10u);
  Wei early, rest;
  for (std::size_t i = 0; i < first_payment.size(); ++i) (i < 10 ? early : rest) += first_payment[i];
  EXPECT_GT(early, rest);
  auto top = top_requesters_vs_provider(r, 3);
  ASSERT_EQ(top.size(), 4u);
  EXPECT_EQ(top[0].role, Role::Provider);
  EXPECT_GE(top[1].total, top[2].total);
  EXPECT_GE(top[2].total, top[3].total);
}

TEST(Reporting, BoxStats) {
  auto b = box_stats({1, 2, 3, 4});
  EXPECT_EQ(b.count, 4u);
  EXPECT_DOUBLE_EQ(b.min, 1);
  EXPECT_DOUBLE_EQ(b.q1, 1.75);
  EXPECT_DOUBLE_EQ(b.median, 2.5);
  EXPECT_DOUBLE_EQ(b.q3, 3.25);
  EXPECT_DOUBLE_EQ(b.max, 4);
  EXPECT_EQ(box_stats({}).count, 0u);
}

TEST(Reporting, FrequenciesAndSpendCrossCheck) {
  auto one = summarize(run(Scenario::CostCompensation, 1, 1));
  EXPECT_EQ(one.total_actions, 1);
  EXPECT_EQ(one.counts[0], 1);
  EXPECT_DOUBLE_EQ(one.frequencies[0], 1.0);
  EXPECT_DOUBLE_EQ(one.frequencies[3], 0.0);

  auto r = run(Scenario::Profit, 5);
  auto s = summarize(r);
  EXPECT_EQ(s.counts[0] + s.counts[1] + s.counts[2] + s.counts[3], 500);
  EXPECT_DOUBLE_EQ(s.frequencies[3], static_cast<double>(s.counts[3]) / static_cast<double>(s.periods));
  // independent spend oracle over the receipt log, excluding the setup period
  Wei provider, requester;
  for (const auto& tx : r.chain.receipts()) {
    if (tx.period == 0) continue;
    (tx.caller == r.population[0].address ? provider : requester) += tx.gas_fee + tx.value;
  }
  EXPECT_EQ(provider, s.provider_cost);
  EXPECT_EQ(requester, s.requester_spend);
  Wei total;
  for (const auto& t : spend_by_actor(r)) total += t.total;
  EXPECT_EQ(total, provider + requester);
}

TEST(Reporting, SummaryIsPure) {
  auto r = run(Scenario::CostCompensation, 6);
  auto a = capture([&](auto& os) { write_summary_text(os, summarize(r), r.config.price); });
  auto b = capture([&](auto& os) { write_summary_text(os, summarize(r), r.config.price); });
  EXPECT_EQ(a, b);
}

TEST(Reconcile, PassesCleanRunsAndCatchesTampering) {
  auto r = run(Scenario::CostCompensation, 2);
  EXPECT_NO_THROW(reconcile(r));

  auto bad_payment = r;
  bad_payment.records[5].payment += Wei(1);
  EXPECT_ERRC(reconcile(bad_payment), Errc::ReconciliationFailure);

  auto bad_fee = r;
  bad_fee.records[0].tx_fee -= Wei(1);
  EXPECT_ERRC(reconcile(bad_fee), Errc::ReconciliationFailure);

  auto bad_start = r;
  bad_start.initial_balances[3] += Wei(1);
  EXPECT_ERRC(reconcile(bad_start), Errc::ReconciliationFailure);

  auto dropped = r;
  dropped.records.pop_back();
  EXPECT_ERRC(reconcile(dropped), Errc::ReconciliationFailure);
}

TEST(MedianPeriod, NoneSortsLast) {
  EXPECT_FALSE(median_period({}));
  EXPECT_EQ(median_period({3, 1, 2}), 2.0);
  EXPECT_EQ(median_period({4, 1, 2, 3}), 2.5);
  EXPECT_EQ(median_period({std::nullopt, 1, 2}), 2.0);
  EXPECT_FALSE(median_period({std::nullopt, std::nullopt, 1}));
}
