#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "chain.hpp"
#include "registry.hpp"
#include "token.hpp"

namespace incentive_ledger {

enum class Scenario { NoCompensation = 1, CostCompensation = 2, Profit = 3 };

constexpr int scenario_number(Scenario s) { return static_cast<int>(s); }

inline std::optional<Scenario> scenario_from_number(int n) {
  if (n < 1 || n > 3) return std::nullopt;
  return static_cast<Scenario>(n);
}

/// Everything a contract call touches besides the contract itself.
struct ContractEnv {
  ChainState& chain;
  const Registry& registry;
  TokenBook& tokens;

  Period now() const { return chain.period(); }
};

struct DatasetTerms {
  std::string link;
  LicenseType license;
  Scenario scenario = Scenario::CostCompensation;
  int profit_margin_pct = 100;
  int access_fraction_pct = 5;
  int renew_fraction_pct = 5;
};

inline void validate_margin(int pct) {
  if (pct < 100) throw ContractError(Errc::OutOfRange, "profit margin must be >= 100%");
}

inline void validate_fraction(int pct) {
  if (pct <= 0 || pct > 100) throw ContractError(Errc::OutOfRange, "cost fraction must lie in (0, 100]");
}

/// One dataset's contract with the running-cost bookkeeping that requester payments
/// draw down.
///
/// Owner-paid gas accrues into `current_cost` pre-multiplied by the profit margin
/// (floor division), and every requester payment is subtracted from it. Scenario 1
/// keeps the same bookkeeping but quotes are always zero.
class DatasetContract {
 public:
  /// Deploys the contract and publishes the dataset. Both transactions count as the
  /// provider's initial investment and accrue into the running cost.
  static DatasetContract deploy_and_publish(ContractEnv env, Address provider, DatasetTerms terms) {
    if (!env.registry.check_provider(provider)) throw ContractError(Errc::NotProvider, provider.str());
    validate_margin(terms.profit_margin_pct);
    validate_fraction(terms.access_fraction_pct);
    validate_fraction(terms.renew_fraction_pct);

    const auto& sched = env.chain.schedule();
    const Wei upfront = env.chain.price().fee(sched.gas(Fn::Deployment) + sched.gas(Fn::PublishData));
    if (env.chain.balance(provider) < upfront)
      throw ContractError(Errc::InsufficientFunds, provider.str() + " cannot fund deployment");

    DatasetContract c;
    c.owner_ = provider;
    c.link_ = std::move(terms.link);
    c.required_license_ = terms.license;
    c.scenario_ = terms.scenario;
    c.profit_margin_pct_ = terms.profit_margin_pct;
    c.access_fraction_pct_ = terms.access_fraction_pct;
    c.renew_fraction_pct_ = terms.renew_fraction_pct;

    auto deployed = env.chain.execute(provider, Fn::Deployment);
    c.address_ = env.chain.create_contract_account();
    c.accrue_cost(deployed.gas_used, env.chain.price());
    auto published = env.chain.execute(provider, Fn::PublishData);
    c.accrue_cost(published.gas_used, env.chain.price());
    c.published_ = true;
    return c;
  }

  /// currentCost += gas * price * margin / 100 (floored); providerCost += gas * price.
  void accrue_cost(Gas gas_used, const PriceModel& price) {
    const Wei fee = price.fee(gas_used);
    const Wei accrued = mul_div_floor(fee, profit_margin_pct_, 100);
    current_cost_ += accrued;
    accrued_total_ += accrued;
    provider_cost_ += fee;
  }

  /// New meta-information version. Costs one base update plus a surcharge per active
  /// holder, and every holder must re-confirm compliance before renewing.
  TxReceipt update_data(ContractEnv env, Address caller) {
    require_live();
    require_owner(caller);
    if (!published_) throw ContractError(Errc::NotPublished);
    const Gas extra = env.chain.schedule().per_requester_update_gas() * static_cast<Gas>(active_tokens_.size());
    auto r = env.chain.execute(caller, Fn::UpdateData, extra);
    ++meta_version_;
    for (TokenId id : active_tokens_) {
      env.tokens.set_compliance(id, false);
      env.tokens.notify(id, NoticeKind::UpdateIssued, env.now());
    }
    accrue_cost(r.gas_used, env.chain.price());
    return r;
  }

  /// Replaces the required license and burns every active token granted under another one.
  TxReceipt set_license(ContractEnv env, Address caller, LicenseType license) {
    require_live();
    require_owner(caller);
    auto r = env.chain.execute(caller, Fn::SetLicense);
    required_license_ = license;
    ++license_changes_;
    std::vector<TokenId> purge;
    for (TokenId id : active_tokens_)
      if (env.tokens.get(id).license != license) purge.push_back(id);
    for (TokenId id : purge) {
      env.tokens.burn(id, BurnCause::LicenseChange, env.now());
      active_tokens_.erase(id);
    }
    accrue_cost(r.gas_used, env.chain.price());
    return r;
  }

  TxReceipt set_profit_margin(ContractEnv env, Address caller, int pct) {
    require_live();
    require_owner(caller);
    validate_margin(pct);
    auto r = env.chain.execute(caller, Fn::SetProfitMargin);
    profit_margin_pct_ = pct;
    accrue_cost(r.gas_used, env.chain.price());
    return r;
  }

  TxReceipt set_multis(ContractEnv env, Address caller, int access_pct, int renew_pct) {
    require_live();
    require_owner(caller);
    validate_fraction(access_pct);
    validate_fraction(renew_pct);
    auto r = env.chain.execute(caller, Fn::SetMultis);
    access_fraction_pct_ = access_pct;
    renew_fraction_pct_ = renew_pct;
    accrue_cost(r.gas_used, env.chain.price());
    return r;
  }

  /// Stored only; no scenario prices through it.
  TxReceipt set_price(ContractEnv env, Address caller, Wei price) {
    require_live();
    require_owner(caller);
    if (price < Wei(0)) throw ContractError(Errc::OutOfRange, "negative price");
    auto r = env.chain.execute(caller, Fn::SetPrice);
    price_ = price;
    accrue_cost(r.gas_used, env.chain.price());
    return r;
  }

  TxReceipt set_registry_address(ContractEnv env, Address caller, Address registry) {
    require_live();
    require_owner(caller);
    auto r = env.chain.execute(caller, Fn::SetRegistryAddress);
    registry_address_ = registry;
    accrue_cost(r.gas_used, env.chain.price());
    return r;
  }

  /// Owner pulls part of the internal balance. Unmetered.
  TxReceipt withdraw(ContractEnv env, Address caller, Wei amount) {
    require_live();
    require_owner(caller);
    if (amount < Wei(0) || amount > env.chain.balance(address_))
      throw ContractError(Errc::OutOfRange, "withdraw exceeds contract balance");
    return env.chain.transfer_from_contract(address_, owner_, amount, Fn::Withdraw);
  }

  /// Sends the internal balance to the owner and zeroes every field. Terminal: each
  /// later call fails with Destroyed. Live token holders are notified, not refunded.
  TxReceipt destroy(ContractEnv env, Address caller) {
    if (destroyed_) throw ContractError(Errc::AlreadyDestroyed, address_.str());
    require_owner(caller);
    auto r = env.chain.transfer_from_contract(address_, owner_, env.chain.balance(address_), Fn::Destroy);
    for (TokenId id : active_tokens_) env.tokens.notify(id, NoticeKind::DatasetDestroyed, env.now());
    const Address keep = address_;
    *this = DatasetContract{};
    address_ = keep;
    destroyed_ = true;
    return r;
  }

  // Hooks for the access operations.
  void record_payment(Wei payment) {
    current_cost_ = payment >= current_cost_ ? Wei(0) : current_cost_ - payment;
    provider_earnings_ += payment;
  }
  void attach_token(TokenId id) { active_tokens_.insert(id); }
  void detach_token(TokenId id) { active_tokens_.erase(id); }

  void require_live() const {
    if (destroyed_) throw ContractError(Errc::Destroyed, address_.str());
  }

  Address address() const { return address_; }
  Address owner() const { return owner_; }
  const std::string& link() const { return link_; }
  std::uint64_t meta_version() const { return meta_version_; }
  std::uint64_t license_changes() const { return license_changes_; }
  LicenseType required_license() const { return required_license_; }
  Scenario scenario() const { return scenario_; }
  int profit_margin_pct() const { return profit_margin_pct_; }
  int access_fraction_pct() const { return access_fraction_pct_; }
  int renew_fraction_pct() const { return renew_fraction_pct_; }
  Wei price() const { return price_; }
  Address registry_address() const { return registry_address_; }
  Wei current_cost() const { return current_cost_; }
  Wei provider_cost() const { return provider_cost_; }
  Wei provider_earnings() const { return provider_earnings_; }
  Wei accrued_total() const { return accrued_total_; }
  Wei profit() const { return provider_earnings_ - provider_cost_; }
  Wei contract_balance(const ChainState& chain) const { return chain.balance(address_); }
  const std::set<TokenId>& active_tokens() const { return active_tokens_; }
  bool published() const { return published_; }
  bool destroyed() const { return destroyed_; }

 private:
  void require_owner(Address caller) const {
    if (caller != owner_) throw ContractError(Errc::NotOwner, caller.str());
  }

  Address address_;
  Address owner_;
  std::string link_;
  std::uint64_t meta_version_ = 0;
  std::uint64_t license_changes_ = 0;
  LicenseType required_license_;
  Scenario scenario_ = Scenario::NoCompensation;
  int profit_margin_pct_ = 100;
  int access_fraction_pct_ = 0;
  int renew_fraction_pct_ = 0;
  Wei price_;
  Address registry_address_;
  Wei current_cost_;
  Wei provider_cost_;
  Wei provider_earnings_;
  Wei accrued_total_;
  std::set<TokenId> active_tokens_;
  bool published_ = false;
  bool destroyed_ = false;
};

/// One row of the per-period contract snapshot.
struct ContractSnapshot {
  Period period = 0;
  Address contract;
  Wei current_cost;
  Wei provider_cost;
  Wei provider_earnings;
  std::size_t active_tokens = 0;
  std::uint64_t meta_version = 0;

  static ContractSnapshot of(Period p, const DatasetContract& c) {
    return {p, c.address(), c.current_cost(), c.provider_cost(), c.provider_earnings(), c.active_tokens().size(),
            c.meta_version()};
  }
};

inline void write_contracts_csv(std::ostream& os, const std::vector<ContractSnapshot>& rows) {
  os << "period,contract,currentCostWei,providerCostWei,providerEarningsWei,activeTokens,metaVersion\n";
  for (const auto& s : rows)
    os << s.period << ',' << s.contract.str() << ',' << s.current_cost.str() << ',' << s.provider_cost.str() << ','
       << s.provider_earnings.str() << ',' << s.active_tokens << ',' << s.meta_version << '\n';
}

}  // namespace incentive_ledger
