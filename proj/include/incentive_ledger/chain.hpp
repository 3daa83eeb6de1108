#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "wei.hpp"

namespace incentive_ledger {

/// Opaque account identifier. Id 0 is the null address and never backs an account.
struct Address {
  std::uint64_t id = 0;

  static constexpr Address null() { return Address{0}; }
  constexpr bool is_null() const { return id == 0; }
  std::string str() const { return "0x" + hex(); }

  friend constexpr auto operator<=>(Address, Address) = default;

 private:
  std::string hex() const {
    std::ostringstream os;
    os << std::hex;
    os.width(8);
    os.fill('0');
    os << id;
    return os.str();
  }
};

using Period = std::int64_t;

/// Every function that can appear in a receipt. The unmetered tags at the end are
/// internal value moves and never appear in a GasSchedule.
enum class Fn {
  Deployment,
  PublishData,
  UpdateData,
  AddDataRequester,
  RenewToken,
  SetLicense,
  SetRegistryAddress,
  SetProfitMargin,
  SetPrice,
  SetMultis,
  RegistryDeployment,
  NewDataProvider,
  RegisterNewUser,
  UpdateUserLicense,
  CheckProvider,
  CheckUser,
  // unmetered
  Destroy,
  Withdraw,
};

inline constexpr std::array<std::pair<Fn, std::string_view>, 18> kFnNames{{
    {Fn::Deployment, "deployment"},
    {Fn::PublishData, "publishData"},
    {Fn::UpdateData, "updateData"},
    {Fn::AddDataRequester, "addDataRequester"},
    {Fn::RenewToken, "renewToken"},
    {Fn::SetLicense, "setLicense"},
    {Fn::SetRegistryAddress, "setRegistryAddress"},
    {Fn::SetProfitMargin, "setProfitMargin"},
    {Fn::SetPrice, "setPrice"},
    {Fn::SetMultis, "setMultis"},
    {Fn::RegistryDeployment, "registry.deployment"},
    {Fn::NewDataProvider, "registry.newDataProvider"},
    {Fn::RegisterNewUser, "registry.registerNewUser"},
    {Fn::UpdateUserLicense, "registry.updateUserLicense"},
    {Fn::CheckProvider, "registry.checkProvider"},
    {Fn::CheckUser, "registry.checkUser"},
    {Fn::Destroy, "destroy"},
    {Fn::Withdraw, "withdraw"},
}};

constexpr std::string_view to_string(Fn f) {
  for (const auto& [fn, name] : kFnNames)
    if (fn == f) return name;
  return "?";
}

inline std::optional<Fn> parse_fn(std::string_view name) {
  for (const auto& [fn, n] : kFnNames)
    if (n == name) return fn;
  return std::nullopt;
}

struct GasEntry {
  Gas transaction = 0;  // charged
  Gas execution = 0;    // metadata only
};

/// Per-function transaction gas. Defaults reproduce the measured LUCE contract costs.
class GasSchedule {
 public:
  /// Gas added to updateData per active requester. Calibrated so that an update with
  /// 60 holders costs $64.30 at 72 Gwei and $1716.52/ETH.
  static constexpr Gas kDefaultPerRequesterUpdateGas = 7'941;

  GasSchedule() = default;

  static GasSchedule defaults() {
    GasSchedule s;
    s.entries_ = {
        {Fn::Deployment, {6'724'230, 5'118'378}},
        {Fn::PublishData, {95'560, 72'560}},
        {Fn::UpdateData, {43'799, 20'863}},
        {Fn::AddDataRequester, {475'067, 453'411}},
        {Fn::RenewToken, {45'211, 23'747}},
        {Fn::SetLicense, {39'339, 37'075}},
        {Fn::SetRegistryAddress, {37'131, 14'515}},
        {Fn::SetProfitMargin, {35'091, 13'627}},
        {Fn::SetPrice, {31'062, 9'406}},
        // not measured; shares the setProfitMargin cost (same single-slot write)
        {Fn::SetMultis, {35'091, 13'627}},
        {Fn::RegistryDeployment, {621'087, 432'315}},
        {Fn::NewDataProvider, {44'855, 22'175}},
        {Fn::RegisterNewUser, {45'669, 22'797}},
        {Fn::UpdateUserLicense, {27'732, 6'268}},
        {Fn::CheckProvider, {23'991, 1'311}},
        {Fn::CheckUser, {23'877, 1'197}},
    };
    s.per_requester_update_gas_ = kDefaultPerRequesterUpdateGas;
    return s;
  }

  bool contains(Fn f) const { return entries_.contains(f); }

  Gas gas(Fn f) const {
    auto it = entries_.find(f);
    if (it == entries_.end()) throw ContractError(Errc::UnknownFunction, std::string(to_string(f)));
    return it->second.transaction;
  }

  const GasEntry& entry(Fn f) const {
    auto it = entries_.find(f);
    if (it == entries_.end()) throw ContractError(Errc::UnknownFunction, std::string(to_string(f)));
    return it->second;
  }

  void set(Fn f, GasEntry e) {
    if (e.transaction == 0) throw ContractError(Errc::BadConfig, "gas entries must be positive");
    entries_[f] = e;
  }

  Gas per_requester_update_gas() const { return per_requester_update_gas_; }
  void set_per_requester_update_gas(Gas g) {
    if (g == 0) throw ContractError(Errc::BadConfig, "perRequesterUpdateGas must be positive");
    per_requester_update_gas_ = g;
  }

  const std::map<Fn, GasEntry>& entries() const { return entries_; }

  /// Applies `name=gas` lines (blank lines and `#` comments ignored) on top of this
  /// schedule. The key `perRequesterUpdateGas` sets the per-holder update surcharge.
  void apply_overrides(std::istream& in) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      auto trim = [](std::string& s) {
        s.erase(0, s.find_first_not_of(" \t\r"));
        s.erase(s.find_last_not_of(" \t\r") + 1);
      };
      trim(line);
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ContractError(Errc::BadConfig, "gas table line " + std::to_string(lineno) + ": expected name=gas");
      std::string key = line.substr(0, eq), val = line.substr(eq + 1);
      trim(key);
      trim(val);
      Gas g = 0;
      try {
        std::size_t used = 0;
        g = std::stoull(val, &used);
        if (used != val.size()) throw std::invalid_argument(val);
      } catch (const std::exception&) {
        throw ContractError(Errc::BadConfig, "gas table line " + std::to_string(lineno) + ": bad gas value");
      }
      if (key == "perRequesterUpdateGas") {
        set_per_requester_update_gas(g);
        continue;
      }
      auto fn = parse_fn(key);
      if (!fn || *fn == Fn::Destroy || *fn == Fn::Withdraw)
        throw ContractError(Errc::BadConfig, "gas table line " + std::to_string(lineno) + ": unknown function " + key);
      GasEntry e = contains(*fn) ? entry(*fn) : GasEntry{};
      e.transaction = g;
      set(*fn, e);
    }
  }

  void load_overrides(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ContractError(Errc::BadConfig, "cannot open gas table " + path);
    apply_overrides(in);
  }

 private:
  std::map<Fn, GasEntry> entries_;
  Gas per_requester_update_gas_ = kDefaultPerRequesterUpdateGas;
};

/// Fixed gas price and exchange rate for one run.
struct PriceModel {
  Wei gas_price = Wei::from_gwei(72);
  double eth_usd = 1716.52;

  void validate() const {
    if (gas_price <= Wei(0)) throw ContractError(Errc::BadConfig, "gas price must be positive");
    if (!(eth_usd > 0) || !std::isfinite(eth_usd)) throw ContractError(Errc::BadConfig, "ETH/USD must be positive");
  }

  Wei fee(Gas g) const { return gas_price * static_cast<Wei::rep>(g); }

  double to_usd(Wei w) const { return static_cast<double>(w.to_ether() * static_cast<long double>(eth_usd)); }

  /// Whole cents, rounded half away from zero, computed in integers from the rate in
  /// micro-dollars so the display value is reproducible.
  std::int64_t to_cents(Wei w) const {
    const Wei::rep micros = static_cast<Wei::rep>(std::llround(eth_usd * 1e6));
    const Wei::rep num = w.raw() * micros;  // USD * 1e24
    constexpr Wei::rep kPerCent = Wei::rep(10'000'000'000LL) * Wei::rep(1'000'000'000'000LL);  // 1e22
    const Wei::rep mag = num < 0 ? -num : num;
    const Wei::rep cents = (mag + kPerCent / 2) / kPerCent;
    return static_cast<std::int64_t>(num < 0 ? -cents : cents);
  }

  std::string format_usd(Wei w) const {
    const std::int64_t c = to_cents(w);
    const std::int64_t mag = c < 0 ? -c : c;
    std::string frac = std::to_string(mag % 100);
    if (frac.size() < 2) frac.insert(frac.begin(), '0');
    return std::string(c < 0 ? "-" : "") + std::to_string(mag / 100) + "." + frac;
  }
};

struct TxReceipt {
  std::size_t index = 0;
  Period period = 0;
  Address caller;
  Fn function = Fn::Deployment;
  Gas gas_used = 0;
  Wei gas_fee;
  Wei value;
  Address recipient;  // null when no value moved
  double usd_cost = 0.0;  // fee + value, reporting only
};

enum class AccountKind { External, Contract, MinerSink };

/// Mock ledger: integer wei balances, metered execution, append-only receipt log.
/// Fees go to a miner sink, so the sum of all balances never changes.
class ChainState {
 public:
  explicit ChainState(GasSchedule schedule = GasSchedule::defaults(), PriceModel price = {})
      : schedule_(std::move(schedule)), price_(price) {
    price_.validate();
    balances_.push_back(Wei(0));  // null address slot
    kinds_.push_back(AccountKind::External);
    miner_ = add(Wei(0), AccountKind::MinerSink);
  }

  std::vector<Address> create_accounts(std::size_t n, Wei prefund) {
    if (n == 0) throw ContractError(Errc::BadConfig, "createAccounts requires n >= 1");
    if (prefund < Wei(0)) throw ContractError(Errc::BadConfig, "negative prefund");
    std::vector<Address> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(add(prefund, AccountKind::External));
    initial_total_ += prefund * static_cast<Wei::rep>(n);
    return out;
  }

  Address create_contract_account() { return add(Wei(0), AccountKind::Contract); }

  /// Runs a metered call. Either the whole receipt applies or nothing does.
  TxReceipt execute(Address caller, Fn fn, Gas extra_gas = 0, Wei value = Wei(0),
                    Address recipient = Address::null()) {
    require_account(caller);
    if (!recipient.is_null()) require_account(recipient);
    if (value < Wei(0)) throw ContractError(Errc::OutOfRange, "negative value");
    if (value > Wei(0) && recipient.is_null()) throw ContractError(Errc::UnknownAccount, "value without recipient");
    const Gas gas = schedule_.gas(fn) + extra_gas;
    const Wei fee = price_.fee(gas);
    if (balances_[caller.id] < fee + value)
      throw ContractError(Errc::InsufficientFunds, caller.str() + " cannot cover " + (fee + value).str() + " wei");
    balances_[caller.id] -= fee + value;
    balances_[miner_.id] += fee;
    if (!recipient.is_null()) balances_[recipient.id] += value;
    return log(caller, fn, gas, fee, value, recipient);
  }

  /// Unmetered value move out of a contract account (destroy, withdraw).
  TxReceipt transfer_from_contract(Address contract, Address to, Wei value, Fn tag) {
    require_account(contract);
    require_account(to);
    if (kinds_[contract.id] != AccountKind::Contract)
      throw ContractError(Errc::UnknownAccount, contract.str() + " is not a contract");
    if (value < Wei(0) || balances_[contract.id] < value)
      throw ContractError(Errc::InsufficientFunds, "contract balance too low");
    balances_[contract.id] -= value;
    balances_[to.id] += value;
    return log(contract, tag, 0, Wei(0), value, to);
  }

  bool exists(Address a) const { return !a.is_null() && a.id < balances_.size(); }
  Wei balance(Address a) const {
    require_account(a);
    return balances_[a.id];
  }
  AccountKind kind(Address a) const {
    require_account(a);
    return kinds_[a.id];
  }

  Address miner_sink() const { return miner_; }
  Wei initial_total() const { return initial_total_; }
  Wei total_value() const {
    Wei t;
    for (std::size_t i = 1; i < balances_.size(); ++i) t += balances_[i];
    return t;
  }

  /// Account ids are dense, so every live account is 1..account_count().
  std::size_t account_count() const { return balances_.size() - 1; }
  std::vector<Wei> balances() const { return {balances_.begin() + 1, balances_.end()}; }

  std::span<const TxReceipt> receipts() const { return receipts_; }

  void set_period(Period p) { period_ = p; }
  Period period() const { return period_; }

  const GasSchedule& schedule() const { return schedule_; }
  const PriceModel& price() const { return price_; }

 private:
  Address add(Wei balance, AccountKind kind) {
    balances_.push_back(balance);
    kinds_.push_back(kind);
    return Address{balances_.size() - 1};
  }

  void require_account(Address a) const {
    if (!exists(a)) throw ContractError(Errc::UnknownAccount, a.str());
  }

  TxReceipt log(Address caller, Fn fn, Gas gas, Wei fee, Wei value, Address recipient) {
    TxReceipt r;
    r.index = receipts_.size();
    r.period = period_;
    r.caller = caller;
    r.function = fn;
    r.gas_used = gas;
    r.gas_fee = fee;
    r.value = value;
    r.recipient = recipient;
    r.usd_cost = price_.to_usd(fee + value);
    receipts_.push_back(r);
    return r;
  }

  GasSchedule schedule_;
  PriceModel price_;
  std::vector<Wei> balances_;
  std::vector<AccountKind> kinds_;
  Address miner_;
  Wei initial_total_;
  std::vector<TxReceipt> receipts_;
  Period period_ = 0;
};

/// Transaction log CSV: index,period,caller,function,gasUsed,gasFeeWei,valueWei,recipient,usdCost
inline void write_transactions_csv(std::ostream& os, std::span<const TxReceipt> log, const PriceModel& price) {
  os << "index,period,caller,function,gasUsed,gasFeeWei,valueWei,recipient,usdCost\n";
  for (const auto& r : log) {
    os << r.index << ',' << r.period << ',' << r.caller.str() << ',' << to_string(r.function) << ','
       << r.gas_used << ',' << r.gas_fee.str() << ',' << r.value.str() << ','
       << (r.recipient.is_null() ? std::string() : r.recipient.str()) << ','
       << price.format_usd(r.gas_fee + r.value) << '\n';
  }
}

}  // namespace incentive_ledger
