#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>

#include "chain.hpp"

namespace incentive_ledger {

struct LicenseType {
  std::uint32_t code = 0;
  friend constexpr auto operator<=>(LicenseType, LicenseType) = default;
};

/// Gateway contract: maps addresses to verified licenses and publishing permission.
/// Only the deploying authority mutates it. External calls are metered; the check*
/// reads used internally by other contracts are free.
class Registry {
 public:
  /// Deploys the registry; the authority pays the deployment gas.
  static Registry deploy(ChainState& chain, Address authority) {
    chain.execute(authority, Fn::RegistryDeployment);
    Registry r;
    r.authority_ = authority;
    return r;
  }

  TxReceipt register_new_user(ChainState& chain, Address caller, Address user, LicenseType license) {
    require_authority(caller);
    if (user.is_null()) throw ContractError(Errc::OutOfRange, "null address cannot register");
    if (users_.contains(user)) throw ContractError(Errc::AlreadyRegistered, user.str());
    auto r = chain.execute(caller, Fn::RegisterNewUser);
    users_[user] = license;
    return r;
  }

  TxReceipt new_data_provider(ChainState& chain, Address caller, Address provider) {
    require_authority(caller);
    if (provider.is_null()) throw ContractError(Errc::OutOfRange, "null address cannot register");
    if (providers_.contains(provider)) throw ContractError(Errc::AlreadyRegistered, provider.str());
    auto r = chain.execute(caller, Fn::NewDataProvider);
    providers_.insert(provider);
    return r;
  }

  TxReceipt update_user_license(ChainState& chain, Address caller, Address user, LicenseType license) {
    require_authority(caller);
    auto it = users_.find(user);
    if (it == users_.end()) throw ContractError(Errc::NotRegistered, user.str());
    auto r = chain.execute(caller, Fn::UpdateUserLicense);
    it->second = license;
    return r;
  }

  bool check_user(Address user, LicenseType license) const {
    auto it = users_.find(user);
    return it != users_.end() && it->second == license;
  }

  bool check_provider(Address addr) const { return providers_.contains(addr); }

  /// Metered external variants of the reads, as listed in the registry cost table.
  std::pair<bool, TxReceipt> check_user_tx(ChainState& chain, Address caller, Address user, LicenseType license) const {
    auto r = chain.execute(caller, Fn::CheckUser);
    return {check_user(user, license), r};
  }
  std::pair<bool, TxReceipt> check_provider_tx(ChainState& chain, Address caller, Address addr) const {
    auto r = chain.execute(caller, Fn::CheckProvider);
    return {check_provider(addr), r};
  }

  std::optional<LicenseType> license_of(Address user) const {
    auto it = users_.find(user);
    if (it == users_.end()) return std::nullopt;
    return it->second;
  }

  Address authority() const { return authority_; }
  const std::map<Address, LicenseType>& users() const { return users_; }
  const std::set<Address>& providers() const { return providers_; }

 private:
  void require_authority(Address caller) const {
    if (caller != authority_) throw ContractError(Errc::NotAuthority, caller.str());
  }

  Address authority_;
  std::map<Address, LicenseType> users_;
  std::set<Address> providers_;
};

/// Registry snapshot CSV: address,role,license. Dual-role addresses get one row per role.
inline void write_registry_csv(std::ostream& os, const Registry& reg) {
  os << "address,role,license\n";
  std::set<Address> all;
  for (const auto& [a, _] : reg.users()) all.insert(a);
  all.insert(reg.providers().begin(), reg.providers().end());
  for (Address a : all) {
    if (reg.check_provider(a)) os << a.str() << ",provider,\n";
    if (auto lic = reg.license_of(a)) os << a.str() << ",user," << lic->code << '\n';
  }
}

}  // namespace incentive_ledger
