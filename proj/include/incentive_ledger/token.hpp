#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "chain.hpp"
#include "registry.hpp"

namespace incentive_ledger {

using TokenId = std::uint64_t;

/// Access key in the adapted ERC-721 list. `owner` is the minting provider; `user` is
/// the requester, who may burn the token but never transfer it.
struct AccessToken {
  TokenId id = 0;
  Address dataset;
  Address owner;
  Address user;
  Address original_user;  // kept for reporting after burn clears `user`
  LicenseType license;
  Period minted_period = 0;
  Period access_until = 0;
  bool compliance = true;
  bool burned = false;
  Period remaining_at_burn = 0;

  bool live() const { return !burned; }
};

enum class BurnCause { Requester, LicenseChange };

enum class NoticeKind { Minted, UpdateIssued, BurnedByRequester, BurnedByLicenseChange, DatasetDestroyed };

/// Holder notifications plus the compliance audit trail a supervisory authority reads.
struct Notice {
  Period period = 0;
  TokenId token = 0;
  Address holder;
  NoticeKind kind = NoticeKind::Minted;
};

struct ComplianceEvent {
  Period period = 0;
  TokenId token = 0;
  Address requester;
};

/// Run-wide token list. Ids start at 1 and are never reused.
class TokenBook {
 public:
  TokenId mint(Address dataset, Address owner, Address user, LicenseType license, Period now, Period access_until) {
    if (find_live(dataset, user)) throw ContractError(Errc::DuplicateToken, user.str());
    AccessToken t;
    t.id = next_id_++;
    t.dataset = dataset;
    t.owner = owner;
    t.user = user;
    t.original_user = user;
    t.license = license;
    t.minted_period = now;
    t.access_until = access_until;
    live_[{dataset, user}] = t.id;
    tokens_.emplace(t.id, t);
    notices_.push_back({now, t.id, user, NoticeKind::Minted});
    return t.id;
  }

  std::optional<TokenId> find_live(Address dataset, Address user) const {
    auto it = live_.find({dataset, user});
    if (it == live_.end()) return std::nullopt;
    return it->second;
  }

  const AccessToken& get(TokenId id) const {
    auto it = tokens_.find(id);
    if (it == tokens_.end()) throw ContractError(Errc::NoToken, "token " + std::to_string(id));
    return it->second;
  }

  /// Records remaining access time, detaches the user and notifies the holder.
  void burn(TokenId id, BurnCause cause, Period now) {
    AccessToken& t = mut(id);
    if (t.burned) throw ContractError(Errc::AlreadyBurned, "token " + std::to_string(id));
    t.remaining_at_burn = std::max<Period>(0, t.access_until - now);
    t.compliance = cause == BurnCause::Requester;
    t.burned = true;
    live_.erase({t.dataset, t.user});
    notices_.push_back({now, id, t.user,
                        cause == BurnCause::Requester ? NoticeKind::BurnedByRequester
                                                      : NoticeKind::BurnedByLicenseChange});
    t.user = Address::null();
  }

  /// Only the minting owner may reassign a token; its user never can.
  void transfer(Address caller, TokenId id, Address new_owner) {
    AccessToken& t = mut(id);
    if (t.burned) throw ContractError(Errc::AlreadyBurned, "token " + std::to_string(id));
    if (caller == t.user) throw ContractError(Errc::TransferDisabled, "requesters cannot transfer access tokens");
    if (caller != t.owner) throw ContractError(Errc::NotOwner, caller.str());
    if (new_owner.is_null()) throw ContractError(Errc::OutOfRange, "transfer to null address");
    t.owner = new_owner;
  }

  void set_compliance(TokenId id, bool value) { mut(id).compliance = value; }
  void set_access_until(TokenId id, Period p) { mut(id).access_until = p; }

  void confirm(TokenId id, Period now) {
    const AccessToken& t = get(id);
    if (t.burned) throw ContractError(Errc::NoToken, "token burned");
    mut(id).compliance = true;
    audit_.push_back({now, id, t.user});
  }

  void notify(TokenId id, NoticeKind kind, Period now) { notices_.push_back({now, id, get(id).user, kind}); }

  const std::map<TokenId, AccessToken>& all() const { return tokens_; }
  std::size_t live_count() const { return live_.size(); }
  const std::vector<Notice>& notices() const { return notices_; }
  const std::vector<ComplianceEvent>& audit_trail() const { return audit_; }

 private:
  AccessToken& mut(TokenId id) {
    auto it = tokens_.find(id);
    if (it == tokens_.end()) throw ContractError(Errc::NoToken, "token " + std::to_string(id));
    return it->second;
  }

  TokenId next_id_ = 1;
  std::map<TokenId, AccessToken> tokens_;
  std::map<std::pair<Address, Address>, TokenId> live_;
  std::vector<Notice> notices_;
  std::vector<ComplianceEvent> audit_;
};

/// Token table CSV: tokenId,dataset,user,mintedPeriod,accessUntil,compliance,burned,remainingAtBurn
/// `user` is the requester the token was minted for, also after burn.
inline void write_tokens_csv(std::ostream& os, const TokenBook& book) {
  os << "tokenId,dataset,user,mintedPeriod,accessUntil,compliance,burned,remainingAtBurn\n";
  for (const auto& [id, t] : book.all()) {
    os << id << ',' << t.dataset.str() << ',' << t.original_user.str() << ',' << t.minted_period << ','
       << t.access_until << ',' << (t.compliance ? 1 : 0) << ',' << (t.burned ? 1 : 0) << ','
       << t.remaining_at_burn << '\n';
  }
}

}  // namespace incentive_ledger
