#pragma once

#include <algorithm>
#include <string>

#include "dataset.hpp"
#include "token.hpp"

namespace incentive_ledger {

/// Fixed access window granted by a request or renewal.
inline constexpr Period kAccessPeriods = 2;

enum class PaymentKind { Access, Renewal };

struct PaymentQuote {
  Wei current_expected;  // due now
  Wei next_expected;     // what the next payer would owe after this payment
};

namespace detail {
inline Wei fraction_of(Wei cost, int pct) { return mul_div_ceil(cost, pct, 100); }
}  // namespace detail

/// Payment due for an access or renewal: ceil(currentCost * fraction / 100), zero in
/// Scenario 1. Rounding up lets repeated payments drain the running cost to exactly 0.
inline PaymentQuote quote_payment(const DatasetContract& c, PaymentKind kind) {
  c.require_live();
  if (c.scenario() == Scenario::NoCompensation) return {};
  const int pct = kind == PaymentKind::Access ? c.access_fraction_pct() : c.renew_fraction_pct();
  const Wei now = detail::fraction_of(c.current_cost(), pct);
  return {now, detail::fraction_of(c.current_cost() - now, pct)};
}

namespace detail {
inline void check_payment(Wei value, Wei due) {
  if (value < due) throw ContractError(Errc::InsufficientPayment, "sent " + value.str() + ", due " + due.str());
  if (value > due) throw ContractError(Errc::ExcessPayment, "sent " + value.str() + ", due " + due.str());
}

inline TokenId live_token(const ContractEnv& env, const DatasetContract& c, Address requester) {
  auto id = env.tokens.find_live(c.address(), requester);
  if (!id) throw ContractError(Errc::NoToken, requester.str());
  return *id;
}
}  // namespace detail

/// Grants an access token. Requirements, in order: the dataset is published, the
/// requester holds no live token for it, the registry confirms the required license,
/// and (Scenarios 2/3) `value` equals the access quote exactly.
inline TokenId request_access(ContractEnv env, DatasetContract& c, Address requester, Wei value) {
  c.require_live();
  if (!c.published()) throw ContractError(Errc::NotPublished, c.address().str());
  if (env.tokens.find_live(c.address(), requester)) throw ContractError(Errc::DuplicateToken, requester.str());
  if (!env.registry.check_user(requester, c.required_license()))
    throw ContractError(Errc::LicenseMismatch, requester.str());
  const Wei due = quote_payment(c, PaymentKind::Access).current_expected;
  detail::check_payment(value, due);
  env.chain.execute(requester, Fn::AddDataRequester, 0, value, value.is_zero() ? Address::null() : c.address());
  const TokenId id =
      env.tokens.mint(c.address(), c.owner(), requester, c.required_license(), env.now(), env.now() + kAccessPeriods);
  c.attach_token(id);
  c.record_payment(value);
  return id;
}

/// Extends access by two periods from max(now, accessUntil). Requires compliance with
/// every update issued since the holder last confirmed.
inline const AccessToken& renew_access_time(ContractEnv env, DatasetContract& c, Address requester, Wei value) {
  c.require_live();
  const TokenId id = detail::live_token(env, c, requester);
  if (!env.tokens.get(id).compliance) throw ContractError(Errc::ComplianceRequired, requester.str());
  const Wei due = quote_payment(c, PaymentKind::Renewal).current_expected;
  detail::check_payment(value, due);
  env.chain.execute(requester, Fn::RenewToken, 0, value, value.is_zero() ? Address::null() : c.address());
  env.tokens.set_access_until(id, std::max(env.now(), env.tokens.get(id).access_until) + kAccessPeriods);
  c.record_payment(value);
  return env.tokens.get(id);
}

/// Unmetered; appends to the audit trail even when already compliant.
inline void confirm_compliance(ContractEnv env, const DatasetContract& c, Address requester) {
  c.require_live();
  env.tokens.confirm(detail::live_token(env, c, requester), env.now());
}

inline const std::string& get_link(ContractEnv env, const DatasetContract& c, Address requester) {
  c.require_live();
  const TokenId id = detail::live_token(env, c, requester);
  if (env.now() >= env.tokens.get(id).access_until) throw ContractError(Errc::Expired, requester.str());
  return c.link();
}

/// Requester-initiated burn: the holder deletes their copy, so compliance ends true.
inline void relinquish(ContractEnv env, DatasetContract& c, Address requester, TokenId id) {
  c.require_live();
  const AccessToken& t = env.tokens.get(id);
  if (t.dataset != c.address()) throw ContractError(Errc::NoToken, "token belongs to another dataset");
  if (t.burned) throw ContractError(Errc::AlreadyBurned, "token " + std::to_string(id));
  if (t.user != requester) throw ContractError(Errc::NotOwner, requester.str());
  env.tokens.burn(id, BurnCause::Requester, env.now());
  c.detach_token(id);
}

}  // namespace incentive_ledger
