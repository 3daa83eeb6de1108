#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace incentive_ledger {

enum class Errc {
  InsufficientFunds,
  UnknownFunction,
  UnknownAccount,
  NotAuthority,
  AlreadyRegistered,
  NotRegistered,
  NotProvider,
  NotOwner,
  NotPublished,
  Destroyed,
  AlreadyDestroyed,
  OutOfRange,
  DuplicateToken,
  LicenseMismatch,
  InsufficientPayment,
  ExcessPayment,
  NoToken,
  ComplianceRequired,
  Expired,
  AlreadyBurned,
  TransferDisabled,
  BadConfig,
  ReconciliationFailure,
};

constexpr std::string_view to_string(Errc e) {
  switch (e) {
    case Errc::InsufficientFunds: return "InsufficientFunds";
    case Errc::UnknownFunction: return "UnknownFunction";
    case Errc::UnknownAccount: return "UnknownAccount";
    case Errc::NotAuthority: return "NotAuthority";
    case Errc::AlreadyRegistered: return "AlreadyRegistered";
    case Errc::NotRegistered: return "NotRegistered";
    case Errc::NotProvider: return "NotProvider";
    case Errc::NotOwner: return "NotOwner";
    case Errc::NotPublished: return "NotPublished";
    case Errc::Destroyed: return "Destroyed";
    case Errc::AlreadyDestroyed: return "AlreadyDestroyed";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::DuplicateToken: return "DuplicateToken";
    case Errc::LicenseMismatch: return "LicenseMismatch";
    case Errc::InsufficientPayment: return "InsufficientPayment";
    case Errc::ExcessPayment: return "ExcessPayment";
    case Errc::NoToken: return "NoToken";
    case Errc::ComplianceRequired: return "ComplianceRequired";
    case Errc::Expired: return "Expired";
    case Errc::AlreadyBurned: return "AlreadyBurned";
    case Errc::TransferDisabled: return "TransferDisabled";
    case Errc::BadConfig: return "BadConfig";
    case Errc::ReconciliationFailure: return "ReconciliationFailure";
  }
  return "Unknown";
}

/// Raised by every contract, ledger and engine operation that rejects its input.
/// A throwing operation leaves all state untouched.
class ContractError : public std::runtime_error {
 public:
  ContractError(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  explicit ContractError(Errc code) : std::runtime_error(std::string(to_string(code))), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace incentive_ledger
