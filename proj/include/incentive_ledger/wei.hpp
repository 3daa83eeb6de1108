#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace incentive_ledger {

/// Signed 128-bit wei amount. Balances of 100 ETH (1e20 wei) do not fit in 64 bits,
/// and profit series go negative, so everything money-related flows through this type.
class Wei {
 public:
  using rep = __int128;

  constexpr Wei() = default;
  constexpr explicit Wei(rep v) : v_(v) {}

  static constexpr Wei from_gwei(std::int64_t g) { return Wei(rep(g) * 1'000'000'000); }
  static constexpr Wei from_ether(std::int64_t e) { return Wei(rep(e) * kWeiPerEther); }

  /// Parses an optionally signed decimal integer.
  static Wei parse(std::string_view s) {
    if (s.empty()) throw std::invalid_argument("empty wei literal");
    bool neg = false;
    std::size_t i = 0;
    if (s[0] == '-' || s[0] == '+') {
      neg = s[0] == '-';
      i = 1;
    }
    if (i == s.size()) throw std::invalid_argument("bad wei literal");
    rep v = 0;
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("bad wei literal: " + std::string(s));
      v = v * 10 + (s[i] - '0');
    }
    return Wei(neg ? -v : v);
  }

  constexpr rep raw() const { return v_; }
  constexpr bool is_zero() const { return v_ == 0; }
  constexpr bool negative() const { return v_ < 0; }

  long double to_ether() const { return static_cast<long double>(v_) / static_cast<long double>(kWeiPerEther); }

  std::string str() const {
    if (v_ == 0) return "0";
    rep x = v_ < 0 ? -v_ : v_;
    std::string out;
    while (x > 0) {
      out.insert(out.begin(), char('0' + static_cast<int>(x % 10)));
      x /= 10;
    }
    if (v_ < 0) out.insert(out.begin(), '-');
    return out;
  }

  constexpr Wei& operator+=(Wei o) { v_ += o.v_; return *this; }
  constexpr Wei& operator-=(Wei o) { v_ -= o.v_; return *this; }
  friend constexpr Wei operator+(Wei a, Wei b) { return Wei(a.v_ + b.v_); }
  friend constexpr Wei operator-(Wei a, Wei b) { return Wei(a.v_ - b.v_); }
  friend constexpr Wei operator-(Wei a) { return Wei(-a.v_); }
  friend constexpr Wei operator*(Wei a, rep k) { return Wei(a.v_ * k); }
  friend constexpr Wei operator*(rep k, Wei a) { return Wei(a.v_ * k); }
  friend constexpr auto operator<=>(Wei, Wei) = default;

  static constexpr rep kWeiPerEther = rep(1'000'000'000'000'000'000LL);

 private:
  rep v_ = 0;
};

/// Gas units. Kept unsigned 64-bit; per-call gas never approaches the limit.
using Gas = std::uint64_t;

/// floor(a * num / den) for non-negative a.
constexpr Wei mul_div_floor(Wei a, std::int64_t num, std::int64_t den) {
  return Wei(a.raw() * num / den);
}

/// ceil(a * num / den) for non-negative a.
constexpr Wei mul_div_ceil(Wei a, std::int64_t num, std::int64_t den) {
  const Wei::rep p = a.raw() * num;
  return Wei((p + den - 1) / den);
}

}  // namespace incentive_ledger
