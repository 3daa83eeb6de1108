#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "chain.hpp"
#include "errors.hpp"

namespace incentive_ledger {

using Rng = std::mt19937_64;

enum class Role { Provider, Requester };

constexpr std::string_view to_string(Role r) { return r == Role::Provider ? "provider" : "requester"; }

/// How raw normal draws are mapped into [0, 1].
enum class Normalization {
  MinMax,       // (x - min) / (max - min)
  Clamp,        // clamp(x - mu + 0.5, 0, 1)
  AffineSigma,  // clamp((x - mu) / (6 sigma) + 0.5, 0, 1)
};

struct PopulationConfig {
  std::size_t n_accounts = 1000;
  double mu = 0.0;
  double sigma = 0.1;
  double decay = 0.75;
  std::size_t max_providers = 1;
  double provider_prob_min = 0.01;
  double provider_prob_max = 0.05;
  double update_multiplier = 5.0;
  Normalization normalization = Normalization::MinMax;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_accounts <= max_providers) throw ContractError(Errc::BadConfig, "accounts must exceed providers");
    if (max_providers == 0) throw ContractError(Errc::BadConfig, "at least one provider is required");
    if (!(decay > 0.0 && decay < 1.0)) throw ContractError(Errc::BadConfig, "decay must lie in (0, 1)");
    if (!(sigma > 0.0)) throw ContractError(Errc::BadConfig, "sigma must be positive");
    if (!(provider_prob_min >= 0.0 && provider_prob_min <= provider_prob_max && provider_prob_max <= 1.0))
      throw ContractError(Errc::BadConfig, "provider probabilities must satisfy 0 <= min <= max <= 1");
    if (!(update_multiplier >= 0.0)) throw ContractError(Errc::BadConfig, "update multiplier must be >= 0");
  }
};

struct AgentProfile {
  Address address;
  Role role = Role::Requester;
  double base_prob = 0.0;
  double current_prob = 0.0;
  double update_prob = 0.0;  // providers only
  int renewals = 0;
  std::optional<Period> last_action;
  std::set<Address> datasets_held;
};

/// Draw order: n_accounts normals, then one uniform per provider. The first
/// `max_providers` accounts become providers and their normal draw is overwritten.
inline std::vector<AgentProfile> generate_population(const PopulationConfig& cfg, std::span<const Address> accounts,
                                                     Rng& rng) {
  cfg.validate();
  if (accounts.size() != cfg.n_accounts)
    throw ContractError(Errc::BadConfig, "population needs exactly n_accounts addresses");

  std::normal_distribution<double> normal(cfg.mu, cfg.sigma);
  std::vector<double> raw(cfg.n_accounts);
  for (double& x : raw) x = normal(rng);

  std::vector<double> probs(raw.size());
  switch (cfg.normalization) {
    case Normalization::MinMax: {
      const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
      const double span = *hi - *lo;
      for (std::size_t i = 0; i < raw.size(); ++i) probs[i] = span > 0 ? (raw[i] - *lo) / span : 0.5;
      break;
    }
    case Normalization::Clamp:
      for (std::size_t i = 0; i < raw.size(); ++i) probs[i] = std::clamp(raw[i] - cfg.mu + 0.5, 0.0, 1.0);
      break;
    case Normalization::AffineSigma:
      for (std::size_t i = 0; i < raw.size(); ++i)
        probs[i] = std::clamp((raw[i] - cfg.mu) / (6.0 * cfg.sigma) + 0.5, 0.0, 1.0);
      break;
  }

  std::vector<AgentProfile> out(cfg.n_accounts);
  for (std::size_t i = 0; i < cfg.n_accounts; ++i) {
    out[i].address = accounts[i];
    out[i].base_prob = out[i].current_prob = probs[i];
  }
  std::uniform_real_distribution<double> publish(cfg.provider_prob_min, cfg.provider_prob_max);
  for (std::size_t i = 0; i < cfg.max_providers; ++i) {
    auto& p = out[i];
    p.role = Role::Provider;
    p.base_prob = p.current_prob =
        cfg.provider_prob_min == cfg.provider_prob_max ? cfg.provider_prob_min : publish(rng);
    p.update_prob = std::min(1.0, p.base_prob * cfg.update_multiplier);
  }
  return out;
}

inline std::vector<AgentProfile> generate_population(const PopulationConfig& cfg, std::span<const Address> accounts) {
  Rng rng(cfg.seed);
  return generate_population(cfg, accounts, rng);
}

/// One more renewal: currentProb = baseProb * decay^renewals.
inline void decay_renewal_prob(AgentProfile& a, double decay = 0.75) {
  if (a.role != Role::Requester) throw ContractError(Errc::BadConfig, "only requesters decay");
  ++a.renewals;
  a.current_prob = a.base_prob * std::pow(decay, a.renewals);
}

/// Population dump CSV: address,role,baseProb
inline void write_population_csv(std::ostream& os, std::span<const AgentProfile> pop) {
  os << "address,role,baseProb\n";
  char buf[32];
  for (const auto& a : pop) {
    std::snprintf(buf, sizeof buf, "%.17g", a.base_prob);
    os << a.address.str() << ',' << to_string(a.role) << ',' << buf << '\n';
  }
}

}  // namespace incentive_ledger
