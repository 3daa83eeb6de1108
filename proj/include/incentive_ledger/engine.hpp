#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "access.hpp"
#include "agents.hpp"
#include "chain.hpp"
#include "dataset.hpp"
#include "registry.hpp"
#include "token.hpp"

namespace incentive_ledger {

/// License every simulated requester registers with and every dataset requires.
inline constexpr LicenseType kDefaultLicense{1};

struct SimConfig {
  Scenario scenario = Scenario::CostCompensation;
  std::int64_t action_ticker = 500;
  int access_fraction_pct = 5;
  int renew_fraction_pct = 5;
  std::optional<int> profit_margin_pct;  // unset: 200 in Scenario 3, else 100
  PopulationConfig population;
  PriceModel price;
  GasSchedule schedule = GasSchedule::defaults();
  Wei prefund = Wei::from_ether(100);
  std::uint64_t seed = 0;
  Period max_periods = 1'000'000;  // stall guard

  int margin() const { return profit_margin_pct.value_or(scenario == Scenario::Profit ? 200 : 100); }

  void validate() const {
    if (action_ticker < 1) throw ContractError(Errc::BadConfig, "actionTicker must be >= 1");
    if (max_periods < 1) throw ContractError(Errc::BadConfig, "max periods must be >= 1");
    if (prefund < Wei(0)) throw ContractError(Errc::BadConfig, "negative prefund");
    validate_fraction(access_fraction_pct);
    validate_fraction(renew_fraction_pct);
    const int m = margin();
    if (m < 100) throw ContractError(Errc::BadConfig, "profit margin must be >= 100");
    if (scenario == Scenario::CostCompensation && m != 100)
      throw ContractError(Errc::BadConfig, "scenario 2 recovers costs only; margin must be 100");
    if (scenario == Scenario::Profit && m <= 100)
      throw ContractError(Errc::BadConfig, "scenario 3 requires a profit margin above 100");
    population.validate();
    price.validate();
  }
};

enum class ActionKind { Publish, Update, Request, Renew };

constexpr std::string_view to_string(ActionKind k) {
  switch (k) {
    case ActionKind::Publish: return "publish";
    case ActionKind::Update: return "update";
    case ActionKind::Request: return "request";
    case ActionKind::Renew: return "renew";
  }
  return "?";
}

inline constexpr std::array<ActionKind, 4> kActionKinds{ActionKind::Publish, ActionKind::Update, ActionKind::Request,
                                                        ActionKind::Renew};

struct ActionRecord {
  std::size_t index = 0;
  Period period = 0;
  ActionKind kind = ActionKind::Publish;
  Address actor;
  Address dataset;
  Wei tx_fee;
  Wei payment;
  double usd_total = 0.0;
  Wei cost_before;    // dataset running cost before the action
  Wei cost_after;     // and after
  Wei next_expected;  // quote the next payer faces (payments only)
};

struct PeriodStats {
  Period period = 0;
  Wei current_cost;
  Wei provider_cost;
  Wei provider_earnings;
  Wei profit;
  std::size_t active_requesters = 0;
  std::int64_t actions_this_period = 0;
};

struct SimResult {
  SimConfig config;
  ChainState chain;
  Registry registry;
  TokenBook tokens;
  std::vector<DatasetContract> contracts;
  std::vector<AgentProfile> population;
  Address authority;
  std::vector<ActionRecord> records;
  std::vector<PeriodStats> series;
  std::vector<ContractSnapshot> snapshots;
  std::vector<Wei> initial_investment;  // per contract: deployment + publishData fees
  std::vector<Wei> initial_balances;    // by account id - 1, before the first transaction
};

namespace detail {

class Simulation {
 public:
  explicit Simulation(const SimConfig& cfg) : rng_(cfg.seed) {
    cfg.validate();
    res_.config = cfg;
    res_.chain = ChainState(cfg.schedule, cfg.price);
  }

  SimResult run() && {
    setup();
    for (Period p = 1; actions_ < res_.config.action_ticker; ++p) {
      if (p > res_.config.max_periods)
        throw ContractError(Errc::BadConfig, "no action budget exhaustion within " +
                                                 std::to_string(res_.config.max_periods) + " periods");
      period(p);
    }
    return std::move(res_);
  }

 private:
  ChainState& chain() { return res_.chain; }
  ContractEnv env() { return {res_.chain, res_.registry, res_.tokens}; }
  bool done() const { return actions_ >= res_.config.action_ticker; }
  bool roll(double p) { return unit_(rng_) < p; }

  // Period 0 holds account and registry setup. Not counted as actions.
  void setup() {
    const auto& cfg = res_.config;
    chain().set_period(0);
    const auto accounts = chain().create_accounts(cfg.population.n_accounts, cfg.prefund);

    const auto& sched = chain().schedule();
    const std::size_t n_prov = cfg.population.max_providers;
    const Gas registration_gas = sched.gas(Fn::RegistryDeployment) + n_prov * sched.gas(Fn::NewDataProvider) +
                                 (cfg.population.n_accounts - n_prov) * sched.gas(Fn::RegisterNewUser);
    res_.authority = chain().create_accounts(1, std::max(cfg.prefund, cfg.price.fee(registration_gas)))[0];

    res_.initial_balances = chain().balances();
    res_.population = generate_population(cfg.population, accounts, rng_);
    res_.registry = Registry::deploy(chain(), res_.authority);
    for (std::size_t i = 0; i < res_.population.size(); ++i) {
      const auto& a = res_.population[i];
      if (a.role == Role::Provider) {
        res_.registry.new_data_provider(chain(), res_.authority, a.address);
        providers_.push_back(i);
      } else {
        res_.registry.register_new_user(chain(), res_.authority, a.address, kDefaultLicense);
        requesters_.push_back(i);
      }
    }
  }

  void period(Period p) {
    chain().set_period(p);
    period_actions_ = 0;
    publish_phase(p);
    update_phase(p);
    request_phase(p);
    renew_phase(p);

    PeriodStats s;
    s.period = p;
    for (const auto& c : res_.contracts) {
      s.current_cost += c.current_cost();
      s.provider_cost += c.provider_cost();
      s.provider_earnings += c.provider_earnings();
      res_.snapshots.push_back(ContractSnapshot::of(p, c));
    }
    s.profit = s.provider_earnings - s.provider_cost;
    s.active_requesters = res_.tokens.live_count();
    s.actions_this_period = period_actions_;
    res_.series.push_back(s);
  }

  // Only the provider in line may publish. The very first action of a run is the
  // first provider publishing, without a roll.
  void publish_phase(Period p) {
    if (done() || next_provider_ >= providers_.size()) return;
    AgentProfile& prov = res_.population[providers_[next_provider_]];
    const bool first = actions_ == 0 && next_provider_ == 0;
    if (!first && !roll(prov.base_prob)) return;

    DatasetTerms terms;
    terms.link = "dataset://" + prov.address.str();
    terms.license = kDefaultLicense;
    terms.scenario = res_.config.scenario;
    terms.profit_margin_pct = res_.config.margin();
    terms.access_fraction_pct = res_.config.access_fraction_pct;
    terms.renew_fraction_pct = res_.config.renew_fraction_pct;
    const std::size_t log_before = chain().receipts().size();
    auto c = DatasetContract::deploy_and_publish(env(), prov.address, std::move(terms));
    Wei fee;
    for (std::size_t i = log_before; i < chain().receipts().size(); ++i) fee += chain().receipts()[i].gas_fee;

    by_address_[c.address()] = res_.contracts.size();
    prov.datasets_held.insert(c.address());
    prov.last_action = p;
    res_.initial_investment.push_back(fee);
    record(p, ActionKind::Publish, prov.address, c.address(), fee, Wei(0), Wei(0), c.current_cost(), Wei(0));
    res_.contracts.push_back(std::move(c));
    ++next_provider_;
  }

  void update_phase(Period p) {
    for (std::size_t ci = 0; ci < res_.contracts.size() && !done(); ++ci) {
      DatasetContract& c = res_.contracts[ci];
      AgentProfile& owner = res_.population[providers_[ci]];
      if (!roll(owner.update_prob)) continue;
      const Wei before = c.current_cost();
      auto r = c.update_data(env(), owner.address);
      owner.last_action = p;
      record(p, ActionKind::Update, owner.address, c.address(), r.gas_fee, Wei(0), before, c.current_cost(), Wei(0));
    }
  }

  // Exactly one requester in line rolls; on a miss the same requester tries again
  // next period.
  void request_phase(Period p) {
    if (done() || res_.contracts.empty() || next_requester_ >= requesters_.size()) return;
    AgentProfile& req = res_.population[requesters_[next_requester_]];
    if (!roll(req.base_prob)) return;

    std::vector<std::size_t> open;
    for (std::size_t ci = 0; ci < res_.contracts.size(); ++ci)
      if (!res_.tokens.find_live(res_.contracts[ci].address(), req.address)) open.push_back(ci);
    ++next_requester_;
    if (open.empty()) return;
    std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
    DatasetContract& c = res_.contracts[open[pick(rng_)]];

    const auto quote = quote_payment(c, PaymentKind::Access);
    const Wei before = c.current_cost();
    request_access(env(), c, req.address, quote.current_expected);
    req.datasets_held.insert(c.address());
    req.last_action = p;
    holders_.push_back(requesters_[next_requester_ - 1]);
    record(p, ActionKind::Request, req.address, c.address(), chain().receipts().back().gas_fee,
           quote.current_expected, before, c.current_cost(), quote.next_expected);
  }

  // Holders renew only once their token has expired and two periods have passed
  // since their last action; each renewal decays their probability.
  void renew_phase(Period p) {
    for (std::size_t hi = 0; hi < holders_.size() && !done(); ++hi) {
      AgentProfile& req = res_.population[holders_[hi]];
      for (Address ds : req.datasets_held) {
        if (done()) return;
        if (req.last_action && p - *req.last_action < kAccessPeriods) break;
        auto tid = res_.tokens.find_live(ds, req.address);
        if (!tid || p < res_.tokens.get(*tid).access_until) continue;
        if (!roll(req.current_prob)) continue;

        DatasetContract& c = res_.contracts[by_address_.at(ds)];
        if (!res_.tokens.get(*tid).compliance) confirm_compliance(env(), c, req.address);
        const auto quote = quote_payment(c, PaymentKind::Renewal);
        const Wei before = c.current_cost();
        renew_access_time(env(), c, req.address, quote.current_expected);
        decay_renewal_prob(req, res_.config.population.decay);
        req.last_action = p;
        record(p, ActionKind::Renew, req.address, c.address(), chain().receipts().back().gas_fee,
               quote.current_expected, before, c.current_cost(), quote.next_expected);
      }
    }
  }

  void record(Period p, ActionKind kind, Address actor, Address dataset, Wei fee, Wei payment, Wei before, Wei after,
              Wei next) {
    ActionRecord r;
    r.index = res_.records.size();
    r.period = p;
    r.kind = kind;
    r.actor = actor;
    r.dataset = dataset;
    r.tx_fee = fee;
    r.payment = payment;
    r.usd_total = res_.config.price.to_usd(fee + payment);
    r.cost_before = before;
    r.cost_after = after;
    r.next_expected = next;
    res_.records.push_back(r);
    ++actions_;
    ++period_actions_;
  }

  SimResult res_;
  Rng rng_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::vector<std::size_t> providers_;   // population indices, account order
  std::vector<std::size_t> requesters_;  // population indices, account order
  std::vector<std::size_t> holders_;     // requesters in order of first request
  std::map<Address, std::size_t> by_address_;
  std::size_t next_provider_ = 0;
  std::size_t next_requester_ = 0;
  std::int64_t actions_ = 0;
  std::int64_t period_actions_ = 0;
};

}  // namespace detail

/// Runs one simulation. Every random draw comes from a single mt19937_64 seeded with
/// `cfg.seed`, in this order: population normals, provider uniforms, then per period
/// the publish roll, one update roll per dataset, the request roll (plus a dataset
/// pick on success), and one roll per eligible renewal. Draws never depend on the
/// scenario, so runs that differ only in scenario or fractions see the same agents.
inline SimResult run_simulation(const SimConfig& cfg) { return detail::Simulation(cfg).run(); }

/// First period whose aggregate profit (earnings - provider cost) is >= 0.
inline std::optional<Period> break_even_period(const std::vector<PeriodStats>& series) {
  for (const auto& s : series)
    if (s.profit >= Wei(0)) return s.period;
  return std::nullopt;
}

inline std::optional<Period> break_even_period(const SimResult& r) { return break_even_period(r.series); }

/// First period whose cumulative earnings cover the deployment + publication outlay
/// of the datasets published so far.
inline std::optional<Period> investment_recovery_period(const SimResult& r) {
  Wei invested;
  std::size_t published = 0;
  for (const auto& s : r.series) {
    for (; published < r.records.size(); ++published) {
      const auto& rec = r.records[published];
      if (rec.period > s.period) break;
      if (rec.kind == ActionKind::Publish) invested += rec.tx_fee;
    }
    if (invested > Wei(0) && s.provider_earnings >= invested) return s.period;
  }
  return std::nullopt;
}

struct SweepOutcome {
  std::optional<SimResult> result;
  std::string error;
};

/// Independent runs, results in input order. `jobs` > 1 spreads runs over threads;
/// each run owns its state, so the output does not depend on scheduling.
inline std::vector<SweepOutcome> sweep(const std::vector<SimConfig>& cfgs, unsigned jobs = 1) {
  std::vector<SweepOutcome> out(cfgs.size());
  auto work = [&](std::size_t i) {
    try {
      out[i].result = run_simulation(cfgs[i]);
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  };
  if (jobs <= 1 || cfgs.size() <= 1) {
    for (std::size_t i = 0; i < cfgs.size(); ++i) work(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < std::min<std::size_t>(jobs, cfgs.size()); ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cfgs.size(); i = next++) work(i);
    });
  pool.clear();
  return out;
}

}  // namespace incentive_ledger
