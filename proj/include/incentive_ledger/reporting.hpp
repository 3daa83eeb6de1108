#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "engine.hpp"

namespace incentive_ledger {

// ---------------------------------------------------------------------------
// Per-run CSVs
// ---------------------------------------------------------------------------

inline void write_actions_csv(std::ostream& os, const SimResult& r) {
  const auto& px = r.config.price;
  os << "index,period,kind,actor,dataset,txGasFeeWei,paymentWei,usdTotal,costBeforeWei,costAfterWei,nextExpectedWei\n";
  for (const auto& a : r.records)
    os << a.index << ',' << a.period << ',' << to_string(a.kind) << ',' << a.actor.str() << ',' << a.dataset.str()
       << ',' << a.tx_fee.str() << ',' << a.payment.str() << ',' << px.format_usd(a.tx_fee + a.payment) << ','
       << a.cost_before.str() << ',' << a.cost_after.str() << ',' << a.next_expected.str() << '\n';
}

inline void write_periods_csv(std::ostream& os, const std::vector<PeriodStats>& series) {
  os << "period,currentCostWei,providerCostWei,providerEarningsWei,profitWei,activeRequesters,actionsThisPeriod\n";
  for (const auto& s : series)
    os << s.period << ',' << s.current_cost.str() << ',' << s.provider_cost.str() << ','
       << s.provider_earnings.str() << ',' << s.profit.str() << ',' << s.active_requesters << ','
       << s.actions_this_period << '\n';
}

/// Profit over time: period,scenario,profitWei,profitUsd
inline void write_profit_series(std::ostream& os, const std::vector<PeriodStats>& series, Scenario scenario,
                                const PriceModel& price) {
  os << "period,scenario,profitWei,profitUsd\n";
  for (const auto& s : series)
    os << s.period << ',' << scenario_number(scenario) << ',' << s.profit.str() << ',' << price.format_usd(s.profit)
       << '\n';
}

inline void write_profit_series(std::ostream& os, const SimResult& r) {
  write_profit_series(os, r.series, r.config.scenario, r.config.price);
}

/// Running cost with the individual transactions laid over it. `cost` rows carry the
/// end-of-period running cost; `tx` rows carry each action with the running cost of
/// its dataset just before and after, so update spikes show as cost jumps.
inline void write_cost_overlay(std::ostream& os, const SimResult& r) {
  const auto& px = r.config.price;
  os << "period,row,kind,actor,currentCostWei,currentCostUsd,usdTotal,costBeforeWei,costAfterWei\n";
  std::size_t ri = 0;
  for (const auto& s : r.series) {
    for (; ri < r.records.size() && r.records[ri].period == s.period; ++ri) {
      const auto& a = r.records[ri];
      os << a.period << ",tx," << to_string(a.kind) << ',' << a.actor.str() << ",,," << px.format_usd(a.tx_fee + a.payment)
         << ',' << a.cost_before.str() << ',' << a.cost_after.str() << '\n';
    }
    os << s.period << ",cost,,," << s.current_cost.str() << ',' << px.format_usd(s.current_cost) << ",,,\n";
  }
}

/// Mean base gas cost vs mean additional payment per requester action kind.
inline void write_requester_breakdown(std::ostream& os, const SimResult& r) {
  const auto& px = r.config.price;
  os << "scenario,kind,count,baseWeiTotal,additionalWeiTotal,meanBaseUsd,meanAdditionalUsd\n";
  for (ActionKind k : {ActionKind::Request, ActionKind::Renew}) {
    std::size_t n = 0;
    Wei base, extra;
    for (const auto& a : r.records)
      if (a.kind == k) {
        ++n;
        base += a.tx_fee;
        extra += a.payment;
      }
    char mb[32] = "0.00", me[32] = "0.00";
    if (n > 0) {
      std::snprintf(mb, sizeof mb, "%.2f", px.to_usd(base) / static_cast<double>(n));
      std::snprintf(me, sizeof me, "%.2f", px.to_usd(extra) / static_cast<double>(n));
    }
    os << scenario_number(r.config.scenario) << ',' << to_string(k) << ',' << n << ',' << base.str() << ','
       << extra.str() << ',' << mb << ',' << me << '\n';
  }
}

struct SpendTotal {
  Address address;
  Role role = Role::Requester;
  Wei total;
};

/// Lifetime spend per actor (gas plus payments), from the action records.
inline std::vector<SpendTotal> spend_by_actor(const SimResult& r) {
  std::map<Address, SpendTotal> m;
  for (const auto& a : r.records) {
    auto& t = m[a.actor];
    t.address = a.actor;
    t.role = (a.kind == ActionKind::Publish || a.kind == ActionKind::Update) ? Role::Provider : Role::Requester;
    t.total += a.tx_fee + a.payment;
  }
  std::vector<SpendTotal> out;
  for (auto& [_, t] : m) out.push_back(t);
  return out;
}

/// Providers' totals followed by the k requesters with the highest spend.
inline std::vector<SpendTotal> top_requesters_vs_provider(const SimResult& r, std::size_t k = 3) {
  auto all = spend_by_actor(r);
  std::vector<SpendTotal> providers, requesters;
  for (auto& t : all) (t.role == Role::Provider ? providers : requesters).push_back(t);
  std::stable_sort(requesters.begin(), requesters.end(),
                   [](const SpendTotal& a, const SpendTotal& b) { return a.total > b.total; });
  if (requesters.size() > k) requesters.resize(k);
  providers.insert(providers.end(), requesters.begin(), requesters.end());
  return providers;
}

inline void write_top_requesters(std::ostream& os, const SimResult& r, std::size_t k = 3) {
  const auto& px = r.config.price;
  os << "scenario,role,rank,address,totalCostWei,totalCostUsd\n";
  std::size_t prov_rank = 0, req_rank = 0;
  for (const auto& t : top_requesters_vs_provider(r, k))
    os << scenario_number(r.config.scenario) << ',' << to_string(t.role) << ','
       << (t.role == Role::Provider ? ++prov_rank : ++req_rank) << ',' << t.address.str() << ',' << t.total.str()
       << ',' << px.format_usd(t.total) << '\n';
}

struct BoxStats {
  std::size_t count = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

/// Linear-interpolated quantiles (R type 7) of an unsorted sample.
inline BoxStats box_stats(std::vector<double> xs) {
  BoxStats b;
  b.count = xs.size();
  if (xs.empty()) return b;
  std::sort(xs.begin(), xs.end());
  auto q = [&](double p) {
    const double h = p * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
  };
  b.min = xs.front();
  b.q1 = q(0.25);
  b.median = q(0.5);
  b.q3 = q(0.75);
  b.max = xs.back();
  return b;
}

/// Per (role, action kind) USD distribution of individual action costs.
inline void write_cost_distribution(std::ostream& os, const SimResult& r) {
  os << "scenario,role,kind,count,minUsd,q1Usd,medianUsd,q3Usd,maxUsd\n";
  for (ActionKind k : kActionKinds) {
    std::vector<double> xs;
    for (const auto& a : r.records)
      if (a.kind == k) xs.push_back(r.config.price.to_usd(a.tx_fee + a.payment));
    const Role role = (k == ActionKind::Publish || k == ActionKind::Update) ? Role::Provider : Role::Requester;
    const BoxStats b = box_stats(std::move(xs));
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.2f,%.2f,%.2f,%.2f,%.2f", b.min, b.q1, b.median, b.q3, b.max);
    os << scenario_number(r.config.scenario) << ',' << to_string(role) << ',' << to_string(k) << ',' << b.count << ','
       << buf << '\n';
  }
}

// ---------------------------------------------------------------------------
// Summary and reconciliation
// ---------------------------------------------------------------------------

struct RunSummary {
  Scenario scenario = Scenario::CostCompensation;
  std::uint64_t seed = 0;
  std::int64_t total_actions = 0;
  Period periods = 0;
  std::array<std::int64_t, 4> counts{};       // indexed by ActionKind
  std::array<double, 4> frequencies{};        // per period
  std::size_t requesters = 0;
  Wei provider_cost;
  Wei provider_earnings;
  Wei profit;
  Wei requester_spend;  // gas + payments
  double provider_cost_usd = 0;
  double provider_earnings_usd = 0;
  std::optional<Period> break_even;
  std::optional<Period> investment_recovery;
  std::vector<SpendTotal> top_requesters;
};

/// Replays the receipt log from the initial balances with plain arithmetic and checks
/// it against the final ledger, then checks the action records against contract state.
/// Throws ReconciliationFailure on the first disagreement.
inline void reconcile(const SimResult& r) {
  auto fail = [](const std::string& what) { throw ContractError(Errc::ReconciliationFailure, what); };

  const auto& chain = r.chain;
  std::vector<Wei> bal(chain.account_count() + 1);
  for (std::size_t i = 0; i < r.initial_balances.size(); ++i) bal[i + 1] = r.initial_balances[i];
  Wei start;
  for (const Wei& w : bal) start += w;
  if (start != chain.initial_total()) fail("initial balances disagree with prefunded total");

  for (const auto& t : chain.receipts()) {
    if (t.gas_fee != chain.price().fee(t.gas_used)) fail("receipt " + std::to_string(t.index) + ": fee != gas * price");
    bal.at(t.caller.id) -= t.gas_fee + t.value;
    bal.at(chain.miner_sink().id) += t.gas_fee;
    if (!t.recipient.is_null()) bal.at(t.recipient.id) += t.value;
  }
  for (std::size_t id = 1; id < bal.size(); ++id) {
    if (bal[id] < Wei(0)) fail("replayed balance negative for account " + std::to_string(id));
    if (bal[id] != chain.balance(Address{id})) fail("replayed balance mismatch for account " + std::to_string(id));
  }
  if (chain.total_value() != chain.initial_total()) fail("value not conserved");

  Wei payments, provider_fees;
  std::array<std::int64_t, 4> counts{};
  for (const auto& a : r.records) {
    payments += a.payment;
    if (a.kind == ActionKind::Publish || a.kind == ActionKind::Update) provider_fees += a.tx_fee;
    ++counts[static_cast<std::size_t>(a.kind)];
  }
  Wei earnings, cost, held;
  for (const auto& c : r.contracts) {
    earnings += c.provider_earnings();
    cost += c.provider_cost();
    if (!c.destroyed()) held += c.contract_balance(chain);
  }
  if (payments != earnings) fail("record payments != provider earnings");
  if (provider_fees != cost) fail("record provider fees != provider cost");
  if (held != earnings) fail("contract balances != provider earnings");

  std::map<Fn, std::int64_t> by_fn;
  for (const auto& t : chain.receipts())
    if (t.period > 0) ++by_fn[t.function];
  if (by_fn[Fn::Deployment] != counts[0] || by_fn[Fn::PublishData] != counts[0] ||
      by_fn[Fn::UpdateData] != counts[1] || by_fn[Fn::AddDataRequester] != counts[2] ||
      by_fn[Fn::RenewToken] != counts[3])
    fail("receipt counts disagree with action records");

  std::int64_t per_period = 0;
  for (const auto& s : r.series) per_period += s.actions_this_period;
  if (per_period != static_cast<std::int64_t>(r.records.size())) fail("period action counts disagree with records");
}

inline RunSummary summarize(const SimResult& r, std::size_t top_k = 3) {
  reconcile(r);
  RunSummary s;
  s.scenario = r.config.scenario;
  s.seed = r.config.seed;
  s.total_actions = static_cast<std::int64_t>(r.records.size());
  s.periods = r.series.empty() ? 0 : r.series.back().period;
  std::map<Address, int> reqs;
  for (const auto& a : r.records) {
    ++s.counts[static_cast<std::size_t>(a.kind)];
    if (a.kind == ActionKind::Request || a.kind == ActionKind::Renew) {
      s.requester_spend += a.tx_fee + a.payment;
      reqs[a.actor] = 1;
    }
  }
  s.requesters = reqs.size();
  for (std::size_t k = 0; k < 4; ++k)
    s.frequencies[k] = s.periods > 0 ? static_cast<double>(s.counts[k]) / static_cast<double>(s.periods) : 0.0;
  for (const auto& c : r.contracts) {
    s.provider_cost += c.provider_cost();
    s.provider_earnings += c.provider_earnings();
  }
  s.profit = s.provider_earnings - s.provider_cost;
  s.provider_cost_usd = r.config.price.to_usd(s.provider_cost);
  s.provider_earnings_usd = r.config.price.to_usd(s.provider_earnings);
  s.break_even = break_even_period(r);
  s.investment_recovery = investment_recovery_period(r);
  for (const auto& t : top_requesters_vs_provider(r, top_k))
    if (t.role == Role::Requester) s.top_requesters.push_back(t);
  return s;
}

inline std::string opt_period(const std::optional<Period>& p) { return p ? std::to_string(*p) : "none"; }

inline void write_summary_text(std::ostream& os, const RunSummary& s, const PriceModel& px) {
  char buf[64];
  os << "scenario: " << scenario_number(s.scenario) << '\n';
  os << "seed: " << s.seed << '\n';
  os << "periods: " << s.periods << '\n';
  os << "actions: " << s.total_actions << '\n';
  for (ActionKind k : kActionKinds) {
    const auto i = static_cast<std::size_t>(k);
    std::snprintf(buf, sizeof buf, "%.3f", s.frequencies[i]);
    os << "  " << to_string(k) << ": " << s.counts[i] << " (" << buf << "/period)\n";
  }
  os << "requesters: " << s.requesters << '\n';
  os << "provider cost: " << s.provider_cost.str() << " wei ($" << px.format_usd(s.provider_cost) << ")\n";
  os << "provider earnings: " << s.provider_earnings.str() << " wei ($" << px.format_usd(s.provider_earnings)
     << ")\n";
  os << "provider profit: " << s.profit.str() << " wei ($" << px.format_usd(s.profit) << ")\n";
  os << "requester spend: " << s.requester_spend.str() << " wei ($" << px.format_usd(s.requester_spend) << ")\n";
  os << "break-even period: " << opt_period(s.break_even) << '\n';
  os << "investment recovery period: " << opt_period(s.investment_recovery) << '\n';
  os << "top requesters:\n";
  for (const auto& t : s.top_requesters)
    os << "  " << t.address.str() << ": " << t.total.str() << " wei ($" << px.format_usd(t.total) << ")\n";
}

inline void write_summary_csv(std::ostream& os, const RunSummary& s, const PriceModel& px) {
  os << "scenario,seed,periods,totalActions,publishes,updates,requests,renewals,publishFreq,updateFreq,requestFreq,"
        "renewFreq,requesters,providerCostWei,providerCostUsd,providerEarningsWei,providerEarningsUsd,profitWei,"
        "breakEvenPeriod,investmentRecoveryPeriod\n";
  char freq[128];
  std::snprintf(freq, sizeof freq, "%.4f,%.4f,%.4f,%.4f", s.frequencies[0], s.frequencies[1], s.frequencies[2],
                s.frequencies[3]);
  os << scenario_number(s.scenario) << ',' << s.seed << ',' << s.periods << ',' << s.total_actions << ','
     << s.counts[0] << ',' << s.counts[1] << ',' << s.counts[2] << ',' << s.counts[3] << ',' << freq << ','
     << s.requesters << ',' << s.provider_cost.str() << ',' << px.format_usd(s.provider_cost) << ','
     << s.provider_earnings.str() << ',' << px.format_usd(s.provider_earnings) << ',' << s.profit.str() << ','
     << (s.break_even ? std::to_string(*s.break_even) : "") << ','
     << (s.investment_recovery ? std::to_string(*s.investment_recovery) : "") << '\n';
}

/// Median of break-even style periods with "never" ordered after every finite value.
/// Even counts average the two middle values; the result is none when the median
/// position lands on a "never".
inline std::optional<double> median_period(std::vector<std::optional<Period>> xs) {
  if (xs.empty()) return std::nullopt;
  std::sort(xs.begin(), xs.end(), [](const auto& a, const auto& b) {
    if (!a) return false;
    if (!b) return true;
    return *a < *b;
  });
  const std::size_t n = xs.size();
  if (n % 2 == 1) {
    if (!xs[n / 2]) return std::nullopt;
    return static_cast<double>(*xs[n / 2]);
  }
  if (!xs[n / 2 - 1] || !xs[n / 2]) return std::nullopt;
  return (static_cast<double>(*xs[n / 2 - 1]) + static_cast<double>(*xs[n / 2])) / 2.0;
}

/// Writes the full report set for one run into `dir` (created if missing):
/// actions.csv, periods.csv, tokens.csv, contracts.csv, transactions.csv,
/// registry.csv, population.csv, profit.csv, cost_overlay.csv,
/// requester_breakdown.csv, top_requesters.csv, cost_distribution.csv,
/// summary.csv and summary.txt. Returns the summary.
inline RunSummary write_run_tree(const std::filesystem::path& dir, const SimResult& r) {
  const RunSummary s = summarize(r);
  std::filesystem::create_directories(dir);
  auto emit = [&](const char* name, auto&& fn) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    fn(os);
  };
  const auto& px = r.config.price;
  emit("actions.csv", [&](std::ostream& os) { write_actions_csv(os, r); });
  emit("periods.csv", [&](std::ostream& os) { write_periods_csv(os, r.series); });
  emit("tokens.csv", [&](std::ostream& os) { write_tokens_csv(os, r.tokens); });
  emit("contracts.csv", [&](std::ostream& os) { write_contracts_csv(os, r.snapshots); });
  emit("transactions.csv", [&](std::ostream& os) { write_transactions_csv(os, r.chain.receipts(), px); });
  emit("registry.csv", [&](std::ostream& os) { write_registry_csv(os, r.registry); });
  emit("population.csv", [&](std::ostream& os) { write_population_csv(os, r.population); });
  emit("profit.csv", [&](std::ostream& os) { write_profit_series(os, r); });
  emit("cost_overlay.csv", [&](std::ostream& os) { write_cost_overlay(os, r); });
  emit("requester_breakdown.csv", [&](std::ostream& os) { write_requester_breakdown(os, r); });
  emit("top_requesters.csv", [&](std::ostream& os) { write_top_requesters(os, r); });
  emit("cost_distribution.csv", [&](std::ostream& os) { write_cost_distribution(os, r); });
  emit("summary.csv", [&](std::ostream& os) { write_summary_csv(os, s, px); });
  emit("summary.txt", [&](std::ostream& os) { write_summary_text(os, s, px); });
  return s;
}

}  // namespace incentive_ledger
