#pragma once

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "incentive_ledger/incentive_ledger.hpp"

namespace incentive_ledger::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses "1,5,10,25" or an inclusive range "1:25:4" (start:stop:step).
inline std::vector<int> parse_grid(const std::string& text) {
  std::vector<int> out;
  if (text.find(':') != std::string::npos) {
    std::vector<int> parts;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ':')) parts.push_back(std::stoi(tok));
    if (parts.size() < 2 || parts.size() > 3) throw UsageError("range must be start:stop[:step]");
    const int step = parts.size() == 3 ? parts[2] : 1;
    if (step <= 0) throw UsageError("range step must be positive");
    for (int v = parts[0]; v <= parts[1]; v += step) out.push_back(v);
    return out;
  }
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stoi(tok));
  return out;
}

struct Options {
  int scenario = 2;
  std::uint64_t seed = 1;
  std::size_t seeds = 1;
  std::int64_t actions = 500;
  std::size_t accounts = 1000;
  int access_fraction = 5;
  int renew_fraction = 5;
  std::optional<int> profit_margin;
  double gas_price_gwei = 72.0;
  double eth_usd = 1716.52;
  std::size_t max_providers = 1;
  double provider_prob_min = 0.01;
  double provider_prob_max = 0.05;
  double update_multiplier = 5.0;
  double decay = 0.75;
  double mu = 0.0;
  double sigma = 0.1;
  std::int64_t prefund_eth = 100;
  std::string normalization = "minmax";
  std::string gas_table;
  std::string out = "out";
  unsigned jobs = 1;
  // sweep grid
  std::optional<std::string> fractions;
  std::optional<std::string> margins;
  std::optional<std::string> scenarios;
};

inline SimConfig to_sim_config(const Options& o) {
  SimConfig c;
  auto sc = scenario_from_number(o.scenario);
  if (!sc) throw UsageError("--scenario must be 1, 2 or 3");
  c.scenario = *sc;
  c.seed = o.seed;
  c.action_ticker = o.actions;
  c.access_fraction_pct = o.access_fraction;
  c.renew_fraction_pct = o.renew_fraction;
  c.profit_margin_pct = o.profit_margin;
  const double wei_per_gas = o.gas_price_gwei * 1e9;
  if (!(wei_per_gas >= 1.0) || wei_per_gas != std::floor(wei_per_gas))
    throw UsageError("--gas-price-gwei must be a positive whole number of wei");
  c.price.gas_price = Wei(static_cast<Wei::rep>(wei_per_gas));
  c.price.eth_usd = o.eth_usd;
  c.prefund = Wei::from_ether(o.prefund_eth);
  c.population.n_accounts = o.accounts;
  c.population.max_providers = o.max_providers;
  c.population.provider_prob_min = o.provider_prob_min;
  c.population.provider_prob_max = o.provider_prob_max;
  c.population.update_multiplier = o.update_multiplier;
  c.population.decay = o.decay;
  c.population.mu = o.mu;
  c.population.sigma = o.sigma;
  c.population.seed = o.seed;
  if (o.normalization == "minmax") c.population.normalization = Normalization::MinMax;
  else if (o.normalization == "clamp") c.population.normalization = Normalization::Clamp;
  else if (o.normalization == "affine-sigma") c.population.normalization = Normalization::AffineSigma;
  else throw UsageError("--normalization must be minmax, clamp or affine-sigma");
  if (!o.gas_table.empty()) c.schedule.load_overrides(o.gas_table);
  try {
    c.validate();
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }
  return c;
}

/// Effective configuration in the same key=value form `--config` reads. Output
/// location and parallelism are left out so equal runs produce equal trees.
inline std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string echo_config(const SimConfig& c, const std::string& gas_table) {
  std::ostringstream os;
  os << "scenario=" << scenario_number(c.scenario) << '\n'
     << "seed=" << c.seed << '\n'
     << "actions=" << c.action_ticker << '\n'
     << "accounts=" << c.population.n_accounts << '\n'
     << "access-fraction=" << c.access_fraction_pct << '\n'
     << "renew-fraction=" << c.renew_fraction_pct << '\n'
     << "profit-margin=" << c.margin() << '\n'
     << "gas-price-gwei=" << shortest(static_cast<double>(c.price.gas_price.raw()) / 1e9) << '\n'
     << "eth-usd=" << shortest(c.price.eth_usd) << '\n'
     << "max-providers=" << c.population.max_providers << '\n'
     << "provider-prob-min=" << shortest(c.population.provider_prob_min) << '\n'
     << "provider-prob-max=" << shortest(c.population.provider_prob_max) << '\n'
     << "update-multiplier=" << shortest(c.population.update_multiplier) << '\n'
     << "decay=" << shortest(c.population.decay) << '\n'
     << "mu=" << shortest(c.population.mu) << '\n'
     << "sigma=" << shortest(c.population.sigma) << '\n'
     << "prefund-eth=" << static_cast<long long>(c.prefund.raw() / Wei::kWeiPerEther) << '\n';
  if (!gas_table.empty()) os << "gas-table=" << gas_table << '\n';
  os << "# per-requester-update-gas " << c.schedule.per_requester_update_gas() << '\n';
  return os.str();
}

inline void write_run(const std::filesystem::path& dir, const SimResult& r, const std::string& gas_table) {
  write_run_tree(dir, r);
  std::ofstream(dir / "config.ini", std::ios::binary) << echo_config(r.config, gas_table);
}

inline std::string cell_name(const SimConfig& c) {
  return "s" + std::to_string(scenario_number(c.scenario)) + "-af" + std::to_string(c.access_fraction_pct) + "-rf" +
         std::to_string(c.renew_fraction_pct) + "-m" + std::to_string(c.margin());
}

inline int cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
  const SimConfig base = to_sim_config(o);
  if (o.seeds == 0) throw UsageError("--seeds must be >= 1");
  std::vector<SimConfig> cfgs;
  for (std::size_t i = 0; i < o.seeds; ++i) {
    cfgs.push_back(base);
    cfgs.back().seed = base.seed + i;
    cfgs.back().population.seed = base.seed + i;
  }
  int rc = kExitOk;
  auto results = sweep(cfgs, o.jobs);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto dir = std::filesystem::path(o.out) / ("run-" + std::to_string(cfgs[i].seed));
    if (!results[i].result) {
      err << "seed " << cfgs[i].seed << ": " << results[i].error << '\n';
      rc = kExitRuntime;
      continue;
    }
    write_run(dir, *results[i].result, o.gas_table);
    std::ifstream summary(dir / "summary.txt");
    out << "== " << dir.string() << '\n' << summary.rdbuf();
  }
  return rc;
}

inline int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  const SimConfig base = to_sim_config(o);
  std::vector<int> fractions = o.fractions ? parse_grid(*o.fractions) : std::vector<int>{base.access_fraction_pct};
  std::vector<int> scenarios = o.scenarios ? parse_grid(*o.scenarios) : std::vector<int>{o.scenario};
  std::vector<std::optional<int>> margins;
  if (!o.margins) margins.push_back(o.profit_margin);
  else
    for (int m : parse_grid(*o.margins)) margins.emplace_back(m);
  if (fractions.empty() || scenarios.empty() || margins.empty() || o.seeds == 0) throw UsageError("empty sweep grid");

  std::vector<SimConfig> cfgs;
  for (int s : scenarios)
    for (const auto& m : margins)
      for (int f : fractions)
        for (std::size_t i = 0; i < o.seeds; ++i) {
          Options cell = o;
          cell.scenario = s;
          cell.profit_margin = m;
          cell.access_fraction = cell.renew_fraction = f;
          cell.seed = o.seed + i;
          cfgs.push_back(to_sim_config(cell));
        }

  auto results = sweep(cfgs, o.jobs);
  const std::filesystem::path root(o.out);
  std::filesystem::create_directories(root);
  std::ofstream agg(root / "breakeven.csv", std::ios::binary);
  agg << "cell,scenario,accessFractionPct,renewFractionPct,profitMarginPct,seed,breakEvenPeriod,"
         "investmentRecoveryPeriod,periods,providerCostWei,error\n";
  std::map<std::string, std::vector<std::optional<Period>>> by_cell;
  std::vector<std::string> cell_order;
  int rc = kExitOk;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const SimConfig& c = cfgs[i];
    const std::string cell = cell_name(c);
    if (!by_cell.contains(cell)) cell_order.push_back(cell);
    auto& bucket = by_cell[cell];
    agg << cell << ',' << scenario_number(c.scenario) << ',' << c.access_fraction_pct << ',' << c.renew_fraction_pct
        << ',' << c.margin() << ',' << c.seed << ',';
    if (!results[i].result) {
      agg << ",,,," << '"' << results[i].error << '"' << '\n';
      err << cell << " seed " << c.seed << ": " << results[i].error << '\n';
      rc = kExitRuntime;
      continue;
    }
    const SimResult& r = *results[i].result;
    write_run(root / cell / ("run-" + std::to_string(c.seed)), r, o.gas_table);
    const auto be = break_even_period(r);
    Wei provider_cost;
    for (const auto& ct : r.contracts) provider_cost += ct.provider_cost();
    bucket.push_back(be);
    agg << opt_period(be) << ',' << opt_period(investment_recovery_period(r)) << ','
        << (r.series.empty() ? 0 : r.series.back().period) << ',' << provider_cost.str() << ",\n";
  }
  std::ofstream med(root / "breakeven_medians.csv", std::ios::binary);
  med << "cell,runs,medianBreakEvenPeriod\n";
  for (const auto& cell : cell_order) {
    const auto m = median_period(by_cell[cell]);
    char buf[32] = "none";
    if (m) std::snprintf(buf, sizeof buf, "%.1f", *m);
    med << cell << ',' << by_cell[cell].size() << ',' << buf << '\n';
    out << cell << ": median break-even " << buf << " over " << by_cell[cell].size() << " runs\n";
  }
  return rc;
}

/// Full command line entry point. Returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Agent-based simulator of data-sharing incentive contracts over a gas-metered mock ledger",
               "incentiveledger"};
  app.require_subcommand(1);
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "Flat key=value file using the long flag names; flags override it");

  Options o;
  app.add_option("--scenario", o.scenario, "1 no compensation, 2 cost compensation, 3 profit")
      ->check(CLI::Range(1, 3))
      ->capture_default_str();
  app.add_option("--seed", o.seed, "RNG seed (first seed for multi-run)")->capture_default_str();
  app.add_option("--seeds", o.seeds, "Number of consecutive seeds to run")->capture_default_str();
  app.add_option("--actions", o.actions, "Action budget per run")->capture_default_str();
  app.add_option("--accounts", o.accounts, "Simulated accounts")->capture_default_str();
  app.add_option("--access-fraction", o.access_fraction, "Percent of running cost paid per access")
      ->capture_default_str();
  app.add_option("--renew-fraction", o.renew_fraction, "Percent of running cost paid per renewal")
      ->capture_default_str();
  app.add_option("--profit-margin", o.profit_margin, "Percent; default 100, or 200 in scenario 3");
  app.add_option("--gas-price-gwei", o.gas_price_gwei, "Gas price in Gwei")->capture_default_str();
  app.add_option("--eth-usd", o.eth_usd, "USD per ETH for reports")->capture_default_str();
  app.add_option("--max-providers", o.max_providers, "Number of data providers")->capture_default_str();
  app.add_option("--provider-prob-min", o.provider_prob_min, "Lower bound of provider publish probability")
      ->capture_default_str();
  app.add_option("--provider-prob-max", o.provider_prob_max, "Upper bound of provider publish probability")
      ->capture_default_str();
  app.add_option("--update-multiplier", o.update_multiplier, "Update probability = publish probability * M")
      ->capture_default_str();
  app.add_option("--decay", o.decay, "Renewal probability decay factor")->capture_default_str();
  app.add_option("--mu", o.mu, "Mean of the requester normal draw")->capture_default_str();
  app.add_option("--sigma", o.sigma, "Std deviation of the requester normal draw")->capture_default_str();
  app.add_option("--prefund-eth", o.prefund_eth, "Initial ETH per account")->capture_default_str();
  app.add_option("--normalization", o.normalization, "minmax | clamp | affine-sigma")->capture_default_str();
  app.add_option("--gas-table", o.gas_table, "File of name=gas overrides for the gas schedule");
  app.add_option("--out", o.out, "Output directory")->envname("INCENTIVELEDGER_OUT")->capture_default_str();
  app.add_option("--jobs", o.jobs, "Parallel runs")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--fractions", o.fractions, "Sweep: fraction grid, e.g. 1,5,10,25 or 1:25:4");
  app.add_option("--margins", o.margins, "Sweep: profit margin grid");
  app.add_option("--scenarios", o.scenarios, "Sweep: scenario grid");

  auto* run = app.add_subcommand("run", "Run the simulation for one or more seeds and write reports");
  auto* sw = app.add_subcommand("sweep", "Run a grid of fractions/margins/scenarios x seeds");
  run->fallthrough();
  sw->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(o, out, err);
    return cmd_sweep(o, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == Errc::BadConfig ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace incentive_ledger::cli
