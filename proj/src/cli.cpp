#include "imcopt/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "imcopt/error.hpp"
#include "imcopt/json_io.hpp"
#include "imcopt/mpsearch.hpp"
#include "imcopt/replicate.hpp"
#include "imcopt/report.hpp"

namespace imcopt {

namespace {

struct CommonOpts {
  std::string network;
  std::string hw_path;
  std::string policy = "uniform:8";
  bool csv = false;
  std::string out_path;
};

HwConfig resolve_hw(const CommonOpts& o) {
  return o.hw_path.empty() ? HwConfig{} : load_hwconfig(o.hw_path);
}

void write_or_print(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw Error(ErrorKind::usage, "cannot write '" + out_path + "'");
  out << text;
}

void emit_report(const EstimateReport& rep, const CommonOpts& o) {
  std::ostringstream ss;
  if (o.csv || !o.out_path.empty()) emit_csv(rep, ss);
  else emit_human(rep, ss);
  write_or_print(ss.str(), o.out_path);
}

Objective parse_objective(const std::string& s) {
  if (s == "latency") return Objective::latency;
  if (s == "throughput") return Objective::throughput;
  throw Error(ErrorKind::usage, "bad objective '" + s + "'");
}

int cmd_estimate(const CommonOpts& o) {
  const NetworkGraph net = load_network(o.network);
  const HwConfig cfg = resolve_hw(o);
  const QuantPolicy policy = load_policy(o.policy, net);
  emit_report(build_report(net, policy, nullptr, cfg), o);
  return 0;
}

int cmd_replicate(const CommonOpts& o, const std::string& objective_s, double budget_ratio,
                  bool use_milp) {
  const NetworkGraph net = load_network(o.network);
  const HwConfig cfg = resolve_hw(o);
  const QuantPolicy policy = load_policy(o.policy, net);
  const Objective objective = parse_objective(objective_s);

  const std::int64_t budget = baseline_tile_budget(net, cfg, budget_ratio);
  const ReplicationInstance inst = build_instance(net, policy, cfg, budget);
  const ReplicationPlan plan =
      use_milp ? optimize_milp(inst, objective) : optimize(inst, objective);
  const double unreplicated =
      plan_objective(inst, std::vector<long>(net.layers.size(), 1), objective);

  const EstimateReport rep = build_report(net, policy, &plan.r, cfg);
  emit_report(rep, o);
  std::cout << "objective:        " << objective_s << "\n";
  std::cout << "tile budget:      " << budget << " (ratio " << budget_ratio << ")\n";
  std::cout << "plan tiles:       " << plan.tiles_used << "\n";
  std::cout << "unreplicated:     " << format_double(unreplicated) << " s\n";
  std::cout << "achieved:         " << format_double(plan.objective_value) << " s\n";
  std::cout << "improvement:      " << format_double(unreplicated / plan.objective_value)
            << "x\n";
  return 0;
}

int cmd_search(const CommonOpts& o, SearchConfig scfg, const std::string& oracle_spec,
               const std::string& trace_path) {
  const NetworkGraph net = load_network(o.network);
  const HwConfig cfg = resolve_hw(o);
  const AccuracyOracle oracle = make_oracle(oracle_spec, net);

  const SearchTrace trace = run_search(net, cfg, scfg, oracle);
  {
    std::ofstream tf(trace_path);
    if (!tf) throw Error(ErrorKind::usage, "cannot write trace file '" + trace_path + "'");
    tf << trace_to_csv(trace);
  }

  const EpisodeRecord& best = trace.best();
  std::cout << "baseline metric:  " << format_double(trace.baseline_metric_s) << " s\n";
  std::cout << "baseline acc:     " << format_double(trace.baseline_accuracy) << "\n";
  std::cout << "episodes:         " << scfg.episodes << "\n";
  std::cout << "best episode:     " << best.episode << "\n";
  std::cout << "best reward:      " << format_double(best.reward) << "\n";
  std::cout << "best accuracy:    " << format_double(best.accuracy) << "\n";
  std::cout << "best metric:      " << format_double(best.metric_s) << " s\n";
  std::cout << "improvement:      "
            << format_double(trace.baseline_metric_s / best.metric_s) << "x\n";
  std::cout << "trace:            " << trace_path << "\n";

  const EstimateReport rep = build_report(net, best.constrained, &best.replication, cfg);
  emit_report(rep, o);
  if (!o.out_path.empty()) {
    // --out already captured the report; also drop the policy alongside it.
    write_or_print(policy_to_json(net, best.constrained) + "\n", o.out_path + ".policy.json");
  }
  return 0;
}

struct AblateCell {
  double ratio = 0.0;
  std::string mode;
  bool feasible = true;
  double metric_s = 0.0;
  double improvement = 0.0;
};

int cmd_ablate(const CommonOpts& o, SearchConfig scfg, const std::string& oracle_spec,
               const std::vector<double>& ratios, const std::vector<std::string>& modes) {
  if (ratios.empty()) throw Error(ErrorKind::usage, "ablate: supply at least one --ratios value");
  for (double r : ratios) {
    if (!(r > 0)) throw Error(ErrorKind::usage, "ablate: ratios must be positive");
  }
  const std::vector<std::string> known = {"quant_only", "repl_only", "joint"};
  for (const auto& m : modes) {
    if (std::find(known.begin(), known.end(), m) == known.end()) {
      throw Error(ErrorKind::usage, "ablate: unknown mode '" + m + "'");
    }
  }
  const NetworkGraph net = load_network(o.network);
  const HwConfig cfg = resolve_hw(o);
  const AccuracyOracle oracle = make_oracle(oracle_spec, net);
  const QuantPolicy u8 = QuantPolicy::uniform(net.layers.size(), 8);

  // Baseline for every improvement figure: uniform 8-bit, unreplicated.
  const ReplicationInstance base_inst =
      build_instance(net, u8, cfg, baseline_tile_budget(net, cfg, 1.0));
  const double baseline_metric =
      plan_objective(base_inst, std::vector<long>(net.layers.size(), 1), scfg.objective);

  std::vector<AblateCell> cells;
  for (double ratio : ratios) {
    for (const auto& mode : modes) {
      AblateCell cell;
      cell.ratio = ratio;
      cell.mode = mode;
      try {
        const std::int64_t budget = baseline_tile_budget(net, cfg, ratio);
        if (mode == "repl_only") {
          const ReplicationInstance inst = build_instance(net, u8, cfg, budget);
          cell.metric_s = optimize(inst, scfg.objective).objective_value;
        } else {
          SearchConfig run_cfg = scfg;
          run_cfg.budget_tile_ratio = ratio;
          run_cfg.enable_replication = (mode == "joint");
          // Warm start: the uniform 8-bit policy is always in the search
          // space; score it directly so "joint" dominates "repl_only".
          std::optional<double> warm;
          std::int64_t u8_tiles = 0;
          for (std::size_t i = 0; i < net.layers.size(); ++i) {
            u8_tiles += tile_count(lower_layer(net.layers[i]), 8, cfg);
          }
          if (u8_tiles <= budget) {
            const ReplicationInstance inst = build_instance(net, u8, cfg, budget);
            warm = run_cfg.enable_replication
                       ? optimize(inst, scfg.objective).objective_value
                       : plan_objective(inst, std::vector<long>(net.layers.size(), 1),
                                        scfg.objective);
          }
          const SearchTrace trace = run_search(net, cfg, run_cfg, oracle);
          double best = warm.value_or(std::numeric_limits<double>::infinity());
          for (const auto& ep : trace.episodes) {
            if (!ep.failed) best = std::min(best, ep.metric_s);
          }
          if (!std::isfinite(best)) throw Error(ErrorKind::infeasible, "no usable episode");
          cell.metric_s = best;
        }
        cell.improvement = baseline_metric / cell.metric_s;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::infeasible) throw;
        cell.feasible = false;  // not enough tiles for even a single copy
      }
      cells.push_back(cell);
    }
  }

  std::ostringstream ss;
  ss << "ratio,mode,metric_s,improvement\n";
  for (const auto& c : cells) {
    ss << c.ratio << ',' << c.mode << ',';
    if (c.feasible) ss << format_double(c.metric_s) << ',' << format_double(c.improvement);
    else ss << "infeasible,";
    ss << '\n';
  }
  write_or_print(ss.str(), o.out_path);
  return 0;
}

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--network", o.network, "builtin benchmark name or network JSON path")
      ->required();
  sub->add_option("--hw", o.hw_path, "hardware config JSON (default: built-in parameters)");
  sub->add_option("--policy", o.policy, "'uniform:<bits>' or policy JSON path");
  sub->add_flag("--csv", o.csv, "machine-readable output");
  sub->add_option("--out", o.out_path, "write the report to a file (CSV)");
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"design-space optimizer for spatial in-memory-computing DNN accelerators"};
  app.require_subcommand(1);

  CommonOpts est_o, rep_o, sea_o, abl_o;

  CLI::App* est = app.add_subcommand("estimate", "per-layer tile and latency breakdown");
  add_common(est, est_o);

  CLI::App* rep = app.add_subcommand("replicate", "optimize layer replication factors");
  add_common(rep, rep_o);
  std::string rep_objective = "latency";
  double rep_ratio = 1.0;
  bool rep_milp = false;
  rep->add_option("--objective", rep_objective, "latency | throughput");
  rep->add_option("--budget-ratio", rep_ratio, "tile budget as a ratio of the 8-bit baseline");
  rep->add_flag("--milp", rep_milp, "solve with the MILP path instead of the combinatorial one");

  CLI::App* sea = app.add_subcommand("search", "mixed-precision policy search");
  add_common(sea, sea_o);
  std::string sea_objective = "latency";
  std::string sea_oracle = "proxy";
  std::string sea_cfg_path, sea_trace = "trace.csv";
  int sea_episodes = -1;
  std::int64_t sea_seed = -1;
  double sea_ratio = -1.0;
  sea->add_option("--objective", sea_objective, "latency | throughput");
  sea->add_option("--oracle", sea_oracle, "'proxy' or 'external:<command>'");
  sea->add_option("--search-config", sea_cfg_path, "search config JSON");
  sea->add_option("--episodes", sea_episodes, "episode count override");
  sea->add_option("--seed", sea_seed, "RNG seed override");
  sea->add_option("--budget-ratio", sea_ratio, "tile budget ratio override");
  sea->add_option("--trace", sea_trace, "trace CSV path");

  CLI::App* abl = app.add_subcommand("ablate", "improvement vs tile budget per mode");
  add_common(abl, abl_o);
  std::string abl_objective = "latency";
  std::string abl_oracle = "proxy";
  std::string abl_cfg_path;
  std::vector<double> abl_ratios;
  std::vector<std::string> abl_modes = {"quant_only", "repl_only", "joint"};
  int abl_episodes = -1;
  std::int64_t abl_seed = -1;
  abl->add_option("--objective", abl_objective, "latency | throughput");
  abl->add_option("--oracle", abl_oracle, "'proxy' or 'external:<command>'");
  abl->add_option("--search-config", abl_cfg_path, "search config JSON");
  abl->add_option("--ratios", abl_ratios, "tile budget ratios")->delimiter(',');
  abl->add_option("--modes", abl_modes, "subset of quant_only,repl_only,joint")->delimiter(',');
  abl->add_option("--episodes", abl_episodes, "episode count per search cell");
  abl->add_option("--seed", abl_seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (est->parsed()) return cmd_estimate(est_o);
    if (rep->parsed()) return cmd_replicate(rep_o, rep_objective, rep_ratio, rep_milp);
    if (sea->parsed()) {
      SearchConfig scfg =
          sea_cfg_path.empty() ? SearchConfig{} : load_search_config(sea_cfg_path);
      scfg.objective = parse_objective(sea_objective);
      if (sea_episodes > 0) scfg.episodes = sea_episodes;
      if (sea_seed >= 0) scfg.seed = static_cast<std::uint64_t>(sea_seed);
      if (sea_ratio > 0) scfg.budget_tile_ratio = sea_ratio;
      scfg.validate();
      return cmd_search(sea_o, scfg, sea_oracle, sea_trace);
    }
    if (abl->parsed()) {
      SearchConfig scfg =
          abl_cfg_path.empty() ? SearchConfig{} : load_search_config(abl_cfg_path);
      scfg.objective = parse_objective(abl_objective);
      scfg.episodes = abl_episodes > 0 ? abl_episodes : 30;
      if (abl_seed >= 0) scfg.seed = static_cast<std::uint64_t>(abl_seed);
      scfg.validate();
      return cmd_ablate(abl_o, scfg, abl_oracle, abl_ratios, abl_modes);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace imcopt
