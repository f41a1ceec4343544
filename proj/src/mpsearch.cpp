#include "imcopt/mpsearch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "imcopt/error.hpp"
#include "imcopt/report.hpp"

namespace imcopt {

void SearchConfig::validate() const {
  if (episodes < 1) throw Error(ErrorKind::validation, "search: episodes must be >= 1");
  if (!(budget_end_ratio > 0) || budget_end_ratio > budget_start_ratio ||
      budget_start_ratio > 1.0) {
    throw Error(ErrorKind::validation,
                "search: need 0 < budget_end_ratio <= budget_start_ratio <= 1");
  }
  if (b_min < 1 || b_max < b_min) {
    throw Error(ErrorKind::validation, "search: need 1 <= b_min <= b_max");
  }
  if (!(budget_tile_ratio > 0)) {
    throw Error(ErrorKind::validation, "search: budget_tile_ratio must be positive");
  }
  if (noise_init < 0 || noise_final_frac <= 0) {
    throw Error(ErrorKind::validation, "search: bad noise schedule");
  }
  if (!(lambda >= 0) || !(alpha >= 0)) {
    throw Error(ErrorKind::validation, "search: lambda/alpha must be non-negative");
  }
}

double budget_at(int episode, const SearchConfig& cfg, double baseline_metric) {
  if (episode < 0 || episode >= cfg.episodes) {
    throw Error(ErrorKind::validation, "budget_at: episode out of range");
  }
  // Endpoints are returned exactly; the interior interpolates geometrically.
  if (cfg.episodes == 1 || episode == cfg.episodes - 1) {
    return baseline_metric * cfg.budget_end_ratio;
  }
  if (episode == 0) return baseline_metric * cfg.budget_start_ratio;
  const double t = static_cast<double>(episode) / static_cast<double>(cfg.episodes - 1);
  return baseline_metric * cfg.budget_start_ratio *
         std::pow(cfg.budget_end_ratio / cfg.budget_start_ratio, t);
}

double reward(double acc_quant, double acc_original, double t_quant, double t_original,
              double lambda, double alpha) {
  if (!(t_original > 0)) throw Error(ErrorKind::validation, "reward: t_original must be > 0");
  return lambda * (acc_quant - acc_original) + alpha * (1.0 - t_quant / t_original);
}

int decode_bits(double action, int b_min, int b_max) {
  const double clamped = std::clamp(action, 0.0, 1.0);
  const int bits = b_min + static_cast<int>(std::floor(clamped * (b_max - b_min) + 0.5));
  return std::clamp(bits, b_min, b_max);
}

namespace {

// Post-replication metric of a policy under the iso-tile budget. `fast`
// selects the greedy allocator used for candidate scoring in the constrain
// loop; the exact optimizers produce the recorded plan.
ReplicationPlan solve_plan(const QuantPolicy& policy, const NetworkGraph& net,
                           const HwConfig& cfg, const SearchConfig& scfg,
                           std::int64_t budget_tiles, bool fast) {
  ReplicationInstance inst = build_instance(net, policy, cfg, budget_tiles);
  if (!scfg.enable_replication) {
    ReplicationPlan plan;
    plan.r.assign(net.layers.size(), 1);
    plan.tiles_used = inst.min_tiles();
    if (plan.tiles_used > inst.n_tiles) {
      throw Error(ErrorKind::infeasible, "policy exceeds the tile budget with replication off");
    }
    plan.objective_value = plan_objective(inst, plan.r, scfg.objective);
    return plan;
  }
  if (scfg.objective == Objective::throughput) return optimize_throughput(inst);
  return fast ? greedy_latency(inst) : optimize_latency(inst);
}

// A policy is admissible when one instance of every layer fits the budget.
bool fits_budget(const QuantPolicy& policy, const NetworkGraph& net, const HwConfig& cfg,
                 std::int64_t budget_tiles) {
  std::int64_t total = 0;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    total += tile_count(lower_layer(net.layers[i]), policy.bits[i].w_bits, cfg);
  }
  return total <= budget_tiles;
}

// Drops weight bits (largest tile layer first) until the policy fits.
// Needed when a proposed policy's footprint exceeds the iso-tile budget.
bool shrink_to_fit(QuantPolicy& policy, const NetworkGraph& net, const HwConfig& cfg,
                   const SearchConfig& scfg, std::int64_t budget_tiles) {
  while (!fits_budget(policy, net, cfg, budget_tiles)) {
    std::size_t best = net.layers.size();
    std::int64_t best_tiles = -1;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      if (policy.bits[i].w_bits <= scfg.b_min) continue;
      const std::int64_t t = tile_count(lower_layer(net.layers[i]), policy.bits[i].w_bits, cfg);
      if (t > best_tiles) {
        best_tiles = t;
        best = i;
      }
    }
    if (best == net.layers.size()) return false;  // everything at b_min and still too big
    --policy.bits[best].w_bits;
  }
  return true;
}

}  // namespace

ConstrainResult constrain_policy(const QuantPolicy& policy, double budget_s,
                                 const NetworkGraph& net, const HwConfig& cfg,
                                 const SearchConfig& scfg, std::int64_t budget_tiles) {
  if (!(budget_s > 0)) throw Error(ErrorKind::validation, "constrain_policy: budget must be > 0");
  QuantPolicy cur = policy;
  if (!shrink_to_fit(cur, net, cfg, scfg, budget_tiles)) {
    throw Error(ErrorKind::infeasible,
                "network cannot fit the tile budget even at minimum precision");
  }

  double metric = solve_plan(cur, net, cfg, scfg, budget_tiles, /*fast=*/true).objective_value;
  const long max_steps =
      static_cast<long>(net.layers.size()) * 2 * (scfg.b_max - scfg.b_min) + 1;
  for (long step = 0; metric > budget_s && step < max_steps; ++step) {
    // Decrement the bit with the largest metric improvement. The scan order
    // encodes the tie rule (earlier layer first, weights before activations):
    // strict < keeps the first winner.
    double best_metric = std::numeric_limits<double>::infinity();
    std::size_t best_layer = net.layers.size();
    bool best_is_weight = true;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      for (int field = 0; field < 2; ++field) {
        int& bits = field == 0 ? cur.bits[l].w_bits : cur.bits[l].a_bits;
        if (bits <= scfg.b_min) continue;
        --bits;
        const double m =
            solve_plan(cur, net, cfg, scfg, budget_tiles, /*fast=*/true).objective_value;
        ++bits;
        if (m < best_metric) {
          best_metric = m;
          best_layer = l;
          best_is_weight = (field == 0);
        }
      }
    }
    if (best_layer == net.layers.size()) break;  // everything already at b_min
    if (best_is_weight) --cur.bits[best_layer].w_bits;
    else --cur.bits[best_layer].a_bits;
    metric = best_metric;
  }

  ConstrainResult res;
  res.policy = cur;
  res.plan = solve_plan(cur, net, cfg, scfg, budget_tiles, /*fast=*/false);
  res.metric = res.plan.objective_value;
  res.budget_miss = res.metric > budget_s;
  return res;
}

namespace {

std::vector<std::vector<double>> build_states(const NetworkGraph& net, const HwConfig& cfg) {
  const std::size_t L = net.layers.size();
  std::vector<std::vector<double>> states(L);
  double max_rows = 1, max_cols = 1, max_vecs = 1, max_tiles = 1;
  std::vector<LoweredMatrix> lms(L);
  std::vector<double> tiles8(L);
  for (std::size_t i = 0; i < L; ++i) {
    lms[i] = lower_layer(net.layers[i]);
    tiles8[i] = static_cast<double>(tile_count(lms[i], 8, cfg));
    max_rows = std::max(max_rows, static_cast<double>(lms[i].rows));
    max_cols = std::max(max_cols, static_cast<double>(lms[i].cols));
    max_vecs = std::max(max_vecs, static_cast<double>(lms[i].num_vectors));
    max_tiles = std::max(max_tiles, tiles8[i]);
  }
  for (std::size_t i = 0; i < L; ++i) {
    states[i] = {
        L > 1 ? static_cast<double>(i) / static_cast<double>(L - 1) : 0.0,
        net.layers[i].kind == LayerKind::conv ? 1.0 : 0.0,
        static_cast<double>(lms[i].rows) / max_rows,
        static_cast<double>(lms[i].cols) / max_cols,
        static_cast<double>(lms[i].num_vectors) / max_vecs,
        tiles8[i] / max_tiles,
        0.0,  // previous layer's w action, filled per episode
        0.0,  // previous layer's a action
    };
  }
  return states;
}

}  // namespace

const EpisodeRecord& SearchTrace::best() const {
  if (best_episode < 0 || best_episode >= static_cast<int>(episodes.size())) {
    throw Error(ErrorKind::resource, "search produced no usable episode");
  }
  return episodes[static_cast<std::size_t>(best_episode)];
}

SearchTrace run_search(const NetworkGraph& net, const HwConfig& cfg, const SearchConfig& scfg,
                       const AccuracyOracle& oracle) {
  net.validate();
  cfg.validate();
  scfg.validate();
  const std::size_t L = net.layers.size();

  SearchTrace trace;
  trace.budget_tiles = baseline_tile_budget(net, cfg, scfg.budget_tile_ratio);

  // Baseline: uniform 8-bit under the same budget (zero slack at ratio 1, so
  // the plan degenerates to r = 1).
  const QuantPolicy base_policy = QuantPolicy::uniform(L, 8);
  {
    const ReplicationInstance base_inst =
        build_instance(net, base_policy, cfg, trace.budget_tiles);
    trace.baseline_metric_s =
        plan_objective(base_inst, std::vector<long>(L, 1), scfg.objective);
  }
  trace.baseline_accuracy = oracle.evaluate(net, base_policy);  // oracle failure here is fatal

  AgentConfig acfg = scfg.agent;
  acfg.state_dim = 8;
  acfg.action_dim = 2;
  DdpgAgent agent(acfg, scfg.seed);
  auto states = build_states(net, cfg);

  for (int e = 0; e < scfg.episodes; ++e) {
    EpisodeRecord rec;
    rec.episode = e;
    rec.budget_s = budget_at(e, scfg, trace.baseline_metric_s);
    const double noise =
        scfg.episodes == 1
            ? scfg.noise_init
            : scfg.noise_init * std::pow(scfg.noise_final_frac,
                                         static_cast<double>(e) /
                                             static_cast<double>(scfg.episodes - 1));

    QuantPolicy proposed;
    proposed.bits.resize(L);
    std::vector<Transition> transitions(L);
    double prev_w = 0.0, prev_a = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      states[l][6] = prev_w;
      states[l][7] = prev_a;
      const std::vector<double> action = agent.act(states[l], noise);
      proposed.bits[l].w_bits = decode_bits(action[0], scfg.b_min, scfg.b_max);
      proposed.bits[l].a_bits = decode_bits(action[1], scfg.b_min, scfg.b_max);
      transitions[l].state = states[l];
      transitions[l].action = action;
      prev_w = action[0];
      prev_a = action[1];
    }
    rec.proposed = proposed;

    try {
      ConstrainResult cres =
          constrain_policy(proposed, rec.budget_s, net, cfg, scfg, trace.budget_tiles);
      rec.constrained = cres.policy;
      rec.replication = cres.plan.r;
      rec.metric_s = cres.metric;
      rec.budget_miss = cres.budget_miss;
      rec.accuracy = oracle.evaluate(net, cres.policy);
      rec.reward = reward(rec.accuracy, trace.baseline_accuracy, rec.metric_s,
                          trace.baseline_metric_s, scfg.lambda, scfg.alpha);
      for (auto& t : transitions) t.reward = rec.reward;
      agent.update(transitions);
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::oracle) throw;
      rec.failed = true;  // aborted episode; the search continues
    }
    trace.episodes.push_back(std::move(rec));
  }

  // Best = max reward among clean episodes; budget-missed policies are
  // excluded unless every episode missed.
  auto better = [&](int a, int b) {
    return trace.episodes[a].reward > trace.episodes[b].reward;
  };
  int best_clean = -1, best_any = -1;
  for (int i = 0; i < static_cast<int>(trace.episodes.size()); ++i) {
    const auto& r = trace.episodes[i];
    if (r.failed) continue;
    if (best_any < 0 || better(i, best_any)) best_any = i;
    if (!r.budget_miss && (best_clean < 0 || better(i, best_clean))) best_clean = i;
  }
  trace.best_episode = best_clean >= 0 ? best_clean : best_any;
  return trace;
}

std::string trace_to_csv(const SearchTrace& trace) {
  std::ostringstream os;
  os << "episode,budget_s,reward,accuracy,metric_s,budget_miss,failed,mean_w_bits,mean_a_bits\n";
  for (const auto& r : trace.episodes) {
    os << r.episode << ',' << format_double(r.budget_s) << ',' << format_double(r.reward) << ','
       << format_double(r.accuracy) << ',' << format_double(r.metric_s) << ','
       << (r.budget_miss ? 1 : 0) << ',' << (r.failed ? 1 : 0) << ','
       << format_double(r.constrained.mean_w_bits()) << ','
       << format_double(r.constrained.mean_a_bits()) << '\n';
  }
  return os.str();
}

}  // namespace imcopt
