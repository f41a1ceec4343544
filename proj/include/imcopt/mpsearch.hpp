#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "imcopt/accoracle.hpp"
#include "imcopt/agent.hpp"
#include "imcopt/hwmodel.hpp"
#include "imcopt/netgraph.hpp"
#include "imcopt/policy.hpp"
#include "imcopt/replicate.hpp"

namespace imcopt {

struct SearchConfig {
  int episodes = 300;
  double budget_start_ratio = 0.35;
  double budget_end_ratio = 0.20;
  Objective objective = Objective::latency;
  double lambda = 10.0;  // accuracy weight
  double alpha = 1.0;    // performance weight
  std::uint64_t seed = 1;
  int b_min = 2;
  int b_max = 8;
  double budget_tile_ratio = 1.0;  // scales the iso-utilization tile budget
  double noise_init = 0.5;
  double noise_final_frac = 0.01;  // geometric decay target at the last episode
  bool enable_replication = true;  // ablation hook: false forces r = 1
  AgentConfig agent;

  void validate() const;
};

// Performance budget for an episode: geometric interpolation from
// budget_start_ratio to budget_end_ratio across episodes.
double budget_at(int episode, const SearchConfig& cfg, double baseline_metric);

// Reward: lambda*(acc_q - acc_o) + alpha*(1 - T_q/T_o).
double reward(double acc_quant, double acc_original, double t_quant, double t_original,
              double lambda, double alpha);

// Affine action decode with round-half-up: 0 -> b_min, 1 -> b_max.
int decode_bits(double action, int b_min, int b_max);

struct ConstrainResult {
  QuantPolicy policy;
  ReplicationPlan plan;
  double metric = 0.0;  // post-replication objective, seconds
  bool budget_miss = false;
};

// Decrements bitwidths (largest metric improvement per decrement; ties to the
// earlier layer, weights before activations) until the post-replication
// metric meets the budget or everything sits at b_min. Candidate scoring uses
// the fast greedy allocator; the returned plan/metric are exact.
ConstrainResult constrain_policy(const QuantPolicy& policy, double budget_s,
                                 const NetworkGraph& net, const HwConfig& cfg,
                                 const SearchConfig& scfg, std::int64_t budget_tiles);

struct EpisodeRecord {
  int episode = 0;
  double budget_s = 0.0;
  QuantPolicy proposed;
  QuantPolicy constrained;
  std::vector<long> replication;
  double accuracy = 0.0;
  double metric_s = 0.0;  // post-replication objective
  double reward = 0.0;
  bool budget_miss = false;
  bool failed = false;  // oracle failure; episode aborted
};

struct SearchTrace {
  std::vector<EpisodeRecord> episodes;
  double baseline_metric_s = 0.0;
  double baseline_accuracy = 0.0;
  std::int64_t budget_tiles = 0;
  int best_episode = -1;  // max reward among clean (non-failed, non-miss) episodes

  const EpisodeRecord& best() const;
};

SearchTrace run_search(const NetworkGraph& net, const HwConfig& cfg, const SearchConfig& scfg,
                       const AccuracyOracle& oracle);

// Trace emission for plotting: CSV with one line per episode.
std::string trace_to_csv(const SearchTrace& trace);

}  // namespace imcopt
