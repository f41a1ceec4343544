#pragma once

#include <cstdint>
#include <vector>

#include "imcopt/hwmodel.hpp"
#include "imcopt/netgraph.hpp"
#include "imcopt/policy.hpp"

namespace imcopt {

enum class Objective { latency, throughput };

// One allocation problem: per-layer base latencies c_l (replication factor 1),
// per-layer tile footprints s_l, and the tile budget.
struct ReplicationInstance {
  std::vector<double> base_latency;   // c_l, seconds, all > 0
  std::vector<std::int64_t> tiles;    // s_l, all >= 1
  std::int64_t n_tiles = 0;

  std::size_t num_layers() const { return base_latency.size(); }
  std::int64_t min_tiles() const;  // sum s_l
  void validate() const;           // throws infeasible when sum s_l > n_tiles
};

struct ReplicationPlan {
  std::vector<long> r;
  double objective_value = 0.0;  // sum c_l/r_l (latency) or max c_l/r_l (throughput)
  std::int64_t tiles_used = 0;
};

// Exact minimizer of sum_l c_l/r_l subject to sum_l r_l*s_l <= n_tiles,
// r_l >= 1 (dynamic program over the tile budget).
ReplicationPlan optimize_latency(const ReplicationInstance& inst);

// Marginal-gain greedy for the same objective: repeatedly grants s_l tiles to
// the layer with the best (c_l/r_l - c_l/(r_l+1))/s_l, ties to the lowest
// index. Fast and locally exchange-optimal, but not guaranteed exact when the
// s_l differ; used in the policy search's inner loop.
ReplicationPlan greedy_latency(const ReplicationInstance& inst);

// Exact min-max solver: binary search for the smallest feasible bottleneck
// latency over the finite candidate set {c_l/v}.
ReplicationPlan optimize_throughput(const ReplicationInstance& inst);

// Candidate-indicator MILP solved by branch and bound over the LP relaxation
// (in-repo primal simplex). Independent route cross-validating the
// combinatorial solvers.
ReplicationPlan optimize_milp(const ReplicationInstance& inst, Objective objective);

// Exhaustive enumeration over all feasible r vectors. Test oracle; refuses
// when the search space exceeds `guard` points.
ReplicationPlan brute_force(const ReplicationInstance& inst, Objective objective,
                            std::int64_t guard = 10'000'000);

ReplicationPlan optimize(const ReplicationInstance& inst, Objective objective);

// Objective value of a fixed plan, computed in the canonical left-to-right
// order used by every solver.
double plan_objective(const ReplicationInstance& inst, const std::vector<long>& r,
                      Objective objective);

// Bridges the cost model to an allocation instance: c_l from layer_cost at
// r=1, s_l from tile_count, budget as given.
ReplicationInstance build_instance(const NetworkGraph& net, const QuantPolicy& policy,
                                   const HwConfig& cfg, std::int64_t budget_tiles);

// Iso-utilization budget: tiles of the uniform 8-bit baseline scaled by
// `ratio`, capped at the chip's tile count.
std::int64_t baseline_tile_budget(const NetworkGraph& net, const HwConfig& cfg,
                                  double ratio = 1.0);

}  // namespace imcopt
