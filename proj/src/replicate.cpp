#include "imcopt/replicate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "imcopt/error.hpp"
#include "imcopt/simplex.hpp"

namespace imcopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_plan(const ReplicationInstance& inst, const ReplicationPlan& plan) {
  std::int64_t used = 0;
  for (std::size_t l = 0; l < inst.num_layers(); ++l) {
    if (plan.r[l] < 1) throw Error(ErrorKind::validation, "plan has r < 1");
    used += plan.r[l] * inst.tiles[l];
  }
  if (used != plan.tiles_used || used > inst.n_tiles) {
    throw Error(ErrorKind::validation, "plan violates the tile budget");
  }
}

ReplicationPlan finish_plan(const ReplicationInstance& inst, std::vector<long> r,
                            Objective objective) {
  ReplicationPlan plan;
  plan.r = std::move(r);
  plan.tiles_used = 0;
  for (std::size_t l = 0; l < inst.num_layers(); ++l) plan.tiles_used += plan.r[l] * inst.tiles[l];
  plan.objective_value = plan_objective(inst, plan.r, objective);
  check_plan(inst, plan);
  return plan;
}

// Largest r_l when every other layer keeps a single instance.
std::int64_t r_max_for(const ReplicationInstance& inst, std::size_t l) {
  const std::int64_t others = inst.min_tiles() - inst.tiles[l];
  return std::max<std::int64_t>(1, (inst.n_tiles - others) / inst.tiles[l]);
}

}  // namespace

std::int64_t ReplicationInstance::min_tiles() const {
  return std::accumulate(tiles.begin(), tiles.end(), std::int64_t{0});
}

void ReplicationInstance::validate() const {
  if (base_latency.empty() || base_latency.size() != tiles.size()) {
    throw Error(ErrorKind::validation, "replication instance: empty or mismatched layer lists");
  }
  for (std::size_t l = 0; l < base_latency.size(); ++l) {
    if (!(base_latency[l] > 0)) {
      throw Error(ErrorKind::validation,
                  "replication instance: base latency of layer " + std::to_string(l) +
                      " must be positive");
    }
    if (tiles[l] < 1) {
      throw Error(ErrorKind::validation, "replication instance: tile footprints must be >= 1");
    }
  }
  if (min_tiles() > n_tiles) {
    throw Error(ErrorKind::infeasible,
                "one instance of each layer needs " + std::to_string(min_tiles()) +
                    " tiles; budget is " + std::to_string(n_tiles));
  }
}

double plan_objective(const ReplicationInstance& inst, const std::vector<long>& r,
                      Objective objective) {
  double sum = 0.0;
  double worst = 0.0;
  for (std::size_t l = 0; l < inst.num_layers(); ++l) {
    const double lat = inst.base_latency[l] / static_cast<double>(r[l]);
    sum += lat;
    worst = std::max(worst, lat);
  }
  return objective == Objective::latency ? sum : worst;
}

ReplicationPlan optimize_latency(const ReplicationInstance& inst) {
  inst.validate();
  const std::size_t L = inst.num_layers();
  const std::int64_t N = inst.n_tiles;

  // f[b] = min cost of the layers processed so far using at most b tiles.
  // One v-choice per layer; reconstruct through the choice table.
  std::vector<double> prev(static_cast<std::size_t>(N) + 1, 0.0);
  std::vector<double> cur(static_cast<std::size_t>(N) + 1, kInf);
  std::vector<std::vector<std::int32_t>> choice(
      L, std::vector<std::int32_t>(static_cast<std::size_t>(N) + 1, 0));

  std::int64_t prefix_min = 0;  // tiles needed by one instance of layers [0..l]
  for (std::size_t l = 0; l < L; ++l) {
    const std::int64_t s = inst.tiles[l];
    const double c = inst.base_latency[l];
    const std::int64_t prev_min = prefix_min;
    prefix_min += s;
    std::fill(cur.begin(), cur.end(), kInf);
    for (std::int64_t b = prefix_min; b <= N; ++b) {
      const std::int64_t v_max = (b - prev_min) / s;
      double best = kInf;
      std::int32_t best_v = 0;
      for (std::int64_t v = 1; v <= v_max; ++v) {
        const double f = prev[b - v * s];
        if (f == kInf) continue;
        const double cand = f + c / static_cast<double>(v);
        if (cand < best) {
          best = cand;
          best_v = static_cast<std::int32_t>(v);
        }
      }
      cur[b] = best;
      choice[l][b] = best_v;
    }
    prev.swap(cur);
  }

  std::vector<long> r(L, 1);
  std::int64_t b = N;
  for (std::size_t l = L; l-- > 0;) {
    const std::int32_t v = choice[l][b];
    r[l] = v;
    b -= static_cast<std::int64_t>(v) * inst.tiles[l];
  }
  return finish_plan(inst, std::move(r), Objective::latency);
}

namespace {

// Grants increments by best marginal gain per tile; ties go to the lowest
// layer index.
void greedy_fill(const ReplicationInstance& inst, std::vector<long>& r, std::int64_t& used) {
  const std::size_t L = inst.num_layers();
  for (;;) {
    double best_gain = 0.0;
    std::size_t best_l = L;
    for (std::size_t l = 0; l < L; ++l) {
      if (used + inst.tiles[l] > inst.n_tiles) continue;
      const double c = inst.base_latency[l];
      const double gain =
          (c / static_cast<double>(r[l]) - c / static_cast<double>(r[l] + 1)) /
          static_cast<double>(inst.tiles[l]);
      if (best_l == L || gain > best_gain) {
        best_gain = gain;
        best_l = l;
      }
    }
    if (best_l == L) break;
    ++r[best_l];
    used += inst.tiles[best_l];
  }
}

double latency_sum(const ReplicationInstance& inst, const std::vector<long>& r) {
  double sum = 0.0;
  for (std::size_t l = 0; l < inst.num_layers(); ++l) {
    sum += inst.base_latency[l] / static_cast<double>(r[l]);
  }
  return sum;
}

}  // namespace

ReplicationPlan greedy_latency(const ReplicationInstance& inst) {
  inst.validate();
  const std::size_t L = inst.num_layers();
  std::vector<long> r(L, 1);
  std::int64_t used = inst.min_tiles();
  greedy_fill(inst, r, used);

  // Polish to a single-reallocation fixed point: marginal-gain order alone
  // does not guarantee it when tile footprints differ. Each applied move
  // strictly lowers the objective, so this terminates.
  for (;;) {
    double cur = latency_sum(inst, r);
    double best_delta = 0.0;
    std::size_t best_from = L, best_to = L;
    for (std::size_t from = 0; from < L; ++from) {
      if (r[from] < 2) continue;
      for (std::size_t to = 0; to < L; ++to) {
        if (to == from || used - inst.tiles[from] + inst.tiles[to] > inst.n_tiles) continue;
        const double delta =
            inst.base_latency[from] / static_cast<double>(r[from] - 1) -
            inst.base_latency[from] / static_cast<double>(r[from]) -
            (inst.base_latency[to] / static_cast<double>(r[to]) -
             inst.base_latency[to] / static_cast<double>(r[to] + 1));
        if (delta < best_delta - 1e-15 * std::max(1.0, cur)) {
          best_delta = delta;
          best_from = from;
          best_to = to;
        }
      }
    }
    if (best_from == L) break;
    --r[best_from];
    ++r[best_to];
    used += inst.tiles[best_to] - inst.tiles[best_from];
    greedy_fill(inst, r, used);  // freed slack may admit fresh increments
  }
  return finish_plan(inst, std::move(r), Objective::latency);
}

namespace {

// Smallest r with c/r <= M under the same floating-point division the
// objective uses, so binary search and brute force agree bit for bit.
std::int64_t min_replicas_for(double c, double m, std::int64_t cap) {
  std::int64_t r = static_cast<std::int64_t>(std::ceil(c / m));
  if (r < 1) r = 1;
  if (r > cap) r = cap;
  while (r > 1 && c / static_cast<double>(r - 1) <= m) --r;
  while (c / static_cast<double>(r) > m) {
    if (++r > cap) return cap + 1;  // infeasible at this M
  }
  return r;
}

bool throughput_feasible(const ReplicationInstance& inst, double m, std::vector<long>* r_out) {
  std::int64_t used = 0;
  for (std::size_t l = 0; l < inst.num_layers(); ++l) {
    const std::int64_t cap = inst.n_tiles;  // loose per-layer cap; budget prunes below
    const std::int64_t r = min_replicas_for(inst.base_latency[l], m, cap);
    used += r * inst.tiles[l];
    if (r > cap || used > inst.n_tiles) return false;
    if (r_out) (*r_out)[l] = static_cast<long>(r);
  }
  return true;
}

}  // namespace

ReplicationPlan optimize_throughput(const ReplicationInstance& inst) {
  inst.validate();
  const std::size_t L = inst.num_layers();

  // The optimum M* is one of the finitely many achievable layer latencies
  // c_l/v, so feasible(M) is a step function of M that flips exactly at M*.
  // Bisecting on doubles until the bracket collapses to adjacent values
  // terminates exactly at M* without materializing the candidate set.
  double hi = 0.0;
  for (std::size_t l = 0; l < L; ++l) hi = std::max(hi, inst.base_latency[l]);  // all r = 1
  double lo = 0.0;  // c_l > 0, so 0 is always infeasible
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = lo + (hi - lo) / 2;
    if (mid <= lo || mid >= hi) break;
    if (throughput_feasible(inst, mid, nullptr)) hi = mid;
    else lo = mid;
  }
  std::vector<long> r(L, 1);
  if (!throughput_feasible(inst, hi, &r)) {
    throw Error(ErrorKind::infeasible, "throughput optimization found no feasible point");
  }
  return finish_plan(inst, std::move(r), Objective::throughput);
}

ReplicationPlan brute_force(const ReplicationInstance& inst, Objective objective,
                            std::int64_t guard) {
  inst.validate();
  const std::size_t L = inst.num_layers();
  std::vector<std::int64_t> r_max(L);
  double space = 1.0;
  for (std::size_t l = 0; l < L; ++l) {
    r_max[l] = r_max_for(inst, l);
    space *= static_cast<double>(r_max[l]);
  }
  if (space > static_cast<double>(guard)) {
    throw Error(ErrorKind::resource,
                "brute force refused: search space " + std::to_string(space) +
                    " exceeds guard " + std::to_string(guard));
  }

  std::vector<long> r(L, 1);
  std::vector<long> best_r;
  double best_obj = kInf;
  std::int64_t used = inst.min_tiles();
  // Odometer enumeration; the first optimum found wins ties.
  for (;;) {
    if (used <= inst.n_tiles) {
      const double obj = plan_objective(inst, r, objective);
      if (obj < best_obj) {
        best_obj = obj;
        best_r = r;
      }
    }
    std::size_t l = 0;
    for (; l < L; ++l) {
      if (r[l] < r_max[l]) {
        ++r[l];
        used += inst.tiles[l];
        break;
      }
      used -= (r[l] - 1) * inst.tiles[l];
      r[l] = 1;
    }
    if (l == L) break;
  }
  return finish_plan(inst, std::move(best_r), objective);
}

namespace {

struct MilpNode {
  // allowed[l] = candidate replication values still open for layer l.
  std::vector<std::vector<std::int64_t>> allowed;
};

struct MilpWorkspace {
  const ReplicationInstance& inst;
  Objective objective;
  double incumbent_obj = kInf;
  std::vector<long> incumbent_r;
  long nodes_left = 200000;
  long pivots_per_lp = 200000;
};

// Column layout: one indicator per open (l, v) pair, then (throughput only)
// the bottleneck variable M.
LpSolution solve_node_lp(const MilpWorkspace& ws, const MilpNode& node,
                         std::vector<std::pair<std::size_t, std::int64_t>>& columns) {
  const auto& inst = ws.inst;
  const std::size_t L = inst.num_layers();
  columns.clear();
  for (std::size_t l = 0; l < L; ++l) {
    for (std::int64_t v : node.allowed[l]) columns.emplace_back(l, v);
  }
  const bool minmax = ws.objective == Objective::throughput;
  const int nv = static_cast<int>(columns.size()) + (minmax ? 1 : 0);
  const int m_col = static_cast<int>(columns.size());

  LpProblem lp;
  lp.num_vars = nv;
  lp.objective.assign(nv, 0.0);
  if (minmax) {
    lp.objective[m_col] = 1.0;
  } else {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      lp.objective[j] =
          inst.base_latency[columns[j].first] / static_cast<double>(columns[j].second);
    }
  }

  // One-of-candidates row per layer.
  for (std::size_t l = 0; l < L; ++l) {
    LpProblem::Row row;
    row.coeffs.assign(nv, 0.0);
    row.rel = LpProblem::Rel::eq;
    row.rhs = 1.0;
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (columns[j].first == l) row.coeffs[j] = 1.0;
    }
    lp.rows.push_back(std::move(row));
  }
  // Tile budget.
  {
    LpProblem::Row row;
    row.coeffs.assign(nv, 0.0);
    row.rel = LpProblem::Rel::le;
    row.rhs = static_cast<double>(inst.n_tiles);
    for (std::size_t j = 0; j < columns.size(); ++j) {
      row.coeffs[j] =
          static_cast<double>(columns[j].second) * static_cast<double>(inst.tiles[columns[j].first]);
    }
    lp.rows.push_back(std::move(row));
  }
  // Bottleneck rows: sum_v (c_l/v) x_lv - M <= 0.
  if (minmax) {
    for (std::size_t l = 0; l < L; ++l) {
      LpProblem::Row row;
      row.coeffs.assign(nv, 0.0);
      row.rel = LpProblem::Rel::le;
      row.rhs = 0.0;
      for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j].first == l) {
          row.coeffs[j] = inst.base_latency[l] / static_cast<double>(columns[j].second);
        }
      }
      row.coeffs[m_col] = -1.0;
      lp.rows.push_back(std::move(row));
    }
  }
  return solve_lp(lp, ws.pivots_per_lp);
}

[[noreturn]] void milp_resource_error(const MilpWorkspace& ws, const char* what) {
  throw Error(ErrorKind::resource,
              std::string("milp: ") + what + "; best incumbent objective " +
                  (ws.incumbent_r.empty() ? std::string("none")
                                          : std::to_string(ws.incumbent_obj)));
}

// Depth-first branch and bound with an explicit node stack (forbid-chains can
// run deep on large candidate sets).
void milp_branch_and_bound(MilpWorkspace& ws, MilpNode root) {
  std::vector<MilpNode> stack;
  stack.push_back(std::move(root));
  std::vector<std::pair<std::size_t, std::int64_t>> columns;
  while (!stack.empty()) {
    MilpNode node = std::move(stack.back());
    stack.pop_back();
    bool dead = false;
    for (const auto& a : node.allowed) {
      if (a.empty()) dead = true;  // a layer lost all candidates
    }
    if (dead) continue;
    if (--ws.nodes_left < 0) milp_resource_error(ws, "node limit exceeded");

    const LpSolution lp = solve_node_lp(ws, node, columns);
    if (lp.status == LpStatus::infeasible) continue;
    if (lp.status != LpStatus::optimal) milp_resource_error(ws, "lp hit its pivot limit");
    const double bound_tol = 1e-12 * std::max(1.0, std::fabs(ws.incumbent_obj));
    if (!ws.incumbent_r.empty() && lp.objective >= ws.incumbent_obj - bound_tol) {
      continue;  // cannot improve on the incumbent
    }

    // Pick the most fractional indicator; none means the node is integral.
    std::size_t frac_l = ws.inst.num_layers();
    std::int64_t frac_v = 0;
    double frac_dist = 1.0;
    for (std::size_t j = 0; j < columns.size(); ++j) {
      const double x = lp.x[j];
      const double dist = std::fabs(x - std::round(x));
      if (dist > 1e-7 && std::fabs(dist - 0.5) < frac_dist) {
        frac_dist = std::fabs(dist - 0.5);
        frac_l = columns[j].first;
        frac_v = columns[j].second;
      }
    }
    if (frac_l == ws.inst.num_layers()) {
      std::vector<long> r(ws.inst.num_layers(), 0);
      for (std::size_t j = 0; j < columns.size(); ++j) {
        if (lp.x[j] > 0.5) r[columns[j].first] = static_cast<long>(columns[j].second);
      }
      std::int64_t used = 0;
      bool ok = true;
      for (std::size_t l = 0; l < r.size(); ++l) {
        if (r[l] < 1) ok = false;  // numerically degenerate node
        else used += r[l] * ws.inst.tiles[l];
      }
      if (!ok || used > ws.inst.n_tiles) continue;
      const double obj = plan_objective(ws.inst, r, ws.objective);
      if (ws.incumbent_r.empty() || obj < ws.incumbent_obj) {
        ws.incumbent_obj = obj;
        ws.incumbent_r = std::move(r);
      }
      continue;
    }

    // Branch: forbid frac_v (pushed first), then fix layer frac_l to frac_v
    // (popped first, so the dive favors integral assignments).
    MilpNode forbidden = node;
    auto& a = forbidden.allowed[frac_l];
    a.erase(std::remove(a.begin(), a.end(), frac_v), a.end());
    stack.push_back(std::move(forbidden));

    MilpNode fixed = std::move(node);
    fixed.allowed[frac_l] = {frac_v};
    stack.push_back(std::move(fixed));
  }
}

}  // namespace

ReplicationPlan optimize_milp(const ReplicationInstance& inst, Objective objective) {
  inst.validate();
  MilpWorkspace ws{inst, objective};
  MilpNode root;
  root.allowed.resize(inst.num_layers());
  for (std::size_t l = 0; l < inst.num_layers(); ++l) {
    const std::int64_t r_max = r_max_for(inst, l);
    root.allowed[l].resize(static_cast<std::size_t>(r_max));
    std::iota(root.allowed[l].begin(), root.allowed[l].end(), std::int64_t{1});
  }
  milp_branch_and_bound(ws, std::move(root));
  if (ws.incumbent_r.empty()) {
    throw Error(ErrorKind::infeasible, "milp: no feasible integral point found");
  }
  return finish_plan(inst, std::move(ws.incumbent_r), objective);
}

ReplicationPlan optimize(const ReplicationInstance& inst, Objective objective) {
  return objective == Objective::latency ? optimize_latency(inst) : optimize_throughput(inst);
}

ReplicationInstance build_instance(const NetworkGraph& net, const QuantPolicy& policy,
                                   const HwConfig& cfg, std::int64_t budget_tiles) {
  policy.validate(net);
  ReplicationInstance inst;
  inst.n_tiles = budget_tiles;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerCost lc =
        layer_cost(net.layers[i], policy.bits[i].w_bits, policy.bits[i].a_bits, cfg);
    inst.base_latency.push_back(lc.seconds(cfg));
    inst.tiles.push_back(lc.tiles);
  }
  return inst;
}

std::int64_t baseline_tile_budget(const NetworkGraph& net, const HwConfig& cfg, double ratio) {
  if (!(ratio > 0)) throw Error(ErrorKind::usage, "budget ratio must be positive");
  std::int64_t baseline = 0;
  for (const auto& layer : net.layers) baseline += tile_count(lower_layer(layer), 8, cfg);
  const double scaled = std::floor(static_cast<double>(baseline) * ratio);
  return std::min<std::int64_t>(static_cast<std::int64_t>(scaled), cfg.n_tiles_total);
}

}  // namespace imcopt
