// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances and thresholds are pinned in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "imcopt/accoracle.hpp"
#include "imcopt/hwmodel.hpp"
#include "imcopt/mpsearch.hpp"
#include "imcopt/netgraph.hpp"
#include "imcopt/replicate.hpp"

using namespace imcopt;

namespace {

using Clock = std::chrono::steady_clock;

struct Criterion {
  std::string name;
  std::function<std::optional<std::string>()> run;  // failure detail or nullopt
  double time_limit_s = 0.0;                        // 0 = no limit
};

std::int64_t total_tiles(const std::string& benchmark, int bits) {
  const NetworkGraph net = builtin_benchmark(benchmark);
  const HwConfig cfg;
  std::int64_t tiles = 0;
  for (const auto& l : net.layers) tiles += tile_count(lower_layer(l), bits, cfg);
  return tiles;
}

ReplicationInstance random_instance(std::mt19937& rng) {
  std::uniform_int_distribution<int> ld(1, 5);
  std::uniform_int_distribution<std::int64_t> sd(1, 5);
  std::uniform_real_distribution<double> cd(1.0, 100.0);
  const int L = ld(rng);
  ReplicationInstance inst;
  std::int64_t min_tiles = 0;
  for (int l = 0; l < L; ++l) {
    inst.base_latency.push_back(cd(rng));
    inst.tiles.push_back(sd(rng));
    min_tiles += inst.tiles.back();
  }
  if (min_tiles >= 30) {
    inst.n_tiles = min_tiles;
  } else {
    std::uniform_int_distribution<std::int64_t> nd(min_tiles, 30);
    inst.n_tiles = nd(rng);
  }
  return inst;
}

std::optional<std::string> criterion_mlp_tiles() {
  const std::int64_t tiles = total_tiles("mlp_mnist", 8);
  if (tiles != 3232) return "mlp_mnist at uniform 8-bit gave " + std::to_string(tiles);
  return std::nullopt;
}

std::optional<std::string> criterion_resnet18_tiles() {
  const std::int64_t tiles = total_tiles("resnet18", 8);
  const double rel = std::fabs(static_cast<double>(tiles) - 1602.0) / 1602.0;
  if (rel > 0.01) {
    return "resnet18 total " + std::to_string(tiles) + " deviates " + std::to_string(rel * 100) +
           "% from 1602";
  }
  if (tiles != 1608) return "expected our topology to give 1608, got " + std::to_string(tiles);
  return std::nullopt;
}

std::optional<std::string> criterion_conv1_vectors() {
  const NetworkGraph net = builtin_benchmark("resnet18");
  const LoweredMatrix lm = lower_layer(net.layers.front());
  if (lm.num_vectors != 12544) {
    return "conv1 num_vectors " + std::to_string(lm.num_vectors);
  }
  return std::nullopt;
}

std::optional<std::string> criterion_optimizer_equivalence() {
  std::mt19937 rng(20240);
  for (int t = 0; t < 1000; ++t) {
    const ReplicationInstance inst = random_instance(rng);
    const ReplicationPlan exact = optimize_latency(inst);
    const ReplicationPlan milp = optimize_milp(inst, Objective::latency);
    const ReplicationPlan bf = brute_force(inst, Objective::latency, 50'000'000);
    const double scale = std::max(1.0, std::fabs(bf.objective_value));
    if (std::fabs(exact.objective_value - bf.objective_value) > 1e-9 * scale) {
      return "latency optimizer vs brute force mismatch at instance " + std::to_string(t);
    }
    if (std::fabs(milp.objective_value - bf.objective_value) > 1e-9 * scale) {
      return "milp vs brute force mismatch at instance " + std::to_string(t);
    }
    const ReplicationPlan bs = optimize_throughput(inst);
    const ReplicationPlan bft = brute_force(inst, Objective::throughput, 50'000'000);
    if (bs.objective_value != bft.objective_value) {
      return "throughput binary search vs brute force mismatch at instance " + std::to_string(t);
    }
  }
  return std::nullopt;
}

std::optional<std::string> criterion_replication_linearity() {
  const NetworkGraph net = builtin_benchmark("resnet18");
  const QuantPolicy policy = QuantPolicy::uniform(net.layers.size(), 8);
  const HwConfig cfg;
  std::mt19937 rng(77);
  std::uniform_int_distribution<int> rd(1, 3);
  std::uniform_int_distribution<std::size_t> pick(0, net.layers.size() - 1);
  for (int t = 0; t < 50; ++t) {
    std::vector<long> r(net.layers.size(), 1);
    for (int j = 0; j < 4; ++j) r[pick(rng)] = rd(rng);
    const std::size_t l = pick(rng);
    const NetworkCost before = network_cost(net, policy, &r, cfg);
    const Cycles contrib_before = before.per_layer[l].t_total() / r[l];
    r[l] *= 2;
    const NetworkCost after = network_cost(net, policy, &r, cfg);
    const Cycles contrib_after = after.per_layer[l].t_total() / r[l];
    if (contrib_after * 2 != contrib_before) return "cycle-exact halving failed";
    if (before.latency - after.latency != contrib_before - contrib_after) {
      return "total latency did not shift by the halved contribution";
    }
    // The seconds-domain instance obeys the same identity bit-exactly.
    const double c = to_double(before.per_layer[l].t_total()) / cfg.clock_hz;
    if ((c / static_cast<double>(r[l] / 2)) / 2.0 != c / static_cast<double>(r[l])) {
      return "double-precision halving failed";
    }
  }
  return std::nullopt;
}

std::optional<std::string> criterion_bottleneck() {
  const NetworkGraph net = builtin_benchmark("resnet18");
  const QuantPolicy policy = QuantPolicy::uniform(net.layers.size(), 8);
  const NetworkCost nc = network_cost(net, policy, nullptr, HwConfig{});
  if (nc.bottleneck_layer != 0 || net.layers[0].name != "conv1") {
    return "bottleneck layer is " + net.layers[nc.bottleneck_layer].name;
  }
  return std::nullopt;
}

std::optional<std::string> criterion_replication_improvement() {
  const NetworkGraph net = builtin_benchmark("resnet18");
  const HwConfig cfg;
  const QuantPolicy policy = QuantPolicy::uniform(net.layers.size(), 8);
  const std::int64_t budget = baseline_tile_budget(net, cfg, 1.05);
  const ReplicationInstance inst = build_instance(net, policy, cfg, budget);
  const ReplicationPlan plan = optimize_latency(inst);
  const double unreplicated =
      plan_objective(inst, std::vector<long>(net.layers.size(), 1), Objective::latency);
  const double improvement = unreplicated / plan.objective_value;
  if (improvement < 1.25) {
    return "improvement " + std::to_string(improvement) + "x below 1.25x";
  }
  return std::nullopt;
}

std::optional<std::string> criterion_search_properties() {
  const NetworkGraph net = builtin_benchmark("resnet18");
  const HwConfig cfg;
  SearchConfig scfg;
  scfg.episodes = 100;
  scfg.budget_start_ratio = 0.35;
  scfg.budget_end_ratio = 0.20;
  scfg.seed = 7;
  const AccuracyOracle oracle = AccuracyOracle::proxy({});
  const SearchTrace t1 = run_search(net, cfg, scfg, oracle);

  // (a) budget sequence: monotone non-increasing, endpoints exact.
  if (t1.episodes.front().budget_s != 0.35 * t1.baseline_metric_s) {
    return "first budget is not exactly 0.35x baseline";
  }
  if (t1.episodes.back().budget_s != 0.20 * t1.baseline_metric_s) {
    return "last budget is not exactly 0.20x baseline";
  }
  for (std::size_t i = 1; i < t1.episodes.size(); ++i) {
    if (t1.episodes[i].budget_s > t1.episodes[i - 1].budget_s) {
      return "budget sequence increased at episode " + std::to_string(i);
    }
  }

  // (b) best policy meets the loosest budget after replication.
  const EpisodeRecord& best = t1.best();
  if (!(best.metric_s <= 0.35 * t1.baseline_metric_s)) {
    return "best policy latency " + std::to_string(best.metric_s) + " exceeds 0.35x baseline " +
           std::to_string(0.35 * t1.baseline_metric_s);
  }

  // (c) bit-identical re-run.
  const SearchTrace t2 = run_search(net, cfg, scfg, oracle);
  if (t1.episodes.size() != t2.episodes.size() || t1.best_episode != t2.best_episode) {
    return "re-run shape differs";
  }
  for (std::size_t i = 0; i < t1.episodes.size(); ++i) {
    const auto& a = t1.episodes[i];
    const auto& b = t2.episodes[i];
    if (a.budget_s != b.budget_s || a.metric_s != b.metric_s || a.reward != b.reward ||
        a.accuracy != b.accuracy || !(a.proposed == b.proposed) ||
        !(a.constrained == b.constrained) || a.replication != b.replication ||
        a.budget_miss != b.budget_miss || a.failed != b.failed) {
      return "re-run diverged at episode " + std::to_string(i);
    }
  }
  return std::nullopt;
}

std::optional<std::string> criterion_reward_values() {
  if (reward(0.7, 0.7, 3.0, 3.0, 10.0, 1.0) != 0.0) return "identity case nonzero";
  if (std::fabs(reward(0.7, 0.7, 1.5, 3.0, 1.0, 1.0) - 0.5) > 1e-12) return "half-latency case";
  if (std::fabs(reward(0.69, 0.70, 9.9, 9.9, 10.0, 0.0) + 0.1) > 1e-12) return "accuracy-drop case";
  return std::nullopt;
}

std::optional<std::string> criterion_monotonicity() {
  std::mt19937 rng(555);
  std::uniform_int_distribution<std::int64_t> dim(1, 4096);
  std::uniform_int_distribution<int> bits(1, 15), adc(1, 256);
  const HwConfig cfg;
  for (int t = 0; t < 200; ++t) {
    const LoweredMatrix lm{dim(rng), dim(rng), dim(rng)};
    const int w = bits(rng);
    if (tile_count(lm, w + 1, cfg) < tile_count(lm, w, cfg)) return "tile_count not monotone";
  }
  for (int t = 0; t < 200; ++t) {
    const LoweredMatrix lm{dim(rng), dim(rng), dim(rng)};
    const int a = bits(rng);
    const std::int64_t k = 1 + (t % 7);
    HwConfig c2 = cfg;
    c2.row_serialization = (t % 2 == 0);
    if (vmm_cycles(lm, static_cast<int>(k) * a, c2) != Cycles(k) * vmm_cycles(lm, a, c2)) {
      return "vmm not linear in a_b";
    }
    const LoweredMatrix scaled{lm.rows, lm.cols, lm.num_vectors * k};
    if (vmm_cycles(scaled, a, c2) != Cycles(k) * vmm_cycles(lm, a, c2)) {
      return "vmm not linear in num_vectors";
    }
    int a1 = adc(rng), a2 = adc(rng);
    if (a1 > a2) std::swap(a1, a2);
    HwConfig lo = c2, hi = c2;
    lo.n_adc_per_tile = a1;
    hi.n_adc_per_tile = a2;
    if (vmm_cycles(lm, a, hi) > vmm_cycles(lm, a, lo)) return "vmm increases with more ADCs";
  }
  std::mt19937 rng2(556);
  for (int t = 0; t < 200; ++t) {
    const ReplicationInstance inst = random_instance(rng2);
    ReplicationInstance wider = inst;
    wider.n_tiles += 1 + (t % 9);
    if (optimize_latency(wider).objective_value >
        optimize_latency(inst).objective_value + 1e-15) {
      return "latency objective increased with a larger budget";
    }
    if (optimize_throughput(wider).objective_value >
        optimize_throughput(inst).objective_value + 1e-15) {
      return "throughput objective increased with a larger budget";
    }
  }
  return std::nullopt;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {"1 mlp_mnist uniform 8-bit total tiles == 3232", criterion_mlp_tiles, 1.0},
      {"2 resnet18 uniform 8-bit tiles within 1% of 1602 (ours: 1608)",
       criterion_resnet18_tiles, 1.0},
      {"3 resnet18 conv1 num_vectors == 12544", criterion_conv1_vectors, 0.0},
      {"4 optimizer equivalence on 1000 random instances", criterion_optimizer_equivalence,
       60.0},
      {"5 doubling r_l halves the layer contribution bit-exactly",
       criterion_replication_linearity, 0.0},
      {"6 resnet18 uniform 8-bit bottleneck is the first conv layer", criterion_bottleneck,
       0.0},
      {"7 replication-only at budget ratio 1.05 improves latency >= 1.25x",
       criterion_replication_improvement, 0.0},
      {"8 100-episode proxy search: budget schedule, feasibility, determinism",
       criterion_search_properties, 600.0},
      {"9 reward unit values reproduce to 1e-12", criterion_reward_values, 0.0},
      {"10 monotonicity suites (tiles, vmm, replication)", criterion_monotonicity, 0.0},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    std::optional<std::string> failure;
    try {
      failure = c.run();
    } catch (const std::exception& e) {
      failure = std::string("exception: ") + e.what();
    }
    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    if (!failure && c.time_limit_s > 0 && elapsed > c.time_limit_s) {
      std::ostringstream os;
      os << "exceeded the " << c.time_limit_s << " s limit (" << elapsed << " s)";
      failure = os.str();
    }
    if (failure) {
      ++failures;
      std::printf("FAIL  %-70s [%7.2f s]  %s\n", c.name.c_str(), elapsed, failure->c_str());
    } else {
      std::printf("PASS  %-70s [%7.2f s]\n", c.name.c_str(), elapsed);
    }
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
