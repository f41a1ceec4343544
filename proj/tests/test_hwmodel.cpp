#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "imcopt/error.hpp"
#include "imcopt/hwmodel.hpp"
#include "imcopt/netgraph.hpp"

using namespace imcopt;

namespace {

LoweredMatrix mat(std::int64_t rows, std::int64_t cols, std::int64_t vecs) {
  return LoweredMatrix{rows, cols, vecs};
}

HwConfig literal_cfg() {
  HwConfig cfg;
  cfg.row_serialization = false;  // literal bit-stream formula
  return cfg;
}

}  // namespace

TEST_CASE("tile_count: resnet18 conv1 at 8 bits needs 8 tiles") {
  CHECK(tile_count(mat(147, 64, 12544), 8, HwConfig{}) == 8);
}

TEST_CASE("tile_count: 3x3x64->64 conv at 8 bits needs 24 tiles") {
  CHECK(tile_count(mat(576, 64, 3136), 8, HwConfig{}) == 24);
}

TEST_CASE("tile_count: exact fit with no slicing is one tile") {
  HwConfig cfg;
  cfg.device_bits = 3;
  CHECK(tile_count(mat(256, 256, 1), 3, cfg) == 1);
}

TEST_CASE("vmm_cycles: conv1 literal evaluation is 3,211,264 cycles") {
  const Cycles c = vmm_cycles(mat(147, 64, 12544), 8, literal_cfg());
  CHECK(c == Cycles(12544) * 32 * 8);
  CHECK(c == Cycles(3211264));
}

TEST_CASE("vmm_cycles: all multiplexing factors collapse to t_tile") {
  HwConfig cfg = literal_cfg();
  cfg.n_adc_per_tile = cfg.xbar_size;
  cfg.t_tile_cycles = 5;
  CHECK(vmm_cycles(mat(256, 256, 1), 1, cfg) == Cycles(5));
}

TEST_CASE("vmm_cycles: doubling a_b doubles the latency exactly") {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> bits(1, 16);
  std::uniform_int_distribution<std::int64_t> dim(1, 4096);
  for (int i = 0; i < 200; ++i) {
    const auto lm = mat(dim(rng), dim(rng), dim(rng));
    const int a = bits(rng);
    HwConfig cfg;
    cfg.row_serialization = (i % 2 == 0);
    CHECK(vmm_cycles(lm, 2 * a, cfg) == Cycles(2) * vmm_cycles(lm, a, cfg));
  }
}

TEST_CASE("vmm_cycles: linear in num_vectors, non-increasing in n_ADC") {
  std::mt19937 rng(4);
  std::uniform_int_distribution<std::int64_t> dim(1, 2048);
  std::uniform_int_distribution<int> adc(1, 256);
  for (int i = 0; i < 200; ++i) {
    const std::int64_t rows = dim(rng), cols = dim(rng), v = dim(rng);
    HwConfig cfg;
    const Cycles one = vmm_cycles(mat(rows, cols, 1), 8, cfg);
    CHECK(vmm_cycles(mat(rows, cols, v), 8, cfg) == Cycles(v) * one);

    int a1 = adc(rng), a2 = adc(rng);
    if (a1 > a2) std::swap(a1, a2);
    HwConfig lo = cfg, hi = cfg;
    lo.n_adc_per_tile = a1;
    hi.n_adc_per_tile = a2;
    CHECK(vmm_cycles(mat(rows, cols, v), 8, hi) <= vmm_cycles(mat(rows, cols, v), 8, lo));
  }
}

TEST_CASE("layer_cost: total is the sum of the four components") {
  LayerDesc l;
  l.name = "c";
  l.kernel_size = 3;
  l.in_channels = 64;
  l.out_channels = 64;
  l.out_width = 56;
  const LayerCost c = layer_cost(l, 8, 8, HwConfig{});
  CHECK(c.t_total() == c.t_tile_in + c.t_tile_out + c.t_vmm + c.t_digital);
  CHECK(c.tiles == 24);
}

TEST_CASE("layer_cost: fc VMM latency is far below conv1's at equal bitwidths") {
  LayerDesc conv1;
  conv1.name = "conv1";
  conv1.kernel_size = 7;
  conv1.in_channels = 3;
  conv1.out_channels = 64;
  conv1.out_width = 112;
  LayerDesc fc;
  fc.name = "fc";
  fc.kind = LayerKind::fc;
  fc.in_channels = 512;
  fc.out_channels = 1000;
  const HwConfig cfg;
  CHECK(layer_cost(fc, 8, 8, cfg).t_vmm * 100 < layer_cost(conv1, 8, 8, cfg).t_vmm);
}

TEST_CASE("layer_cost: unbounded transfer reduces the total to the VMM term") {
  LayerDesc l;
  l.name = "c";
  l.kernel_size = 3;
  l.in_channels = 16;
  l.out_channels = 32;
  l.out_width = 14;
  HwConfig cfg;
  cfg.unbounded_transfer = true;
  const LayerCost c = layer_cost(l, 8, 8, cfg);
  CHECK(c.t_total() == c.t_vmm);
  CHECK(c.t_tile_in == Cycles(0));
  CHECK(c.t_tile_out == Cycles(0));
  CHECK(c.t_digital == Cycles(0));
}

TEST_CASE("network_cost: all-ones plan equals no plan") {
  const NetworkGraph net = builtin_benchmark("mlp_mnist");
  const QuantPolicy p = QuantPolicy::uniform(net.layers.size(), 8);
  const HwConfig cfg;
  const std::vector<long> ones(net.layers.size(), 1);
  const NetworkCost a = network_cost(net, p, nullptr, cfg);
  const NetworkCost b = network_cost(net, p, &ones, cfg);
  CHECK(a.latency == b.latency);
  CHECK(a.tiles_used == b.tiles_used);
}

TEST_CASE("network_cost: r=2 halves that layer's contribution exactly") {
  const NetworkGraph net = builtin_benchmark("mlp_mnist");
  const QuantPolicy p = QuantPolicy::uniform(net.layers.size(), 8);
  const HwConfig cfg;
  std::vector<long> r(net.layers.size(), 1);
  const NetworkCost base = network_cost(net, p, &r, cfg);
  r[2] = 2;
  const NetworkCost repl = network_cost(net, p, &r, cfg);
  const Cycles contribution = base.per_layer[2].t_total();
  CHECK(base.latency - repl.latency == contribution / 2);
}

TEST_CASE("network_cost: latency is the exact sum and throughput the exact max-inverse") {
  const NetworkGraph net = builtin_benchmark("resnet18");
  const QuantPolicy p = QuantPolicy::uniform(net.layers.size(), 8);
  const HwConfig cfg;
  std::vector<long> r(net.layers.size(), 1);
  r[0] = 3;
  r[5] = 2;
  const NetworkCost nc = network_cost(net, p, &r, cfg);
  Cycles sum(0), worst(0);
  for (std::size_t i = 0; i < nc.per_layer.size(); ++i) {
    const Cycles c = nc.per_layer[i].t_total() / r[i];
    sum += c;
    worst = std::max(worst, c);
  }
  CHECK(nc.latency == sum);
  CHECK(nc.bottleneck_latency == worst);
  CHECK(nc.throughput_per_cycle() * nc.bottleneck_latency == Cycles(1));
}

TEST_CASE("network_cost: resnet18 uniform 8-bit is bottlenecked by conv1") {
  const NetworkGraph net = builtin_benchmark("resnet18");
  const QuantPolicy p = QuantPolicy::uniform(net.layers.size(), 8);
  SUBCASE("physical row grouping") {
    const NetworkCost nc = network_cost(net, p, nullptr, HwConfig{});
    CHECK(nc.bottleneck_layer == 0);
  }
  SUBCASE("literal mode") {
    HwConfig cfg;
    cfg.row_serialization = false;
    const NetworkCost nc = network_cost(net, p, nullptr, cfg);
    CHECK(nc.bottleneck_layer == 0);
  }
}

TEST_CASE("network_cost: mlp_mnist uniform 8-bit uses 3232 tiles") {
  const NetworkGraph net = builtin_benchmark("mlp_mnist");
  const QuantPolicy p = QuantPolicy::uniform(net.layers.size(), 8);
  CHECK(network_cost(net, p, nullptr, HwConfig{}).tiles_used == 3232);
}

TEST_CASE("network_cost: plan exceeding the chip is infeasible") {
  const NetworkGraph net = builtin_benchmark("resnet18");
  const QuantPolicy p = QuantPolicy::uniform(net.layers.size(), 8);
  std::vector<long> r(net.layers.size(), 4);  // far past 5682 tiles
  CHECK_THROWS_AS(network_cost(net, p, &r, HwConfig{}), Error);
}

TEST_CASE("tile_count: monotone in w_bits and matrix dimensions") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<std::int64_t> dim(1, 4096);
  std::uniform_int_distribution<int> bits(1, 15);
  const HwConfig cfg;
  for (int i = 0; i < 200; ++i) {
    const std::int64_t rows = dim(rng), cols = dim(rng);
    const int w = bits(rng);
    CHECK(tile_count(mat(rows, cols, 1), w + 1, cfg) >= tile_count(mat(rows, cols, 1), w, cfg));
    CHECK(tile_count(mat(rows + 7, cols, 1), w, cfg) >= tile_count(mat(rows, cols, 1), w, cfg));
    CHECK(tile_count(mat(rows, cols + 7, 1), w, cfg) >= tile_count(mat(rows, cols, 1), w, cfg));
  }
}

TEST_CASE("energy: zero-latency degenerate config gives exactly 0 J") {
  const NetworkGraph net = builtin_benchmark("mlp_mnist");
  const QuantPolicy p = QuantPolicy::uniform(net.layers.size(), 8);
  HwConfig cfg;
  cfg.unbounded_transfer = true;
  cfg.t_tile_cycles = 0;
  cfg.e_mem_access_j_per_bit = 0.0;
  CHECK(energy_estimate(net, p, nullptr, cfg) == 0.0);
}

TEST_CASE("energy: doubling tile power doubles the tile component only") {
  const NetworkGraph net = builtin_benchmark("mlp_mnist");
  const QuantPolicy p = QuantPolicy::uniform(net.layers.size(), 8);
  HwConfig cfg;
  const double e1 = energy_estimate(net, p, nullptr, cfg);
  HwConfig doubled = cfg;
  doubled.avg_tile_power_w *= 2;
  const double e2 = energy_estimate(net, p, nullptr, doubled);
  HwConfig tile_only = cfg;
  tile_only.e_mem_access_j_per_bit = 0.0;
  tile_only.p_sram_leak_w = 0.0;
  const double tile_component = energy_estimate(net, p, nullptr, tile_only);
  CHECK(e2 - e1 == doctest::Approx(tile_component).epsilon(1e-12));
}

TEST_CASE("energy: quantization plus replication moves energy down") {
  const NetworkGraph net = builtin_benchmark("resnet18");
  const HwConfig cfg;
  const QuantPolicy u8 = QuantPolicy::uniform(net.layers.size(), 8);
  const double baseline = energy_estimate(net, u8, nullptr, cfg);
  const QuantPolicy u4 = QuantPolicy::uniform(net.layers.size(), 4);
  std::vector<long> r(net.layers.size(), 1);
  r[0] = 4;  // reuse part of the freed budget on the bottleneck
  const double optimized = energy_estimate(net, u4, &r, cfg);
  CHECK(optimized < baseline);
}
