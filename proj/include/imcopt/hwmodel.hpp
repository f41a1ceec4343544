#pragma once

#include <cstdint>
#include <vector>

#include "imcopt/netgraph.hpp"
#include "imcopt/policy.hpp"
#include "imcopt/rational.hpp"

namespace imcopt {

// Microarchitectural parameters of the spatial IMC accelerator. Defaults are
// the scaled-up 1T-1R RRAM system: 5682 256x256 tiles, 1-bit devices, eight
// 4-bit ADCs per tile, 9-row activation groups, 40 vector modules with 64
// lanes each, 8x8b inbound and 8x32b outbound buses shared per 144-tile
// group, 192 MHz.
struct HwConfig {
  int xbar_size = 256;            // X (rows = cols per tile)
  std::int64_t n_tiles_total = 5682;
  int device_bits = 1;            // s_b
  int n_adc_per_tile = 8;         // column parallelism
  int adc_bits = 4;
  int dac_bits = 1;
  int row_parallelism = 9;        // rows activated per step
  int n_vector_modules = 40;
  int lanes_per_vm = 64;
  int bus_in_lanes = 8;
  int bus_in_width = 8;           // bits per inbound lane
  int bus_out_lanes = 8;
  int bus_out_width = 32;         // bits per outbound lane
  int tiles_per_bus_group = 144;  // tiles sharing one bus/VM group
  double clock_hz = 192e6;
  int t_tile_cycles = 1;          // cycles per ADC conversion step
  double avg_tile_power_w = 70e-6;
  int out_width_bits = 32;        // digital output word moved per value

  // When false, the VMM latency is the literal bit-stream formula with no
  // row-serialization term; when true, rows are activated in groups of
  // row_parallelism and the factor ceil(min(rows,X)/row_parallelism) applies.
  bool row_serialization = true;

  // Test hook: treat buses and digital lanes as infinitely wide, so a layer's
  // latency reduces to its VMM term.
  bool unbounded_transfer = false;

  // Energy coefficients. The tile power above comes from the hardware spec;
  // these two are synthetic placeholders (no published values) and should be
  // calibrated per deployment.
  double e_mem_access_j_per_bit = 1e-12;
  double p_sram_leak_w = 0.05;

  void validate() const;
};

// Per-layer cost at replication factor 1. Latency fields are exact cycle
// counts; seconds come out at reporting via `seconds`.
struct LayerCost {
  std::int64_t tiles = 0;
  Cycles t_tile_in{0};
  Cycles t_tile_out{0};
  Cycles t_vmm{0};
  Cycles t_digital{0};

  Cycles t_total() const { return t_tile_in + t_tile_out + t_vmm + t_digital; }
  double seconds(const HwConfig& cfg) const { return to_double(t_total()) / cfg.clock_hz; }
};

struct NetworkCost {
  std::vector<LayerCost> per_layer;       // unreplicated costs
  std::vector<long> replication;          // r_l applied (all 1 when no plan)
  Cycles latency{0};                      // sum_l t_total,l / r_l, in cycles
  int bottleneck_layer = 0;               // argmax_l t_total,l / r_l
  Cycles bottleneck_latency{0};           // max_l t_total,l / r_l, in cycles
  std::int64_t tiles_used = 0;            // sum_l r_l * s_l
  double energy_j = 0.0;
  double clock_hz = 0.0;

  double latency_seconds() const { return to_double(latency) / clock_hz; }
  double bottleneck_seconds() const { return to_double(bottleneck_latency) / clock_hz; }
  double throughput_eps() const { return clock_hz / to_double(bottleneck_latency); }
  Cycles throughput_per_cycle() const { return Cycles(1) / bottleneck_latency; }
};

// Tiles to map a lowered matrix with w_b-bit weights on s_b-bit devices:
// ceil(rows/X) * ceil(cols/X) * ceil(w_b/s_b).
std::int64_t tile_count(const LoweredMatrix& lm, int w_bits, const HwConfig& cfg);

// Bit-streamed VMM latency in cycles:
// num_vectors * t_tile * ceil(X/n_ADC) * a_b * row_group_factor.
Cycles vmm_cycles(const LoweredMatrix& lm, int a_bits, const HwConfig& cfg);
double vmm_latency(const LoweredMatrix& lm, int a_bits, const HwConfig& cfg);  // seconds

LayerCost layer_cost(const LayerDesc& layer, int w_bits, int a_bits, const HwConfig& cfg);

// Full-network cost under a policy and optional replication factors
// (pass nullptr for the unreplicated baseline).
NetworkCost network_cost(const NetworkGraph& net, const QuantPolicy& policy,
                         const std::vector<long>* replication, const HwConfig& cfg);

double energy_estimate(const NetworkGraph& net, const QuantPolicy& policy,
                       const std::vector<long>* replication, const HwConfig& cfg);

}  // namespace imcopt
