#include "imcopt/hwmodel.hpp"

#include <algorithm>
#include <string>

#include "imcopt/error.hpp"

namespace imcopt {

namespace {

void require_pos(const char* field, std::int64_t v) {
  if (v <= 0) {
    throw Error(ErrorKind::validation,
                std::string("hwconfig: '") + field + "' must be positive, got " + std::to_string(v));
  }
}

}  // namespace

void HwConfig::validate() const {
  require_pos("tile_size", xbar_size);
  require_pos("n_tiles", n_tiles_total);
  require_pos("device_bits", device_bits);
  require_pos("n_adc_per_tile", n_adc_per_tile);
  require_pos("adc_bits", adc_bits);
  require_pos("dac_bits", dac_bits);
  require_pos("row_parallelism", row_parallelism);
  require_pos("n_vector_modules", n_vector_modules);
  require_pos("lanes_per_vm", lanes_per_vm);
  require_pos("bus_in_lanes", bus_in_lanes);
  require_pos("bus_in_width", bus_in_width);
  require_pos("bus_out_lanes", bus_out_lanes);
  require_pos("bus_out_width", bus_out_width);
  require_pos("tiles_per_bus_group", tiles_per_bus_group);
  require_pos("out_width_bits", out_width_bits);
  if (t_tile_cycles < 0) {
    throw Error(ErrorKind::validation, "hwconfig: 't_tile_cycles' must be non-negative");
  }
  if (n_adc_per_tile > xbar_size) {
    throw Error(ErrorKind::validation, "hwconfig: 'n_adc_per_tile' cannot exceed 'tile_size'");
  }
  if (clock_hz <= 0) throw Error(ErrorKind::validation, "hwconfig: 'clock_hz' must be positive");
  if (avg_tile_power_w < 0 || e_mem_access_j_per_bit < 0 || p_sram_leak_w < 0) {
    throw Error(ErrorKind::validation, "hwconfig: power/energy coefficients must be non-negative");
  }
}

std::int64_t tile_count(const LoweredMatrix& lm, int w_bits, const HwConfig& cfg) {
  if (w_bits < 1) throw Error(ErrorKind::validation, "tile_count: w_bits must be >= 1");
  const std::int64_t row_tiles = ceil_div(lm.rows, cfg.xbar_size);
  const std::int64_t col_tiles = ceil_div(lm.cols, cfg.xbar_size);
  const std::int64_t slices = ceil_div(w_bits, cfg.device_bits);
  return checked_mul(checked_mul(row_tiles, col_tiles), slices);
}

Cycles vmm_cycles(const LoweredMatrix& lm, int a_bits, const HwConfig& cfg) {
  if (a_bits < 1) throw Error(ErrorKind::validation, "vmm_cycles: a_bits must be >= 1");
  const std::int64_t adc_mux = ceil_div(cfg.xbar_size, cfg.n_adc_per_tile);
  const std::int64_t row_group_factor =
      cfg.row_serialization ? ceil_div(std::min<std::int64_t>(lm.rows, cfg.xbar_size),
                                       cfg.row_parallelism)
                            : 1;
  std::int64_t cycles = checked_mul(lm.num_vectors, cfg.t_tile_cycles);
  cycles = checked_mul(cycles, adc_mux);
  cycles = checked_mul(cycles, a_bits);
  cycles = checked_mul(cycles, row_group_factor);
  return Cycles(cycles);
}

double vmm_latency(const LoweredMatrix& lm, int a_bits, const HwConfig& cfg) {
  return to_double(vmm_cycles(lm, a_bits, cfg)) / cfg.clock_hz;
}

namespace {

// Share of one bus/VM group's resources granted to a layer holding `tiles`
// crossbars, capped at the full group.
Cycles group_share(std::int64_t tiles, const HwConfig& cfg) {
  if (tiles >= cfg.tiles_per_bus_group) return Cycles(1);
  return Cycles(tiles, cfg.tiles_per_bus_group);
}

}  // namespace

LayerCost layer_cost(const LayerDesc& layer, int w_bits, int a_bits, const HwConfig& cfg) {
  const LoweredMatrix lm = lower_layer(layer);
  LayerCost cost;
  cost.tiles = tile_count(lm, w_bits, cfg);
  cost.t_vmm = vmm_cycles(lm, a_bits, cfg);
  if (cfg.unbounded_transfer) return cost;

  const Cycles share = group_share(cost.tiles, cfg);
  const Cycles bw_in = Cycles(checked_mul(cfg.bus_in_lanes, cfg.bus_in_width)) * share;
  const Cycles bw_out = Cycles(checked_mul(cfg.bus_out_lanes, cfg.bus_out_width)) * share;
  const Cycles lanes = Cycles(cfg.lanes_per_vm) * share;

  const std::int64_t bits_in = checked_mul(checked_mul(lm.num_vectors, lm.rows), a_bits);
  const std::int64_t bits_out =
      checked_mul(checked_mul(lm.num_vectors, lm.cols), cfg.out_width_bits);
  const std::int64_t out_values = checked_mul(lm.num_vectors, lm.cols);

  cost.t_tile_in = Cycles(bits_in) / bw_in;
  cost.t_tile_out = Cycles(bits_out) / bw_out;
  cost.t_digital = Cycles(out_values) / lanes;
  return cost;
}

double energy_estimate(const NetworkGraph& net, const QuantPolicy& policy,
                       const std::vector<long>* replication, const HwConfig& cfg) {
  return network_cost(net, policy, replication, cfg).energy_j;
}

NetworkCost network_cost(const NetworkGraph& net, const QuantPolicy& policy,
                         const std::vector<long>* replication, const HwConfig& cfg) {
  cfg.validate();
  policy.validate(net);
  if (replication && replication->size() != net.layers.size()) {
    throw Error(ErrorKind::validation, "replication plan does not cover all layers");
  }
  NetworkCost nc;
  nc.clock_hz = cfg.clock_hz;
  nc.replication.assign(net.layers.size(), 1);
  if (replication) {
    for (std::size_t i = 0; i < replication->size(); ++i) {
      if ((*replication)[i] < 1) {
        throw Error(ErrorKind::validation,
                    "layer '" + net.layers[i].name + "': replication factor must be >= 1");
      }
      nc.replication[i] = (*replication)[i];
    }
  }

  double tile_energy = 0.0;
  double bits_moved = 0.0;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& b = policy.bits[i];
    LayerCost lc = layer_cost(net.layers[i], b.w_bits, b.a_bits, cfg);
    const long r = nc.replication[i];
    const Cycles replicated = lc.t_total() / r;
    nc.latency += replicated;
    if (i == 0 || replicated > nc.bottleneck_latency) {
      nc.bottleneck_latency = replicated;
      nc.bottleneck_layer = static_cast<int>(i);
    }
    nc.tiles_used += checked_mul(lc.tiles, r);

    const LoweredMatrix lm = lower_layer(net.layers[i]);
    // r*s tiles active for t_vmm/r seconds each: the product is replication-
    // invariant; quantization shrinks it through tiles and a_bits.
    tile_energy += static_cast<double>(lc.tiles) * cfg.avg_tile_power_w *
                   (to_double(lc.t_vmm) / cfg.clock_hz);
    bits_moved += static_cast<double>(checked_mul(checked_mul(lm.num_vectors, lm.rows), b.a_bits)) +
                  static_cast<double>(checked_mul(checked_mul(lm.num_vectors, lm.cols),
                                                  cfg.out_width_bits));
    nc.per_layer.push_back(std::move(lc));
  }
  if (nc.tiles_used > cfg.n_tiles_total) {
    throw Error(ErrorKind::infeasible,
                "plan uses " + std::to_string(nc.tiles_used) + " tiles; the system has " +
                    std::to_string(cfg.n_tiles_total));
  }
  const double latency_s = to_double(nc.latency) / cfg.clock_hz;
  nc.energy_j = tile_energy + cfg.e_mem_access_j_per_bit * bits_moved +
                cfg.p_sram_leak_w * latency_s;
  return nc;
}

}  // namespace imcopt
