#pragma once

#include <cstddef>
#include <vector>

#include "imcopt/netgraph.hpp"

namespace imcopt {

struct LayerBits {
  int w_bits = 8;
  int a_bits = 8;
  bool operator==(const LayerBits&) const = default;
};

// Per-layer weight/activation bitwidth assignment, index-aligned with the
// network's layer list.
struct QuantPolicy {
  std::vector<LayerBits> bits;

  static QuantPolicy uniform(std::size_t num_layers, int b) {
    QuantPolicy p;
    p.bits.assign(num_layers, LayerBits{b, b});
    return p;
  }

  std::size_t size() const { return bits.size(); }
  bool operator==(const QuantPolicy&) const = default;

  // Checks coverage of `net` and bounds [b_min, b_max].
  void validate(const NetworkGraph& net, int b_min = 1, int b_max = 64) const;

  double mean_w_bits() const;
  double mean_a_bits() const;
};

}  // namespace imcopt
