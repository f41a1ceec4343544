#include "imcopt/policy.hpp"

#include <string>

#include "imcopt/error.hpp"

namespace imcopt {

void QuantPolicy::validate(const NetworkGraph& net, int b_min, int b_max) const {
  if (bits.size() != net.layers.size()) {
    throw Error(ErrorKind::validation,
                "policy covers " + std::to_string(bits.size()) + " layers, network '" + net.name +
                    "' has " + std::to_string(net.layers.size()));
  }
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const auto& b = bits[i];
    if (b.w_bits < b_min || b.w_bits > b_max || b.a_bits < b_min || b.a_bits > b_max) {
      throw Error(ErrorKind::validation,
                  "layer '" + net.layers[i].name + "': bitwidths (" + std::to_string(b.w_bits) +
                      "," + std::to_string(b.a_bits) + ") outside [" + std::to_string(b_min) +
                      "," + std::to_string(b_max) + "]");
    }
  }
}

double QuantPolicy::mean_w_bits() const {
  if (bits.empty()) return 0.0;
  double s = 0.0;
  for (const auto& b : bits) s += b.w_bits;
  return s / static_cast<double>(bits.size());
}

double QuantPolicy::mean_a_bits() const {
  if (bits.empty()) return 0.0;
  double s = 0.0;
  for (const auto& b : bits) s += b.a_bits;
  return s / static_cast<double>(bits.size());
}

}  // namespace imcopt
