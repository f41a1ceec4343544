#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "imcopt/hwmodel.hpp"
#include "imcopt/netgraph.hpp"
#include "imcopt/policy.hpp"

namespace imcopt {

// One line of the layer-wise breakdown. Latencies are seconds at replication
// factor 1; t_total_repl is t_total / r.
struct ReportRow {
  std::string layer;
  int w_bits = 8;
  int a_bits = 8;
  std::int64_t tiles = 0;
  long r = 1;
  double t_tile_in = 0.0;
  double t_tile_out = 0.0;
  double t_vmm = 0.0;
  double t_digital = 0.0;
  double t_total = 0.0;
  double t_total_repl = 0.0;
};

struct EstimateReport {
  std::string network;
  std::vector<ReportRow> rows;
  std::int64_t tiles_used = 0;
  double latency_s = 0.0;
  double throughput_eps = 0.0;
  double energy_j = 0.0;
  std::string bottleneck;
};

EstimateReport build_report(const NetworkGraph& net, const QuantPolicy& policy,
                            const std::vector<long>* replication, const HwConfig& cfg);

void emit_human(const EstimateReport& rep, std::ostream& os);
// Machine form: '#'-prefixed key=value summary lines followed by a CSV layer
// table; doubles printed with %.17g so parsing back is exact.
void emit_csv(const EstimateReport& rep, std::ostream& os);
EstimateReport parse_report_csv(std::istream& is);

std::string format_double(double v);  // %.17g

}  // namespace imcopt
