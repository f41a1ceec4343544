#include "imcopt/report.hpp"

#include <cstdio>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "imcopt/error.hpp"

namespace imcopt {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

EstimateReport build_report(const NetworkGraph& net, const QuantPolicy& policy,
                            const std::vector<long>* replication, const HwConfig& cfg) {
  const NetworkCost nc = network_cost(net, policy, replication, cfg);
  EstimateReport rep;
  rep.network = net.name;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerCost& lc = nc.per_layer[i];
    ReportRow row;
    row.layer = net.layers[i].name;
    row.w_bits = policy.bits[i].w_bits;
    row.a_bits = policy.bits[i].a_bits;
    row.tiles = lc.tiles;
    row.r = nc.replication[i];
    row.t_tile_in = to_double(lc.t_tile_in) / cfg.clock_hz;
    row.t_tile_out = to_double(lc.t_tile_out) / cfg.clock_hz;
    row.t_vmm = to_double(lc.t_vmm) / cfg.clock_hz;
    row.t_digital = to_double(lc.t_digital) / cfg.clock_hz;
    row.t_total = to_double(lc.t_total()) / cfg.clock_hz;
    row.t_total_repl = to_double(lc.t_total() / row.r) / cfg.clock_hz;
    rep.rows.push_back(std::move(row));
  }
  rep.tiles_used = nc.tiles_used;
  rep.latency_s = nc.latency_seconds();
  rep.throughput_eps = nc.throughput_eps();
  rep.energy_j = nc.energy_j;
  rep.bottleneck = net.layers[static_cast<std::size_t>(nc.bottleneck_layer)].name;
  return rep;
}

void emit_human(const EstimateReport& rep, std::ostream& os) {
  os << "network: " << rep.network << "\n";
  os << std::left << std::setw(24) << "layer" << std::right << std::setw(3) << "wb"
     << std::setw(3) << "ab" << std::setw(7) << "tiles" << std::setw(4) << "r" << std::setw(12)
     << "t_in" << std::setw(12) << "t_out" << std::setw(12) << "t_vmm" << std::setw(12) << "t_dig"
     << std::setw(12) << "t_total" << std::setw(12) << "t_repl" << "\n";
  auto sec = [&](double v) {
    std::ostringstream ss;
    ss << std::scientific << std::setprecision(3) << v;
    return ss.str();
  };
  for (const auto& r : rep.rows) {
    os << std::left << std::setw(24) << r.layer << std::right << std::setw(3) << r.w_bits
       << std::setw(3) << r.a_bits << std::setw(7) << r.tiles << std::setw(4) << r.r
       << std::setw(12) << sec(r.t_tile_in) << std::setw(12) << sec(r.t_tile_out) << std::setw(12)
       << sec(r.t_vmm) << std::setw(12) << sec(r.t_digital) << std::setw(12) << sec(r.t_total)
       << std::setw(12) << sec(r.t_total_repl) << "\n";
  }
  os << "tiles used:       " << rep.tiles_used << "\n";
  os << "latency:          " << sec(rep.latency_s) << " s\n";
  os << "throughput:       " << sec(rep.throughput_eps) << " eval/s\n";
  os << "energy:           " << sec(rep.energy_j) << " J\n";
  os << "bottleneck layer: " << rep.bottleneck << "\n";
}

void emit_csv(const EstimateReport& rep, std::ostream& os) {
  os << "# imcopt-report v1\n";
  os << "# network=" << rep.network << "\n";
  os << "# tiles_used=" << rep.tiles_used << "\n";
  os << "# latency_s=" << format_double(rep.latency_s) << "\n";
  os << "# throughput_eps=" << format_double(rep.throughput_eps) << "\n";
  os << "# energy_j=" << format_double(rep.energy_j) << "\n";
  os << "# bottleneck=" << rep.bottleneck << "\n";
  os << "layer,w_bits,a_bits,tiles,r,t_tile_in_s,t_tile_out_s,t_vmm_s,t_digital_s,"
        "t_total_s,t_total_repl_s\n";
  for (const auto& r : rep.rows) {
    os << r.layer << ',' << r.w_bits << ',' << r.a_bits << ',' << r.tiles << ',' << r.r << ','
       << format_double(r.t_tile_in) << ',' << format_double(r.t_tile_out) << ','
       << format_double(r.t_vmm) << ',' << format_double(r.t_digital) << ','
       << format_double(r.t_total) << ',' << format_double(r.t_total_repl) << "\n";
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_d(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw Error(ErrorKind::parse, "report: bad numeric field '" + s + "'");
  }
}

}  // namespace

EstimateReport parse_report_csv(std::istream& is) {
  EstimateReport rep;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string val = line.substr(eq + 1);
      if (key == "network") rep.network = val;
      else if (key == "tiles_used") rep.tiles_used = std::stoll(val);
      else if (key == "latency_s") rep.latency_s = parse_d(val);
      else if (key == "throughput_eps") rep.throughput_eps = parse_d(val);
      else if (key == "energy_j") rep.energy_j = parse_d(val);
      else if (key == "bottleneck") rep.bottleneck = val;
      continue;
    }
    if (!header_seen) {
      header_seen = true;  // column header line
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != 11) throw Error(ErrorKind::parse, "report: bad row '" + line + "'");
    ReportRow row;
    row.layer = f[0];
    row.w_bits = std::stoi(f[1]);
    row.a_bits = std::stoi(f[2]);
    row.tiles = std::stoll(f[3]);
    row.r = std::stol(f[4]);
    row.t_tile_in = parse_d(f[5]);
    row.t_tile_out = parse_d(f[6]);
    row.t_vmm = parse_d(f[7]);
    row.t_digital = parse_d(f[8]);
    row.t_total = parse_d(f[9]);
    row.t_total_repl = parse_d(f[10]);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace imcopt
