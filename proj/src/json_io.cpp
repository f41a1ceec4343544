#include "imcopt/json_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "imcopt/error.hpp"

namespace imcopt {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

json parse_doc(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string(what) + ": " + e.what());
  }
}

}  // namespace

HwConfig parse_hwconfig(const std::string& json_text) {
  const json doc = parse_doc(json_text, "hwconfig");
  if (!doc.is_object()) throw Error(ErrorKind::parse, "hwconfig: document must be an object");
  HwConfig cfg;
  for (const auto& [key, val] : doc.items()) {
    try {
      if (key == "tile_size") cfg.xbar_size = val.get<int>();
      else if (key == "n_tiles") cfg.n_tiles_total = val.get<std::int64_t>();
      else if (key == "device_bits") cfg.device_bits = val.get<int>();
      else if (key == "n_adc_per_tile") cfg.n_adc_per_tile = val.get<int>();
      else if (key == "adc_bits") cfg.adc_bits = val.get<int>();
      else if (key == "dac_bits") cfg.dac_bits = val.get<int>();
      else if (key == "row_parallelism") cfg.row_parallelism = val.get<int>();
      else if (key == "n_vector_modules") cfg.n_vector_modules = val.get<int>();
      else if (key == "lanes_per_vm") cfg.lanes_per_vm = val.get<int>();
      else if (key == "bus_in_lanes") cfg.bus_in_lanes = val.get<int>();
      else if (key == "bus_in_width") cfg.bus_in_width = val.get<int>();
      else if (key == "bus_out_lanes") cfg.bus_out_lanes = val.get<int>();
      else if (key == "bus_out_width") cfg.bus_out_width = val.get<int>();
      else if (key == "tiles_per_bus_group") cfg.tiles_per_bus_group = val.get<int>();
      else if (key == "clock_hz") cfg.clock_hz = val.get<double>();
      else if (key == "t_tile_cycles") cfg.t_tile_cycles = val.get<int>();
      else if (key == "avg_tile_power_w") cfg.avg_tile_power_w = val.get<double>();
      else if (key == "out_width_bits") cfg.out_width_bits = val.get<int>();
      else if (key == "row_serialization") cfg.row_serialization = val.get<bool>();
      else if (key == "unbounded_transfer") cfg.unbounded_transfer = val.get<bool>();
      else if (key == "e_mem_access_j_per_bit") cfg.e_mem_access_j_per_bit = val.get<double>();
      else if (key == "p_sram_leak_w") cfg.p_sram_leak_w = val.get<double>();
      else throw Error(ErrorKind::parse, "hwconfig: unknown field '" + key + "'");
    } catch (const json::exception& e) {
      throw Error(ErrorKind::parse, "hwconfig: field '" + key + "': " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

HwConfig load_hwconfig(const std::string& path) {
  try {
    return parse_hwconfig(read_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

QuantPolicy parse_policy(const std::string& json_text, const NetworkGraph& net) {
  const json doc = parse_doc(json_text, "policy");
  if (!doc.is_object()) throw Error(ErrorKind::parse, "policy: document must be an object");
  QuantPolicy policy = QuantPolicy::uniform(net.layers.size(), 8);
  for (const auto& [key, val] : doc.items()) {
    if (key == "uniform") {
      const int b = val.get<int>();
      policy = QuantPolicy::uniform(net.layers.size(), b);
    } else if (key == "layers") {
      if (!val.is_array()) throw Error(ErrorKind::parse, "policy: 'layers' must be an array");
      for (const auto& item : val) {
        const std::string name = item.value("name", "");
        bool found = false;
        for (std::size_t i = 0; i < net.layers.size(); ++i) {
          if (net.layers[i].name == name) {
            policy.bits[i].w_bits = item.value("w_bits", 8);
            policy.bits[i].a_bits = item.value("a_bits", 8);
            found = true;
            break;
          }
        }
        if (!found) {
          throw Error(ErrorKind::parse,
                      "policy: layer '" + name + "' not in network '" + net.name + "'");
        }
      }
    } else {
      throw Error(ErrorKind::parse, "policy: unknown field '" + key + "'");
    }
  }
  policy.validate(net);
  return policy;
}

QuantPolicy load_policy(const std::string& arg, const NetworkGraph& net) {
  if (arg.rfind("uniform:", 0) == 0) {
    int bits = 0;
    try {
      bits = std::stoi(arg.substr(8));
    } catch (const std::exception&) {
      throw Error(ErrorKind::usage, "bad policy spec '" + arg + "'; expected uniform:<bits>");
    }
    QuantPolicy p = QuantPolicy::uniform(net.layers.size(), bits);
    p.validate(net);
    return p;
  }
  try {
    return parse_policy(read_file(arg), net);
  } catch (const Error& e) {
    throw Error(e.kind(), arg + ": " + e.what());
  }
}

std::string policy_to_json(const NetworkGraph& net, const QuantPolicy& policy) {
  json layers = json::array();
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    layers.push_back({{"name", net.layers[i].name},
                      {"w_bits", policy.bits[i].w_bits},
                      {"a_bits", policy.bits[i].a_bits}});
  }
  return json{{"layers", layers}}.dump(2);
}

SearchConfig parse_search_config(const std::string& json_text) {
  const json doc = parse_doc(json_text, "searchconfig");
  if (!doc.is_object()) throw Error(ErrorKind::parse, "searchconfig: document must be an object");
  SearchConfig cfg;
  for (const auto& [key, val] : doc.items()) {
    try {
      if (key == "episodes") cfg.episodes = val.get<int>();
      else if (key == "budget_start_ratio") cfg.budget_start_ratio = val.get<double>();
      else if (key == "budget_end_ratio") cfg.budget_end_ratio = val.get<double>();
      else if (key == "objective") {
        const std::string s = val.get<std::string>();
        if (s == "latency") cfg.objective = Objective::latency;
        else if (s == "throughput") cfg.objective = Objective::throughput;
        else throw Error(ErrorKind::parse, "searchconfig: bad objective '" + s + "'");
      } else if (key == "lambda") cfg.lambda = val.get<double>();
      else if (key == "alpha") cfg.alpha = val.get<double>();
      else if (key == "seed") cfg.seed = val.get<std::uint64_t>();
      else if (key == "b_min") cfg.b_min = val.get<int>();
      else if (key == "b_max") cfg.b_max = val.get<int>();
      else if (key == "budget_tile_ratio") cfg.budget_tile_ratio = val.get<double>();
      else if (key == "noise_init") cfg.noise_init = val.get<double>();
      else if (key == "noise_final_frac") cfg.noise_final_frac = val.get<double>();
      else if (key == "enable_replication") cfg.enable_replication = val.get<bool>();
      else if (key == "agent") {
        for (const auto& [akey, aval] : val.items()) {
          if (akey == "hidden") cfg.agent.hidden = aval.get<int>();
          else if (akey == "actor_lr") cfg.agent.actor_lr = aval.get<double>();
          else if (akey == "critic_lr") cfg.agent.critic_lr = aval.get<double>();
          else if (akey == "replay_capacity") cfg.agent.replay_capacity = aval.get<std::size_t>();
          else if (akey == "batch_size") cfg.agent.batch_size = aval.get<int>();
          else if (akey == "updates_per_episode") cfg.agent.updates_per_episode = aval.get<int>();
          else throw Error(ErrorKind::parse, "searchconfig: unknown agent field '" + akey + "'");
        }
      } else {
        throw Error(ErrorKind::parse, "searchconfig: unknown field '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::parse, "searchconfig: field '" + key + "': " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

SearchConfig load_search_config(const std::string& path) {
  try {
    return parse_search_config(read_file(path));
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

AccuracyOracle make_oracle(const std::string& spec, const NetworkGraph& net,
                           const ProxyParams& proxy_defaults) {
  if (spec == "proxy") {
    ProxyParams p = proxy_defaults;
    if (!p.sigma.empty() && p.sigma.size() != net.layers.size()) {
      throw Error(ErrorKind::usage, "proxy oracle sigma must cover every layer");
    }
    return AccuracyOracle::proxy(std::move(p));
  }
  if (spec.rfind("external:", 0) == 0) {
    const std::string cmd = spec.substr(9);
    return AccuracyOracle::external(cmd);
  }
  throw Error(ErrorKind::usage,
              "bad oracle spec '" + spec + "'; expected 'proxy' or 'external:<command>'");
}

}  // namespace imcopt
