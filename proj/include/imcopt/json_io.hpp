#pragma once

#include <string>

#include "imcopt/accoracle.hpp"
#include "imcopt/hwmodel.hpp"
#include "imcopt/mpsearch.hpp"
#include "imcopt/netgraph.hpp"
#include "imcopt/policy.hpp"

namespace imcopt {

// JSON loaders for the documented file formats (docs/*.schema.json).
// Unknown keys are rejected; errors carry the file path and offending field.

std::string read_file(const std::string& path);

HwConfig parse_hwconfig(const std::string& json_text);
HwConfig load_hwconfig(const std::string& path);

// Accepts "uniform:<bits>" or a path to a policy JSON document.
QuantPolicy load_policy(const std::string& arg, const NetworkGraph& net);
QuantPolicy parse_policy(const std::string& json_text, const NetworkGraph& net);
std::string policy_to_json(const NetworkGraph& net, const QuantPolicy& policy);

SearchConfig parse_search_config(const std::string& json_text);
SearchConfig load_search_config(const std::string& path);

// Accepts "proxy" or "external:<command>".
AccuracyOracle make_oracle(const std::string& spec, const NetworkGraph& net,
                           const ProxyParams& proxy_defaults = {});

}  // namespace imcopt
