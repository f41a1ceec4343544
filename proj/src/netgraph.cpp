#include "imcopt/netgraph.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "imcopt/error.hpp"
#include "imcopt/rational.hpp"

namespace imcopt {

namespace {

using nlohmann::json;

[[noreturn]] void fail_parse(const std::string& msg) { throw Error(ErrorKind::parse, msg); }
[[noreturn]] void fail_valid(const std::string& msg) { throw Error(ErrorKind::validation, msg); }

void require_positive(const std::string& layer, const char* field, long v) {
  if (v <= 0) {
    fail_valid("layer '" + layer + "': field '" + field + "' must be positive, got " +
               std::to_string(v));
  }
}

}  // namespace

void LayerDesc::validate() const {
  if (name.empty()) fail_valid("layer with empty name");
  require_positive(name, "k", kernel_size);
  require_positive(name, "c", in_channels);
  require_positive(name, "n", out_channels);
  require_positive(name, "w", out_width);
  if (kind == LayerKind::fc) {
    if (kernel_size != 1) fail_valid("layer '" + name + "': fc layers require k = 1");
    if (out_width != 1) fail_valid("layer '" + name + "': fc layers require w = 1");
  }
  if (stride < 1) fail_valid("layer '" + name + "': field 'stride' must be positive");
  if (padding < 0) fail_valid("layer '" + name + "': field 'padding' must be non-negative");
}

void NetworkGraph::validate() const {
  if (layers.empty()) fail_valid("network '" + name + "' has no layers");
  std::set<std::string> seen;
  for (const auto& l : layers) {
    l.validate();
    if (!seen.insert(l.name).second) {
      fail_valid("network '" + name + "': duplicate layer name '" + l.name + "'");
    }
  }
}

int conv_out_width(int in_width, int kernel, int stride, int padding) {
  return (in_width + 2 * padding - kernel) / stride + 1;
}

LoweredMatrix lower_layer(const LayerDesc& layer) {
  LoweredMatrix lm;
  const std::int64_t k = layer.kernel_size;
  lm.rows = checked_mul(checked_mul(k, k), layer.in_channels);
  lm.cols = layer.out_channels;
  lm.num_vectors = checked_mul(layer.out_width, layer.out_width);
  return lm;
}

namespace {

LayerDesc parse_layer(const json& j, std::size_t index) {
  if (!j.is_object()) fail_parse("layer " + std::to_string(index) + " is not an object");
  LayerDesc l;
  bool have_w = false, have_in_width = false;
  for (const auto& [key, val] : j.items()) {
    if (key == "name") {
      if (!val.is_string()) fail_parse("field 'name' must be a string");
      l.name = val.get<std::string>();
    } else if (key == "kind") {
      const std::string k = val.is_string() ? val.get<std::string>() : "";
      if (k == "conv") l.kind = LayerKind::conv;
      else if (k == "fc") l.kind = LayerKind::fc;
      else fail_parse("layer " + std::to_string(index) + ": field 'kind' must be 'conv' or 'fc'");
    } else if (key == "k") {
      l.kernel_size = val.get<int>();
    } else if (key == "c") {
      l.in_channels = val.get<int>();
    } else if (key == "n") {
      l.out_channels = val.get<int>();
    } else if (key == "w") {
      l.out_width = val.get<int>();
      have_w = true;
    } else if (key == "in_width") {
      l.in_width = val.get<int>();
      have_in_width = true;
    } else if (key == "stride") {
      l.stride = val.get<int>();
    } else if (key == "padding") {
      l.padding = val.get<int>();
    } else {
      fail_parse("layer " + std::to_string(index) + ": unknown field '" + key + "'");
    }
  }
  if (l.name.empty()) fail_parse("layer " + std::to_string(index) + ": missing field 'name'");
  if (l.kind == LayerKind::fc) {
    if (!have_w) l.out_width = 1;
  } else if (!have_w) {
    if (!have_in_width) {
      fail_parse("layer '" + l.name + "': needs either 'w' or 'in_width'/'stride'/'padding'");
    }
    require_positive(l.name, "in_width", l.in_width);
    if (l.stride < 1) fail_valid("layer '" + l.name + "': field 'stride' must be positive");
    l.out_width = conv_out_width(l.in_width, l.kernel_size, l.stride, l.padding);
  }
  return l;
}

}  // namespace

NetworkGraph parse_network(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail_parse(std::string("network document: ") + e.what());
  }
  if (!doc.is_object()) fail_parse("network document must be a JSON object");
  NetworkGraph net;
  bool have_layers = false;
  for (const auto& [key, val] : doc.items()) {
    if (key == "name") {
      if (!val.is_string()) fail_parse("field 'name' must be a string");
      net.name = val.get<std::string>();
    } else if (key == "layers") {
      if (!val.is_array()) fail_parse("field 'layers' must be an array");
      have_layers = true;
      for (std::size_t i = 0; i < val.size(); ++i) net.layers.push_back(parse_layer(val[i], i));
    } else {
      fail_parse("network document: unknown field '" + key + "'");
    }
  }
  if (net.name.empty()) fail_parse("network document: missing field 'name'");
  if (!have_layers) fail_parse("network document: missing field 'layers'");
  net.validate();
  return net;
}

namespace {

LayerDesc conv(std::string name, int k, int c, int n, int in_width, int stride, int padding) {
  LayerDesc l;
  l.name = std::move(name);
  l.kind = LayerKind::conv;
  l.kernel_size = k;
  l.in_channels = c;
  l.out_channels = n;
  l.in_width = in_width;
  l.stride = stride;
  l.padding = padding;
  l.out_width = conv_out_width(in_width, k, stride, padding);
  return l;
}

LayerDesc fc(std::string name, int in_features, int out_features) {
  LayerDesc l;
  l.name = std::move(name);
  l.kind = LayerKind::fc;
  l.kernel_size = 1;
  l.in_channels = in_features;
  l.out_channels = out_features;
  l.out_width = 1;
  return l;
}

NetworkGraph mlp_mnist() {
  NetworkGraph net;
  net.name = "mlp_mnist";
  net.layers = {fc("fc1", 784, 1024), fc("fc2", 1024, 4096), fc("fc3", 4096, 4096),
                fc("fc4", 4096, 1024), fc("fc5", 1024, 10)};
  return net;
}

// ImageNet-geometry residual networks. Downsample (1x1 shortcut) convolutions
// are distinct layers: they occupy crossbars like any other weight matrix.
NetworkGraph resnet_basic(const std::string& name, const std::vector<int>& blocks) {
  NetworkGraph net;
  net.name = name;
  net.layers.push_back(conv("conv1", 7, 3, 64, 224, 2, 3));
  // 3x3/2 max pool: 112 -> 56 (no weights, no layer entry)
  int width = 56;
  int channels = 64;
  const int stage_channels[4] = {64, 128, 256, 512};
  for (int stage = 0; stage < 4; ++stage) {
    const int out_ch = stage_channels[stage];
    for (int b = 0; b < blocks[stage]; ++b) {
      const int stride = (stage > 0 && b == 0) ? 2 : 1;
      const std::string prefix = "layer" + std::to_string(stage + 1) + "." + std::to_string(b);
      net.layers.push_back(conv(prefix + ".conv1", 3, channels, out_ch, width, stride, 1));
      const int mid_width = conv_out_width(width, 3, stride, 1);
      net.layers.push_back(conv(prefix + ".conv2", 3, out_ch, out_ch, mid_width, 1, 1));
      if (stride != 1 || channels != out_ch) {
        net.layers.push_back(conv(prefix + ".downsample", 1, channels, out_ch, width, stride, 0));
      }
      width = mid_width;
      channels = out_ch;
    }
  }
  net.layers.push_back(fc("fc", 512, 1000));
  return net;
}

NetworkGraph resnet_bottleneck(const std::string& name, const std::vector<int>& blocks) {
  NetworkGraph net;
  net.name = name;
  net.layers.push_back(conv("conv1", 7, 3, 64, 224, 2, 3));
  int width = 56;
  int channels = 64;
  const int stage_channels[4] = {64, 128, 256, 512};
  const int expansion = 4;
  for (int stage = 0; stage < 4; ++stage) {
    const int mid_ch = stage_channels[stage];
    const int out_ch = mid_ch * expansion;
    for (int b = 0; b < blocks[stage]; ++b) {
      const int stride = (stage > 0 && b == 0) ? 2 : 1;  // stride on the 3x3 (v1.5)
      const std::string prefix = "layer" + std::to_string(stage + 1) + "." + std::to_string(b);
      net.layers.push_back(conv(prefix + ".conv1", 1, channels, mid_ch, width, 1, 0));
      net.layers.push_back(conv(prefix + ".conv2", 3, mid_ch, mid_ch, width, stride, 1));
      const int mid_width = conv_out_width(width, 3, stride, 1);
      net.layers.push_back(conv(prefix + ".conv3", 1, mid_ch, out_ch, mid_width, 1, 0));
      if (stride != 1 || channels != out_ch) {
        net.layers.push_back(conv(prefix + ".downsample", 1, channels, out_ch, width, stride, 0));
      }
      width = mid_width;
      channels = out_ch;
    }
  }
  net.layers.push_back(fc("fc", 2048, 1000));
  return net;
}

}  // namespace

std::vector<std::string> builtin_benchmark_names() {
  return {"mlp_mnist", "resnet18", "resnet34", "resnet50", "resnet101"};
}

NetworkGraph builtin_benchmark(const std::string& name) {
  NetworkGraph net;
  if (name == "mlp_mnist") {
    net = mlp_mnist();
  } else if (name == "resnet18") {
    net = resnet_basic("resnet18", {2, 2, 2, 2});
  } else if (name == "resnet34") {
    net = resnet_basic("resnet34", {3, 4, 6, 3});
  } else if (name == "resnet50") {
    net = resnet_bottleneck("resnet50", {3, 4, 6, 3});
  } else if (name == "resnet101") {
    net = resnet_bottleneck("resnet101", {3, 4, 23, 3});
  } else {
    std::ostringstream os;
    os << "unknown benchmark '" << name << "'; available:";
    for (const auto& n : builtin_benchmark_names()) os << " " << n;
    throw Error(ErrorKind::usage, os.str());
  }
  net.validate();
  return net;
}

NetworkGraph load_network(const std::string& name_or_path) {
  const auto names = builtin_benchmark_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) {
    return builtin_benchmark(name_or_path);
  }
  std::ifstream in(name_or_path);
  if (!in) {
    throw Error(ErrorKind::parse, "cannot open network file '" + name_or_path +
                                      "' (not a builtin benchmark either)");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_network(ss.str());
  } catch (const Error& e) {
    throw Error(e.kind(), name_or_path + ": " + e.what());
  }
}

}  // namespace imcopt
