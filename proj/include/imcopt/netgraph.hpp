#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace imcopt {

enum class LayerKind { conv, fc };

// Shape parameters of one weight-bearing layer. Pooling/batch-norm/activation
// carry no crossbar tiles and are folded into the digital-compute term.
struct LayerDesc {
  std::string name;
  LayerKind kind = LayerKind::conv;
  int kernel_size = 1;   // K (1 for fc)
  int in_channels = 1;   // C (input features for fc)
  int out_channels = 1;  // N (output features for fc)
  int out_width = 1;     // W, spatial output dimension (1 for fc)
  // Ingestion metadata; out_width is derived from these when not given directly.
  int stride = 1;
  int padding = 0;
  int in_width = 0;  // 0 = not recorded

  void validate() const;
};

struct NetworkGraph {
  std::string name;
  std::vector<LayerDesc> layers;

  void validate() const;
};

// A convolution lowered to a 2-D weight matrix: rows = K^2*C, cols = N, and
// the input tensor unrolled into num_vectors = W^2 column vectors.
struct LoweredMatrix {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::int64_t num_vectors = 0;
};

// Output width of a convolution: floor((I + 2p - K)/s) + 1.
int conv_out_width(int in_width, int kernel, int stride, int padding);

LoweredMatrix lower_layer(const LayerDesc& layer);

// Parses a network-spec JSON document (schema: docs/network.schema.json).
NetworkGraph parse_network(const std::string& json_text);

// Built-in benchmark layer tables: mlp_mnist, resnet18/34/50/101.
NetworkGraph builtin_benchmark(const std::string& name);
std::vector<std::string> builtin_benchmark_names();

// Resolves a --network argument: builtin name or path to a JSON document.
NetworkGraph load_network(const std::string& name_or_path);

}  // namespace imcopt
