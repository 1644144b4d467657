#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bitsys/precision.hpp"

namespace bitsys {

// =====================================================================
// Plain-integer reference for quantized dense networks. Everything here
// computes with ordinary arithmetic on decoded values; nothing routes
// through the multiplier model, so it can serve as an end-to-end oracle
// for the accelerator.
// =====================================================================

struct LayerConfig {
  int in_features = 0;
  int out_features = 0;
  // precision of this layer's weights and input activations
  PrecisionMode mode = PrecisionMode::make(8, Signedness::Unsigned);
  std::vector<std::vector<std::int32_t>> weights;     // [out][in]
  // per-neuron ascending threshold rows; empty on the final layer, which
  // returns raw accumulators
  std::vector<std::vector<std::int32_t>> thresholds;  // [out][2^next_bits - 1]

  int threshold_count() const {
    return thresholds.empty() ? 0 : static_cast<int>(thresholds.front().size());
  }
};

struct ModelDescriptor {
  std::string name;
  int input_width = 0;
  std::vector<LayerConfig> layers;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void validate_model(const ModelDescriptor& model);
void validate_input(const ModelDescriptor& model, std::span<const int> input);

// acc_n = sum_i w[n][i] * x[i] over plain integers.
std::vector<std::int64_t> layer_accumulators(const LayerConfig& layer,
                                             std::span<const int> input);

// Threshold activation: output_n counts thresholds strictly below acc_n.
std::vector<int> reference_layer(const LayerConfig& layer, std::span<const int> input);

// Runs all layers, reinterpreting each activation code in the next
// layer's operand encoding; returns the final layer's raw accumulators.
std::vector<std::int64_t> reference_network(const ModelDescriptor& model,
                                            std::span<const int> input);

// Activation codes are raw bit fields; the next layer reads them in its
// own encoding (two's complement, bipolar, or plain binary).
int decode_activation_code(int code, PrecisionMode next_mode);

// ---------------------------------------------------------------------
// Model files: line-oriented UTF-8 text, LF line ends, '#' comments.
//
//   model <name> input <n>
//   layer dense in=<n> out=<m> bits=<b> signed=<0|1> bnn=<0|1>
//   weights
//   <out rows of in integers>
//   thresholds            (omitted on the final layer)
//   <out rows of threshold integers>
//
// Input vectors are one integer per line, count matching the model's
// input width.
// ---------------------------------------------------------------------

ModelDescriptor parse_model(std::istream& in, const std::string& origin);
ModelDescriptor load_model(const std::string& path);
void write_model(const ModelDescriptor& model, std::ostream& out);
void save_model(const ModelDescriptor& model, const std::string& path);

std::vector<int> parse_input_vector(std::istream& in, const std::string& origin);
std::vector<int> load_input_vector(const std::string& path);

// Deterministic per seed: weights uniform in the layer's operand range,
// thresholds a sorted distinct sample from the layer's reachable
// accumulator range. shape = {inputs, layer1_out, ..., final_out}.
ModelDescriptor generate_random_model(const std::vector<int>& shape,
                                      const std::vector<PrecisionMode>& modes,
                                      std::uint64_t seed);

}  // namespace bitsys
