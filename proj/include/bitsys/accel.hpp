#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bitsys/mac.hpp"
#include "bitsys/precision.hpp"
#include "bitsys/refnet.hpp"

namespace bitsys {

// =====================================================================
// Cycle-accounting models of two 64-multiplier accelerator layouts.
//
// single_layer  8 neurons, each with 8 multiplier-accumulators and its
//               own 16 loaders. Neuron groups run serially: a group
//               streams ceil(in / (8 * channels)) operand words per
//               multiplier, pays the MAC pipeline fill, then activates
//               its 8 neurons in parallel (one comparator step per
//               threshold).
//
// systolic      8x8 output-stationary MAC grid fed by 8 row and 8 column
//               loaders. Columns hold a tile of up to 8 neurons, rows
//               split the input positions eight ways, and tiles stream
//               back to back, so the skew and pipeline fills are paid
//               once per layer and activation overlaps all but the final
//               tile.
//
// Arithmetic runs through the packed multiplier path (pack, multiply,
// convert, accumulate), so results are bit-exact against the plain
// integer reference.
// =====================================================================

enum class Topology { SingleLayer, Systolic };

std::optional<Topology> parse_topology(std::string_view token);
std::string topology_name(Topology t);

struct AcceleratorSpec {
  static constexpr int kMultipliers = 64;
  static constexpr int kNeuronsPerGroup = 8;
  static constexpr int kGridDim = 8;
  static constexpr int kReconfigCycles = Fabric::kReconfigCycles;        // 3
  static constexpr int kMacPipeFill = CycleMac::kLatency;                // 27
  static constexpr int kSystolicSkewFill = 2 * (kGridDim - 1);           // 14
};

struct LayerCycles {
  int layer_index = 0;
  PrecisionMode mode = PrecisionMode::make(8, Signedness::Unsigned);
  std::int64_t compute_cycles = 0;
  std::int64_t reconfig_cycles = 0;
  std::int64_t activation_cycles = 0;
  std::int64_t mult_busy_cycles = 0;
};

struct CycleReport {
  std::vector<LayerCycles> layers;

  std::int64_t total_compute() const;
  std::int64_t total_reconfig() const;
  std::int64_t total_activation() const;
  std::int64_t total_busy() const;

  std::string to_csv() const;
};

struct LayerRun {
  std::vector<std::int64_t> accumulators;
  std::vector<int> outputs;  // activation codes; empty when no thresholds
  LayerCycles cycles;
};

LayerRun run_layer(Topology t, const LayerConfig& layer, std::span<const int> inputs);

// Closed form matching run_layer's compute + activation count.
std::int64_t schedule_cycles(Topology t, const LayerConfig& layer);

struct NetworkRun {
  std::vector<std::int64_t> logits;
  int argmax = 0;
  CycleReport report;
};

NetworkRun run_network(Topology t, const ModelDescriptor& model,
                       std::span<const int> input);

// Schedule-only report; weights never touched.
CycleReport predict_cycles(Topology t, const ModelDescriptor& model);

}  // namespace bitsys
