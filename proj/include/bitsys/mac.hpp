#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>

#include "bitsys/fabric.hpp"
#include "bitsys/precision.hpp"

namespace bitsys {

// =====================================================================
// Multiply-accumulate extension.
//
// The converter feeds every bit lane of the 16-bit product word into a
// four-layer shift-add tree. Lane weights place each channel's field at
// its local power of two, and the top lane of each channel is negated in
// signed modes, so the tree root is simply the sum of all decoded channel
// products. A 32-bit signed accumulator follows; overflow is a detected
// error, not a wrap.
// =====================================================================

std::array<std::int32_t, 16> converter_lane_weights(PrecisionMode mode);
std::array<bool, 16> converter_neg_lanes(PrecisionMode mode);

// Sum of all decoded channel values of a product word.
std::int32_t convert_channels(std::uint16_t word, PrecisionMode mode);

// Number of thresholds strictly below acc. Thresholds must be strictly
// ascending; with 2^n - 1 of them this quantizes the accumulator to an
// n-bit output code.
int activate(std::int64_t acc, std::span<const std::int32_t> thresholds);
void validate_thresholds(std::span<const std::int32_t> thresholds);

// Functional accumulator.
class Mac {
 public:
  explicit Mac(PrecisionMode mode) : mode_(mode) {}
  void configure(PrecisionMode mode) { mode_ = mode; }
  PrecisionMode mode() const { return mode_; }
  void accumulate(std::uint16_t product);
  std::int32_t value() const { return acc_; }
  void reset() { acc_ = 0; }

 private:
  PrecisionMode mode_;
  std::int32_t acc_ = 0;
};

// Cycle-accurate variant: multiplier fabric, four registered tree layers,
// one accumulate stage. An input accepted at cycle t is visible in the
// accumulator at exactly t + kLatency.
class CycleMac {
 public:
  static constexpr int kTreeLayers = 4;
  static constexpr int kLatency = Fabric::kLatency + kTreeLayers + 1;  // 27

  explicit CycleMac(PrecisionMode mode) : fabric_(mode) {}

  void configure(PrecisionMode mode) { fabric_.configure(mode); }
  bool reconfiguring() const { return fabric_.reconfiguring(); }
  bool offer_input(std::uint8_t a, std::uint8_t b) { return fabric_.offer_input(a, b); }
  void step();
  std::int32_t accumulator() const { return acc_; }
  void reset_accumulator() { acc_ = 0; }
  std::uint64_t cycle() const { return fabric_.cycle(); }

 private:
  struct TreeStage {
    bool valid = false;
    int width = 0;
    std::array<std::int32_t, 8> node{};
  };

  Fabric fabric_;
  std::optional<Completion> pending_;
  std::array<TreeStage, kTreeLayers> tree_{};
  std::int32_t acc_ = 0;
};

}  // namespace bitsys
