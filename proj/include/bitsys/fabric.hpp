#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "bitsys/bitmath.hpp"
#include "bitsys/precision.hpp"

namespace bitsys {

// =====================================================================
// Cycle-accurate structural model of the reconfigurable multiplier.
//
// Datapath, one register stage per hop:
//
//   loaders    two 8-deep FIFOs with diagonal intake. Bit i of an operand
//              accepted at cycle t surfaces on lane i at t + 1 + i, so the
//              word enters the array as a skewed wavefront.
//   grid       8x8 bitwise elements. Operand-A bits flow left to right
//              along rows, operand-B bits top to bottom along columns,
//              each with a valid bit. The bits of one multiplication meet
//              at cell (i, j) exactly at wavefront_base + i + j, so a
//              whole anti-diagonal fires in the same cycle.
//   adders     15 anti-diagonal adders form P_k from the valid cell
//              outputs, applying the per-mode sign actions.
//   pipeline   15 shift-add stages fold P_k at weight 2^k into a running
//              sum; carry-cutters mask the sum at enabled channel
//              boundaries. A short output delay line brings the total
//              accept-to-complete latency to exactly kLatency in every
//              mode, one result per cycle at full throughput.
//
// configure() opens a 3-cycle window during which offers are rejected;
// work already in flight drains under the mode it was accepted with.
// =====================================================================

enum class PEType : std::uint8_t { I, II };

// Truth-table index bits: a, b, valid_a, valid_b, pattern, enable (LSB
// first). Result bit 0 is the product bit, bit 1 the output valid. Type I
// cells compute XNOR when pattern is set, otherwise AND; type II cells
// compute AND when pattern is set, otherwise constant 0.
std::array<std::uint8_t, 64> pe_truth_table(PEType type);
int pe_index(bool a, bool b, bool valid_a, bool valid_b, bool pattern, bool enable);

struct Completion {
  std::uint16_t word;
  std::uint8_t a;
  std::uint8_t b;
  PrecisionMode mode;
  std::uint64_t accept_cycle;
  std::uint64_t cycle;  // == accept_cycle + Fabric::kLatency
};

// Eight 8-bit registers pushed bottom to top; a new operand is written on
// the diagonal so the output register streams one skewed bit lane per
// operand per cycle.
class InputLoader {
 public:
  void step(std::optional<std::uint8_t> operand);
  bool lane(int i) const { return (fifo_[0] >> i) & 1u; }
  bool lane_valid(int i) const { return (valid_[0] >> i) & 1u; }

 private:
  std::array<std::uint8_t, 8> fifo_{};
  std::array<std::uint8_t, 8> valid_{};
};

class Fabric {
 public:
  static constexpr int kLatency = 22;
  static constexpr int kReconfigCycles = 3;

  explicit Fabric(PrecisionMode mode);

  // Starts the 3-cycle reconfiguration window, even when the mode is
  // unchanged. In-flight work completes under its old mode.
  void configure(PrecisionMode mode);
  bool reconfiguring() const { return reconfig_remaining_ > 0; }
  PrecisionMode mode() const { return mode_; }
  std::uint64_t cycle() const { return cycle_; }

  // At most one pair per cycle; rejected during reconfiguration.
  bool offer_input(std::uint8_t a, std::uint8_t b);

  // Advances every register one cycle and returns the products completing
  // this cycle.
  std::vector<Completion> step();

  // Observability for tests and debugging.
  std::array<bool, 7> carry_cutter_enables() const;
  const std::array<std::array<std::uint8_t, 8>, 8>& pe_outputs() const { return pe_out_; }
  const std::array<std::array<std::uint8_t, 8>, 8>& pe_valids() const { return pe_valid_; }
  void set_trace(std::ostream* os) { trace_ = os; }

 private:
  struct Slot {  // in-flight descriptor, keyed by wavefront base cycle
    bool has = false;
    std::uint64_t base = 0;
    std::uint8_t a = 0;
    std::uint8_t b = 0;
    std::uint8_t mode_idx = 0;
  };
  struct Stage {
    bool valid = false;
    std::uint32_t sum = 0;
  };
  struct Tail {
    bool valid = false;
    std::uint16_t word = 0;
  };

  const Slot* slot_at(std::uint64_t cycle, int age) const;

  PrecisionMode mode_;
  PrecisionMode pending_mode_;
  int reconfig_remaining_ = 0;
  std::uint64_t cycle_ = 0;

  InputLoader loader_a_;
  InputLoader loader_b_;
  std::optional<std::pair<std::uint8_t, std::uint8_t>> pending_input_;

  std::array<std::array<std::uint8_t, 8>, 8> ga_{}, gva_{};  // A bits flowing right
  std::array<std::array<std::uint8_t, 8>, 8> gb_{}, gvb_{};  // B bits flowing down
  std::array<std::array<std::uint8_t, 8>, 8> pe_out_{}, pe_valid_{};

  std::array<Stage, 15> stages_{};
  static constexpr int kTailDepth = kLatency - 15;  // output delay line
  std::array<Tail, kTailDepth> tail_{};

  std::array<Slot, 64> ring_{};
  std::ostream* trace_ = nullptr;
};

}  // namespace bitsys
