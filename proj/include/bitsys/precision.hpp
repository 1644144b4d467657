#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace bitsys {

enum class Signedness : std::uint8_t { Unsigned, Signed };

// Operand precision and channel layout of the shared 8-bit multiplier word.
// channels * bits == 8 in every mode; each channel's product occupies a
// 2 * bits field of the 16-bit product word, channel 0 at the LSB end.
//
// 1-bit signed selects the bipolar encoding: bit 0 means -1, bit 1 means +1,
// and channel products are formed by XNOR instead of AND.
class PrecisionMode {
 public:
  static PrecisionMode make(int bits, Signedness s);
  // Tokens: "1u", "1b", "2u", "2s", "4u", "4s", "8u", "8s" ("1s" == "1b").
  static std::optional<PrecisionMode> parse(std::string_view token);
  // The eight distinct modes, in index() order.
  static const std::array<PrecisionMode, 8>& all();

  int bits() const { return bits_; }
  int channels() const { return 8 / bits_; }
  int output_bits() const { return 2 * bits_; }
  bool is_signed() const { return signedness_ == Signedness::Signed; }
  bool bnn_xnor() const { return bits_ == 1 && is_signed(); }

  // Valid per-channel operand values. Bipolar channels hold only -1 or +1;
  // zero is not representable there.
  int min_value() const;
  int max_value() const;
  bool in_range(int v) const;

  std::string name() const;

  // Stable index into per-mode tables, 0..7.
  int index() const;

  bool operator==(const PrecisionMode&) const = default;

 private:
  PrecisionMode(std::int8_t bits, Signedness s) : bits_(bits), signedness_(s) {}

  std::int8_t bits_;
  Signedness signedness_;
};

}  // namespace bitsys
