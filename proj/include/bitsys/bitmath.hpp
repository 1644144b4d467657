#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "bitsys/precision.hpp"

namespace bitsys {

// =====================================================================
// Functional model of the multi-precision multiplier.
//
// An 8x8 grid of 1-bit products a_i * b_j is filtered by a per-mode mask
// (only cells whose row and column fall in the same channel block are
// active), signed per the sign-action grid, summed along anti-diagonals
// i + j = k into partial products P_0..P_14, and assembled into the
// 16-bit product word by shifting each P_k left by k. Carry-cutters at
// the channel boundaries keep one channel's carries out of the next.
// =====================================================================

using ChannelValues = std::vector<int>;

enum class SignKind : std::uint8_t { Inactive, Add, Subtract, Bipolar };

struct MaskPattern {
  std::array<std::array<bool, 8>, 8> active{};
};

struct SignActionGrid {
  std::array<std::array<SignKind, 8>, 8> action{};
};

// Region of grid cell (i, j): 1 on the main diagonal, 2 inside the 2x2
// diagonal blocks off it, 3 inside the 4x4 blocks, 4 elsewhere. A mode of
// width b activates regions 1..log2(b)+1.
int grid_region(int i, int j);

MaskPattern mask_pattern(PrecisionMode mode);

// Add/Subtract placement for signed modes: within each diagonal block the
// row and column of the block's sign bit subtract, except the sign-sign
// cell which adds. Bipolar mode tags its diagonal cells so the XNOR output
// x contributes 2x - 1.
SignActionGrid sign_actions(PrecisionMode mode);

struct SubPartialGrid {
  std::array<std::array<std::uint8_t, 8>, 8> cell{};
  SignActionGrid actions;
  PrecisionMode mode;
};

struct PartialProducts {
  std::array<int, 15> p{};
};

std::uint8_t pack(const ChannelValues& values, PrecisionMode mode);
ChannelValues unpack(std::uint8_t word, PrecisionMode mode);
ChannelValues unpack_product(std::uint16_t word, PrecisionMode mode);

// Single-field decoders (field already isolated, right-aligned).
int decode_operand_field(unsigned field, PrecisionMode mode);
int decode_product_field(unsigned field, PrecisionMode mode);

SubPartialGrid sub_partial_grid(std::uint8_t a, std::uint8_t b, PrecisionMode mode);
PartialProducts partial_products(const SubPartialGrid& grid);
std::uint16_t assemble_product(const PartialProducts& p, PrecisionMode mode);

// Carry-cutter slots sit after D_k for every odd k below 15; a slot is
// enabled when position k closes an output channel in the current mode.
constexpr std::array<int, 7> kCarryCutterPositions{1, 3, 5, 7, 9, 11, 13};
std::array<bool, 7> carry_cutter_enables(PrecisionMode mode);

// One bit per channel; channels with a cleared bit contribute a zero field
// to the product word (mirrors the valid-signal gating of the array).
constexpr std::uint8_t kAllChannelsValid = 0xFF;

std::uint16_t multiply(std::uint8_t a, std::uint8_t b, PrecisionMode mode,
                       std::uint8_t channel_valid_mask = kAllChannelsValid);

}  // namespace bitsys
