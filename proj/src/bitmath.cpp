#include "bitsys/bitmath.hpp"

#include <stdexcept>
#include <string>

namespace bitsys {

int grid_region(int i, int j) {
  if (i == j) return 1;
  if (i / 2 == j / 2) return 2;
  if (i / 4 == j / 4) return 3;
  return 4;
}

MaskPattern mask_pattern(PrecisionMode mode) {
  MaskPattern m;
  const int b = mode.bits();
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) m.active[i][j] = (i / b == j / b);
  return m;
}

SignActionGrid sign_actions(PrecisionMode mode) {
  SignActionGrid g;
  const int b = mode.bits();
  const MaskPattern mask = mask_pattern(mode);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      if (!mask.active[i][j]) {
        g.action[i][j] = SignKind::Inactive;
        continue;
      }
      if (mode.bnn_xnor()) {
        g.action[i][j] = SignKind::Bipolar;  // only i == j is active here
        continue;
      }
      if (!mode.is_signed()) {
        g.action[i][j] = SignKind::Add;
        continue;
      }
      const int s = (i / b) * b + b - 1;  // sign-bit index of this block
      const bool si = (i == s), sj = (j == s);
      g.action[i][j] = (si != sj) ? SignKind::Subtract : SignKind::Add;
    }
  }
  return g;
}

namespace {

unsigned encode_field(int v, PrecisionMode mode, int channel) {
  if (!mode.in_range(v))
    throw std::out_of_range("value " + std::to_string(v) + " out of range for mode " +
                            mode.name() + " in channel " + std::to_string(channel));
  if (mode.bnn_xnor()) return v > 0 ? 1u : 0u;
  return static_cast<unsigned>(v) & ((1u << mode.bits()) - 1u);
}

}  // namespace

int decode_operand_field(unsigned field, PrecisionMode mode) {
  if (mode.bnn_xnor()) return field ? 1 : -1;
  if (mode.is_signed() && (field >> (mode.bits() - 1)))
    return static_cast<int>(field) - (1 << mode.bits());
  return static_cast<int>(field);
}

int decode_product_field(unsigned field, PrecisionMode mode) {
  const int w = mode.output_bits();
  if (mode.is_signed() && (field >> (w - 1))) return static_cast<int>(field) - (1 << w);
  return static_cast<int>(field);
}

std::uint8_t pack(const ChannelValues& values, PrecisionMode mode) {
  if (static_cast<int>(values.size()) != mode.channels())
    throw std::invalid_argument("expected " + std::to_string(mode.channels()) +
                                " channel values, got " + std::to_string(values.size()));
  unsigned word = 0;
  for (int c = 0; c < mode.channels(); ++c)
    word |= encode_field(values[c], mode, c) << (c * mode.bits());
  return static_cast<std::uint8_t>(word);
}

ChannelValues unpack(std::uint8_t word, PrecisionMode mode) {
  ChannelValues v(mode.channels());
  const unsigned m = (1u << mode.bits()) - 1u;
  for (int c = 0; c < mode.channels(); ++c)
    v[c] = decode_operand_field((word >> (c * mode.bits())) & m, mode);
  return v;
}

ChannelValues unpack_product(std::uint16_t word, PrecisionMode mode) {
  ChannelValues v(mode.channels());
  const int w = mode.output_bits();
  const unsigned m = (1u << w) - 1u;
  for (int c = 0; c < mode.channels(); ++c)
    v[c] = decode_product_field((word >> (c * w)) & m, mode);
  return v;
}

SubPartialGrid sub_partial_grid(std::uint8_t a, std::uint8_t b, PrecisionMode mode) {
  SubPartialGrid g{{}, sign_actions(mode), mode};
  for (int i = 0; i < 8; ++i) {
    const unsigned ai = (a >> i) & 1u;
    for (int j = 0; j < 8; ++j) {
      if (g.actions.action[i][j] == SignKind::Inactive) continue;
      const unsigned bj = (b >> j) & 1u;
      const bool xnor = mode.bnn_xnor() && i == j;
      g.cell[i][j] = static_cast<std::uint8_t>(xnor ? (ai == bj) : (ai & bj));
    }
  }
  return g;
}

PartialProducts partial_products(const SubPartialGrid& grid) {
  PartialProducts p{};
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      const int k = i + j;
      switch (grid.actions.action[i][j]) {
        case SignKind::Add:
          p.p[k] += grid.cell[i][j];
          break;
        case SignKind::Subtract:
          p.p[k] -= grid.cell[i][j];
          break;
        case SignKind::Bipolar:
          p.p[k] += 2 * grid.cell[i][j] - 1;
          break;
        case SignKind::Inactive:
          break;
      }
    }
  }
  return p;
}

std::array<bool, 7> carry_cutter_enables(PrecisionMode mode) {
  std::array<bool, 7> e{};
  const int w = mode.output_bits();
  for (int i = 0; i < 7; ++i) {
    const int k = kCarryCutterPositions[i];
    e[i] = ((k + 1) % w) == 0;
  }
  return e;
}

std::uint16_t assemble_product(const PartialProducts& p, PrecisionMode mode) {
  const auto cutters = carry_cutter_enables(mode);
  std::uint32_t sum = 0;
  int ci = 0;
  for (int k = 0; k < 15; ++k) {
    sum += static_cast<std::uint32_t>(p.p[k]) << k;  // two's complement wrap
    if (ci < 7 && kCarryCutterPositions[ci] == k) {
      if (cutters[ci]) sum &= (1u << (k + 1)) - 1u;
      ++ci;
    }
  }
  return static_cast<std::uint16_t>(sum & 0xFFFFu);
}

std::uint16_t multiply(std::uint8_t a, std::uint8_t b, PrecisionMode mode,
                       std::uint8_t channel_valid_mask) {
  SubPartialGrid grid = sub_partial_grid(a, b, mode);
  if (channel_valid_mask != kAllChannelsValid) {
    for (int i = 0; i < 8; ++i) {
      if ((channel_valid_mask >> (i / mode.bits())) & 1u) continue;
      for (int j = 0; j < 8; ++j) grid.actions.action[i][j] = SignKind::Inactive;
    }
  }
  return assemble_product(partial_products(grid), mode);
}

}  // namespace bitsys
