#include "bitsys/precision.hpp"

#include <stdexcept>

namespace bitsys {

PrecisionMode PrecisionMode::make(int bits, Signedness s) {
  if (bits != 1 && bits != 2 && bits != 4 && bits != 8)
    throw std::invalid_argument("unsupported precision: bits must be 1, 2, 4 or 8");
  return PrecisionMode(static_cast<std::int8_t>(bits), s);
}

std::optional<PrecisionMode> PrecisionMode::parse(std::string_view token) {
  if (token.size() != 2) return std::nullopt;
  const int bits = token[0] - '0';
  if (bits != 1 && bits != 2 && bits != 4 && bits != 8) return std::nullopt;
  switch (token[1]) {
    case 'u':
      return make(bits, Signedness::Unsigned);
    case 's':
      return make(bits, Signedness::Signed);
    case 'b':
      if (bits != 1) return std::nullopt;
      return make(1, Signedness::Signed);
    default:
      return std::nullopt;
  }
}

const std::array<PrecisionMode, 8>& PrecisionMode::all() {
  static const std::array<PrecisionMode, 8> modes = {
      make(1, Signedness::Unsigned), make(1, Signedness::Signed),
      make(2, Signedness::Unsigned), make(2, Signedness::Signed),
      make(4, Signedness::Unsigned), make(4, Signedness::Signed),
      make(8, Signedness::Unsigned), make(8, Signedness::Signed)};
  return modes;
}

int PrecisionMode::min_value() const {
  if (bnn_xnor()) return -1;
  if (is_signed()) return -(1 << (bits_ - 1));
  return 0;
}

int PrecisionMode::max_value() const {
  if (bnn_xnor()) return 1;
  if (is_signed()) return (1 << (bits_ - 1)) - 1;
  return (1 << bits_) - 1;
}

bool PrecisionMode::in_range(int v) const {
  if (bnn_xnor()) return v == -1 || v == 1;
  return v >= min_value() && v <= max_value();
}

std::string PrecisionMode::name() const {
  std::string s(1, static_cast<char>('0' + bits_));
  s += bnn_xnor() ? 'b' : (is_signed() ? 's' : 'u');
  return s;
}

int PrecisionMode::index() const {
  const int lg = bits_ == 1 ? 0 : bits_ == 2 ? 1 : bits_ == 4 ? 2 : 3;
  return lg * 2 + (is_signed() ? 1 : 0);
}

}  // namespace bitsys
