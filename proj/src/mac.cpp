#include "bitsys/mac.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace bitsys {

std::array<std::int32_t, 16> converter_lane_weights(PrecisionMode mode) {
  std::array<std::int32_t, 16> w{};
  const int ow = mode.output_bits();
  for (int l = 0; l < 16; ++l) {
    const int r = l % ow;  // bit position inside the channel's field
    std::int32_t wt = 1 << r;
    if (mode.is_signed() && r == ow - 1) wt = -wt;
    w[l] = wt;
  }
  return w;
}

std::array<bool, 16> converter_neg_lanes(PrecisionMode mode) {
  std::array<bool, 16> n{};
  const int ow = mode.output_bits();
  for (int l = 0; l < 16; ++l) n[l] = mode.is_signed() && (l % ow == ow - 1);
  return n;
}

namespace {

const std::array<std::int32_t, 16>& weights_for(int mode_idx) {
  static const std::array<std::array<std::int32_t, 16>, 8> all = [] {
    std::array<std::array<std::int32_t, 16>, 8> t{};
    for (const auto m : PrecisionMode::all()) t[m.index()] = converter_lane_weights(m);
    return t;
  }();
  return all[mode_idx];
}

std::int32_t checked_add(std::int32_t acc, std::int64_t v) {
  const std::int64_t s = static_cast<std::int64_t>(acc) + v;
  if (s > std::numeric_limits<std::int32_t>::max() ||
      s < std::numeric_limits<std::int32_t>::min())
    throw std::overflow_error("accumulator overflow: " + std::to_string(s));
  return static_cast<std::int32_t>(s);
}

}  // namespace

std::int32_t convert_channels(std::uint16_t word, PrecisionMode mode) {
  const auto& w = weights_for(mode.index());
  std::int32_t s = 0;
  for (int l = 0; l < 16; ++l)
    if ((word >> l) & 1u) s += w[l];
  return s;
}

int activate(std::int64_t acc, std::span<const std::int32_t> thresholds) {
  int count = 0;
  for (const std::int32_t t : thresholds)
    if (t < acc) ++count;
  return count;
}

void validate_thresholds(std::span<const std::int32_t> thresholds) {
  for (std::size_t i = 1; i < thresholds.size(); ++i)
    if (thresholds[i] <= thresholds[i - 1])
      throw std::invalid_argument("thresholds must be strictly ascending");
}

void Mac::accumulate(std::uint16_t product) {
  acc_ = checked_add(acc_, convert_channels(product, mode_));
}

void CycleMac::step() {
  // accumulate stage latches the tree root from the previous cycle
  if (tree_[kTreeLayers - 1].valid) acc_ = checked_add(acc_, tree_[kTreeLayers - 1].node[0]);

  // fold one layer per cycle, widths 8 -> 4 -> 2 -> 1
  for (int s = kTreeLayers - 1; s >= 1; --s) {
    TreeStage next;
    next.valid = tree_[s - 1].valid;
    next.width = tree_[s - 1].width / 2;
    for (int n = 0; n < next.width; ++n)
      next.node[n] = tree_[s - 1].node[2 * n] + tree_[s - 1].node[2 * n + 1];
    tree_[s] = next;
  }

  // first layer applies the lane weights of the product's own mode
  TreeStage first;
  if (pending_) {
    const auto& w = weights_for(pending_->mode.index());
    first.valid = true;
    first.width = 8;
    for (int n = 0; n < 8; ++n) {
      const std::int32_t lo = ((pending_->word >> (2 * n)) & 1u) ? w[2 * n] : 0;
      const std::int32_t hi = ((pending_->word >> (2 * n + 1)) & 1u) ? w[2 * n + 1] : 0;
      first.node[n] = lo + hi;
    }
    pending_.reset();
  }
  tree_[0] = first;

  auto done = fabric_.step();
  if (!done.empty()) pending_ = done.front();
}

}  // namespace bitsys
