#include "bitsys/fabric.hpp"

#include <cstdio>
#include <ostream>

namespace bitsys {

int pe_index(bool a, bool b, bool valid_a, bool valid_b, bool pattern, bool enable) {
  return (a ? 1 : 0) | (b ? 2 : 0) | (valid_a ? 4 : 0) | (valid_b ? 8 : 0) |
         (pattern ? 16 : 0) | (enable ? 32 : 0);
}

std::array<std::uint8_t, 64> pe_truth_table(PEType type) {
  std::array<std::uint8_t, 64> t{};
  for (int idx = 0; idx < 64; ++idx) {
    const bool a = idx & 1, b = idx & 2, va = idx & 4, vb = idx & 8;
    const bool pat = idx & 16, en = idx & 32;
    bool out = false;
    if (en) out = (type == PEType::I) ? (pat ? (a == b) : (a && b)) : (pat && a && b);
    const bool vout = en && va && vb;
    t[idx] = static_cast<std::uint8_t>((out ? 1 : 0) | (vout ? 2 : 0));
  }
  return t;
}

namespace {

struct ModeTables {
  std::array<std::uint8_t, 8> mask_rows{};  // bit j of row i: cell active
  std::array<std::array<SignKind, 8>, 8> action{};
  std::array<bool, 7> cutters{};
  bool bnn = false;
};

const ModeTables& tables_for(int mode_idx) {
  static const std::array<ModeTables, 8> tables = [] {
    std::array<ModeTables, 8> t{};
    for (const auto m : PrecisionMode::all()) {
      ModeTables& mt = t[m.index()];
      const auto mask = mask_pattern(m);
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
          if (mask.active[i][j]) mt.mask_rows[i] |= static_cast<std::uint8_t>(1u << j);
      mt.action = sign_actions(m).action;
      mt.cutters = carry_cutter_enables(m);
      mt.bnn = m.bnn_xnor();
    }
    return t;
  }();
  return tables[mode_idx];
}

void trace_line(std::ostream& os, std::uint64_t cycle, const char* event,
                std::uint8_t a, std::uint8_t b, const std::uint16_t* out) {
  char buf[96];
  if (out)
    std::snprintf(buf, sizeof buf, "cycle=%llu event=%s a=0x%02X b=0x%02X out=0x%04X",
                  static_cast<unsigned long long>(cycle), event, a, b, *out);
  else
    std::snprintf(buf, sizeof buf, "cycle=%llu event=%s a=0x%02X b=0x%02X",
                  static_cast<unsigned long long>(cycle), event, a, b);
  os << buf << '\n';
}

}  // namespace

void InputLoader::step(std::optional<std::uint8_t> operand) {
  for (int r = 0; r + 1 < 8; ++r) {
    fifo_[r] = fifo_[r + 1];
    valid_[r] = valid_[r + 1];
  }
  fifo_[7] = 0;
  valid_[7] = 0;
  if (operand) {
    // diagonal write: bit i lands i registers below the output
    for (int i = 0; i < 8; ++i) {
      const std::uint8_t bit = static_cast<std::uint8_t>((*operand >> i) & 1u);
      fifo_[i] = static_cast<std::uint8_t>((fifo_[i] & ~(1u << i)) | (bit << i));
      valid_[i] |= static_cast<std::uint8_t>(1u << i);
    }
  }
}

Fabric::Fabric(PrecisionMode mode) : mode_(mode), pending_mode_(mode) {}

void Fabric::configure(PrecisionMode mode) {
  pending_mode_ = mode;
  reconfig_remaining_ = kReconfigCycles;
}

std::array<bool, 7> Fabric::carry_cutter_enables() const {
  return bitsys::carry_cutter_enables(mode_);
}

bool Fabric::offer_input(std::uint8_t a, std::uint8_t b) {
  if (reconfig_remaining_ > 0 || pending_input_) return false;
  pending_input_ = std::make_pair(a, b);
  const std::uint64_t base = cycle_ + 1;  // wavefront head enters the grid then
  ring_[base % ring_.size()] =
      Slot{true, base, a, b, static_cast<std::uint8_t>(mode_.index())};
  if (trace_) trace_line(*trace_, cycle_, "accept", a, b, nullptr);
  return true;
}

const Fabric::Slot* Fabric::slot_at(std::uint64_t cycle, int age) const {
  if (cycle < static_cast<std::uint64_t>(age)) return nullptr;
  const std::uint64_t base = cycle - static_cast<std::uint64_t>(age);
  const Slot& s = ring_[base % ring_.size()];
  return (s.has && s.base == base) ? &s : nullptr;
}

std::vector<Completion> Fabric::step() {
  ++cycle_;
  if (reconfig_remaining_ > 0 && --reconfig_remaining_ == 0) mode_ = pending_mode_;

  // loaders take the pair accepted last cycle
  std::optional<std::uint8_t> na, nb;
  if (pending_input_) {
    na = pending_input_->first;
    nb = pending_input_->second;
    pending_input_.reset();
  }
  loader_a_.step(na);
  loader_b_.step(nb);

  // grid registers shift; fresh edge bits come off the loader lanes
  for (int i = 0; i < 8; ++i) {
    for (int j = 7; j >= 1; --j) {
      ga_[i][j] = ga_[i][j - 1];
      gva_[i][j] = gva_[i][j - 1];
    }
    ga_[i][0] = loader_a_.lane(i);
    gva_[i][0] = loader_a_.lane_valid(i);
  }
  for (int j = 0; j < 8; ++j) {
    for (int i = 7; i >= 1; --i) {
      gb_[i][j] = gb_[i - 1][j];
      gvb_[i][j] = gvb_[i - 1][j];
    }
    gb_[0][j] = loader_b_.lane(j);
    gvb_[0][j] = loader_b_.lane_valid(j);
  }

  // every element evaluates its truth table on the current registers.
  // The enable input is tied high; the pattern line carries the mode:
  // XNOR/AND select on the diagonal, active/zero select elsewhere, so
  // cells outside the configured block diagonal output constant 0.
  static const auto table_i = pe_truth_table(PEType::I);
  static const auto table_ii = pe_truth_table(PEType::II);
  const int current_idx = mode_.index();
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      const Slot* m = slot_at(cycle_, i + j);
      const ModeTables& mt = tables_for(m ? m->mode_idx : current_idx);
      const bool pattern =
          (i == j) ? mt.bnn : (((mt.mask_rows[i] >> j) & 1u) != 0);
      const auto& table = (i == j) ? table_i : table_ii;
      const std::uint8_t r = table[pe_index(ga_[i][j], gb_[i][j], gva_[i][j],
                                            gvb_[i][j], pattern, true)];
      pe_out_[i][j] = r & 1u;
      pe_valid_[i][j] = (r >> 1) & 1u;
    }
  }

  // anti-diagonal adders: signed sum of valid cells, one P_k per diagonal.
  // A diagonal is occupied exactly when the wavefront of some in-flight
  // pair sits on it, which the slot ring knows by age.
  std::array<int, 15> diag{};
  std::array<bool, 15> dvalid{};
  for (int k = 0; k < 15; ++k) {
    const Slot* m = slot_at(cycle_, k);
    if (!m) continue;
    const ModeTables& mt = tables_for(m->mode_idx);
    int acc = 0;
    const int ilo = k < 8 ? 0 : k - 7;
    const int ihi = k < 8 ? k : 7;
    for (int i = ilo; i <= ihi; ++i) {
      const int j = k - i;
      if (!pe_valid_[i][j]) continue;
      switch (mt.action[i][j]) {
        case SignKind::Add:
          acc += pe_out_[i][j];
          break;
        case SignKind::Subtract:
          acc -= pe_out_[i][j];
          break;
        case SignKind::Bipolar:
          acc += 2 * pe_out_[i][j] - 1;
          break;
        case SignKind::Inactive:
          break;
      }
    }
    diag[k] = acc;
    dvalid[k] = true;
  }

  // output delay line picks up last cycle's stage 14 before it is rewritten
  std::vector<Completion> done;
  for (int t = kTailDepth - 1; t >= 1; --t) tail_[t] = tail_[t - 1];
  tail_[0] = Tail{stages_[14].valid,
                  static_cast<std::uint16_t>(stages_[14].sum & 0xFFFFu)};
  if (tail_[kTailDepth - 1].valid) {
    const int age = 15 + kTailDepth - 1;
    const Slot* m = slot_at(cycle_, age);
    if (m) {
      Completion c{tail_[kTailDepth - 1].word, m->a, m->b,
                   PrecisionMode::all()[m->mode_idx], m->base - 1, cycle_};
      if (trace_) trace_line(*trace_, cycle_, "complete", c.a, c.b, &c.word);
      done.push_back(c);
    }
  }

  // shift-add pipeline, stage k folds D_k at weight 2^k
  for (int k = 14; k >= 0; --k) {
    if (!dvalid[k]) {
      stages_[k] = Stage{};
      continue;
    }
    Stage next;
    next.valid = true;
    next.sum = (k == 0 ? 0u : stages_[k - 1].sum) +
               (static_cast<std::uint32_t>(diag[k]) << k);
    if (k % 2 == 1) {
      const Slot* m = slot_at(cycle_, k);
      const ModeTables& mt = tables_for(m ? m->mode_idx : current_idx);
      if (mt.cutters[(k - 1) / 2]) next.sum &= (1u << (k + 1)) - 1u;
    }
    stages_[k] = next;
  }

  return done;
}

}  // namespace bitsys
