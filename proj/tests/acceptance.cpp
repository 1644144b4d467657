// Acceptance gate: one line per criterion, exit code = number of failures.
// Each check pins the contract it guards with exact integer tolerances.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <future>
#include <sstream>
#include <string>
#include <vector>

#include "bitsys/accel.hpp"
#include "bitsys/bitmath.hpp"
#include "bitsys/fabric.hpp"
#include "bitsys/mac.hpp"
#include "bitsys/precision.hpp"
#include "bitsys/refnet.hpp"
#include "support/oracle.hpp"

using namespace bitsys;
using testsupport::ref_product_word;
using testsupport::XorShift;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt_time(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1fs", s);
  return buf;
}

// --- 1: functional model vs native integer oracle, exhaustive ------------

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto m : PrecisionMode::all()) {
    for (std::uint32_t a = 0; a < 256; ++a)
      for (std::uint32_t b = 0; b < 256; ++b) {
        const auto ua = static_cast<std::uint8_t>(a);
        const auto ub = static_cast<std::uint8_t>(b);
        if (multiply(ua, ub, m) != ref_product_word(ua, ub, m))
          return {false, "mismatch at mode " + m.name() + " a=" +
                             std::to_string(a) + " b=" + std::to_string(b)};
      }
  }
  const double dt = seconds_since(t0);
  if (dt >= 10.0) return {false, "exceeded 10s budget: " + fmt_time(dt)};
  return {true, "8 modes x 65536 pairs bit-exact, " + fmt_time(dt)};
}

// --- 2: cycle model vs functional model, exhaustive, sharded -------------

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  auto sweep = [](PrecisionMode m) -> std::uint32_t {
    Fabric f(m);
    std::uint32_t next = 0, ok = 0;
    while (ok < 65536) {
      if (next < 65536 &&
          f.offer_input(static_cast<std::uint8_t>(next >> 8),
                        static_cast<std::uint8_t>(next & 0xFF)))
        ++next;
      for (const Completion& c : f.step()) {
        if (c.word != multiply(c.a, c.b, m)) return ok;
        ++ok;
      }
    }
    return ok;
  };
  std::vector<std::future<std::uint32_t>> shards;
  for (const auto m : PrecisionMode::all())
    shards.push_back(std::async(std::launch::async, sweep, m));
  for (std::size_t i = 0; i < shards.size(); ++i) {
    const std::uint32_t ok = shards[i].get();
    if (ok != 65536)
      return {false, "mode " + PrecisionMode::all()[i].name() +
                         " diverged after " + std::to_string(ok) + " pairs"};
  }
  const double dt = seconds_since(t0);
  if (dt >= 300.0) return {false, "exceeded 5min budget: " + fmt_time(dt)};
  return {true, "fabric == functional on 8 x 65536 pairs, " + fmt_time(dt)};
}

// --- 3: latency and throughput contracts ---------------------------------

Outcome criterion3() {
  XorShift rng(0x1a7e);
  constexpr int kPerMode = 1000;
  for (const auto m : PrecisionMode::all()) {
    // multiplier: accept -> complete in exactly 22, one result per cycle
    Fabric f(m);
    int offered = 0, done = 0;
    std::uint64_t first_accept = 0, last_complete = 0;
    while (done < kPerMode) {
      if (offered < kPerMode) {
        const auto a = static_cast<std::uint8_t>(rng.next32() & 0xFF);
        const auto b = static_cast<std::uint8_t>(rng.next32() & 0xFF);
        if (f.offer_input(a, b)) {
          if (offered == 0) first_accept = f.cycle();
          ++offered;
        }
      }
      for (const Completion& c : f.step()) {
        if (c.cycle - c.accept_cycle != Fabric::kLatency)
          return {false, "multiplier latency " +
                             std::to_string(c.cycle - c.accept_cycle) +
                             " in mode " + m.name()};
        last_complete = c.cycle;
        ++done;
      }
    }
    if (last_complete - first_accept != kPerMode + Fabric::kLatency - 1)
      return {false, "throughput law broken in mode " + m.name() + ": " +
                         std::to_string(last_complete - first_accept) +
                         " != N+21 cycles"};

    // MAC: every input becomes visible in the accumulator at accept + 27
    CycleMac mac(m);
    std::deque<std::pair<std::uint64_t, std::int32_t>> due;  // (cycle, delta)
    std::int32_t expect = 0;
    int accepted = 0;
    while (accepted < kPerMode || !due.empty()) {
      if (accepted < kPerMode) {
        const auto a = static_cast<std::uint8_t>(rng.next32() & 0xFF);
        const auto b = static_cast<std::uint8_t>(rng.next32() & 0xFF);
        if (mac.offer_input(a, b)) {
          due.emplace_back(mac.cycle() + CycleMac::kLatency,
                           convert_channels(multiply(a, b, m), m));
          ++accepted;
        }
      }
      mac.step();
      while (!due.empty() && due.front().first == mac.cycle()) {
        expect += due.front().second;
        due.pop_front();
      }
      if (mac.accumulator() != expect)
        return {false, "MAC visibility off in mode " + m.name() + " at cycle " +
                           std::to_string(mac.cycle())};
    }
  }
  return {true, "22-cycle multiply, 27-cycle MAC, N+21 throughput; 1000 "
                "inputs per mode"};
}

// --- 4: reconfiguration window --------------------------------------------

Outcome criterion4() {
  // window length and rejection at the fabric
  const auto modes = PrecisionMode::all();
  for (std::size_t i = 0; i < modes.size(); ++i) {
    Fabric f(modes[i]);
    f.step();
    f.configure(modes[(i + 3) % modes.size()]);
    int rejected = 0;
    while (!f.offer_input(0x5A, 0xA5)) {
      ++rejected;
      f.step();
      if (rejected > 10) return {false, "window never closed"};
    }
    if (rejected != Fabric::kReconfigCycles)
      return {false, "window was " + std::to_string(rejected) + " cycles"};
    if (f.mode() != modes[(i + 3) % modes.size()])
      return {false, "mode not committed after the window"};
  }

  // charged windows equal the number of layer-mode changes
  const std::vector<PrecisionMode> layer_modes{
      *PrecisionMode::parse("1b"), *PrecisionMode::parse("2s"),
      *PrecisionMode::parse("2s"), *PrecisionMode::parse("8s")};
  const ModelDescriptor m =
      generate_random_model({32, 16, 16, 16, 4}, layer_modes, 7);
  std::vector<int> x(32);
  XorShift rng(4);
  for (auto& v : x) v = (rng.next32() & 1) ? 1 : -1;
  int changes = 0;
  for (std::size_t l = 1; l < layer_modes.size(); ++l)
    if (!(layer_modes[l] == layer_modes[l - 1])) ++changes;
  for (const Topology t : {Topology::SingleLayer, Topology::Systolic}) {
    const NetworkRun run = run_network(t, m, x);
    int charged = 0;
    for (const auto& lc : run.report.layers) {
      if (lc.reconfig_cycles == 0) continue;
      if (lc.reconfig_cycles != Fabric::kReconfigCycles)
        return {false, "a switch cost " + std::to_string(lc.reconfig_cycles)};
      ++charged;
    }
    if (charged != changes)
      return {false, std::to_string(charged) + " windows for " +
                         std::to_string(changes) + " mode changes"};
  }
  return {true, "3-cycle window, offers rejected inside it, windows == mode "
                "changes"};
}

// --- 5: carry-cutter enables ----------------------------------------------

Outcome criterion5() {
  auto expect_for = [](int bits) {
    std::array<bool, 7> e{};
    for (int i = 0; i < 7; ++i) {
      const int k = 2 * i + 1;
      if (bits == 1) e[i] = true;
      else if (bits == 2) e[i] = (k == 3 || k == 7 || k == 11);
      else if (bits == 4) e[i] = (k == 7);
      else e[i] = false;
    }
    return e;
  };
  for (const auto m : PrecisionMode::all()) {
    Fabric f(m);
    if (f.carry_cutter_enables() != expect_for(m.bits()) ||
        carry_cutter_enables(m) != expect_for(m.bits()))
      return {false, "enable set wrong in mode " + m.name()};
  }
  return {true, "1-bit: all 7; 2-bit: after D3,D7,D11; 4-bit: after D7; "
                "8-bit: none"};
}

// --- 6: converter -----------------------------------------------------------

Outcome criterion6() {
  auto ref_convert = [](std::uint16_t word, PrecisionMode m) {
    std::int32_t sum = 0;
    for (int k = 0; k < m.channels(); ++k)
      sum += testsupport::ref_decode_product(word, k, m);
    return sum;
  };
  for (const char* tok : {"2u", "2s", "4u", "4s"}) {
    const PrecisionMode m = *PrecisionMode::parse(tok);
    for (std::uint32_t w = 0; w < 65536; ++w)
      if (convert_channels(static_cast<std::uint16_t>(w), m) !=
          ref_convert(static_cast<std::uint16_t>(w), m))
        return {false, "word " + std::to_string(w) + " in mode " + m.name()};
  }
  XorShift rng(0xc0de);
  for (const char* tok : {"8u", "8s", "1u", "1b"}) {
    const PrecisionMode m = *PrecisionMode::parse(tok);
    for (int i = 0; i < 1000000; ++i) {
      const auto w = static_cast<std::uint16_t>(rng.next32() & 0xFFFF);
      if (convert_channels(w, m) != ref_convert(w, m))
        return {false, "word " + std::to_string(w) + " in mode " + m.name()};
    }
  }
  return {true, "exhaustive 2/4-bit words, 1e6 random 8/1-bit words"};
}

// --- 7: multi-threshold activation -----------------------------------------

Outcome criterion7() {
  XorShift rng(0x7ac7);
  const int sizes[] = {1, 3, 15, 255};
  for (int trial = 0; trial < 100000; ++trial) {
    const int count = sizes[rng.next32() % 4];
    std::vector<std::int32_t> t(count);
    std::int32_t v = static_cast<std::int32_t>(rng.range(-1000, 1000));
    for (int i = 0; i < count; ++i) {
      t[i] = v;
      v += 1 + static_cast<std::int32_t>(rng.range(0, 9));
    }
    const std::int64_t acc = rng.range(-4000, 4000);
    const int want =
        static_cast<int>(std::lower_bound(t.begin(), t.end(), acc) - t.begin());
    if (activate(acc, t) != want)
      return {false, "count mismatch at trial " + std::to_string(trial)};
    if (trial % 100 == 0) {
      // exact ties: a threshold is not "strictly below" itself
      for (int i = 0; i < count; ++i) {
        if (activate(t[i], t) != i)
          return {false, "tie at threshold " + std::to_string(i) + " leaked"};
        if (activate(static_cast<std::int64_t>(t[i]) + 1, t) != i + 1)
          return {false, "off-by-one above threshold " + std::to_string(i)};
      }
    }
  }
  return {true, "1e5 random (acc, T), |T| in {1,3,15,255}, ties stay low"};
}

// --- 8: end-to-end inference equivalence -----------------------------------

Outcome criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<PrecisionMode> layer_modes{
      *PrecisionMode::parse("1b"), *PrecisionMode::parse("2s"),
      *PrecisionMode::parse("4s"), *PrecisionMode::parse("8s")};
  const ModelDescriptor m =
      generate_random_model({784, 64, 64, 64, 10}, layer_modes, 20260815);
  XorShift rng(0x8e2e);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<int> x(784);
    for (auto& v : x) v = (rng.next32() & 1) ? 1 : -1;
    const std::vector<std::int64_t> want = reference_network(m, x);
    for (const Topology t : {Topology::SingleLayer, Topology::Systolic}) {
      const NetworkRun run = run_network(t, m, x);
      if (run.logits != want)
        return {false, topology_name(t) + " diverged on input " +
                           std::to_string(rep)};
    }
  }
  const double dt = seconds_since(t0);
  if (dt >= 60.0) return {false, "exceeded 1min budget: " + fmt_time(dt)};
  return {true, "784-64-64-64-10 at (1,2,4,8) bits, 100 inputs, both "
                "layouts bit-exact, " + fmt_time(dt)};
}

// --- 9: precision scaling of multiplier work --------------------------------

Outcome criterion9() {
  // identical shape, one layer per width; busy cycles scale as bits/8
  std::int64_t busy[9] = {};
  for (const int bits : {1, 2, 4, 8}) {
    LayerConfig L;
    L.in_features = 128;
    L.out_features = 8;
    L.mode = PrecisionMode::make(bits, Signedness::Unsigned);
    L.weights.assign(8, std::vector<std::int32_t>(128, 1));
    const LayerRun run =
        run_layer(Topology::SingleLayer, L, std::vector<int>(128, 1));
    busy[bits] = run.cycles.mult_busy_cycles;
  }
  for (const int bits : {1, 2, 4})
    if (busy[bits] * 8 != busy[8] * bits)
      return {false, "busy(" + std::to_string(bits) + ")=" +
                         std::to_string(busy[bits]) + " is not bits/8 of " +
                         std::to_string(busy[8])};

  // a mixed-precision model needs fewer compute cycles than uniform 8-bit
  const ModelDescriptor mixed = generate_random_model(
      {784, 64, 64, 64, 10},
      {*PrecisionMode::parse("1b"), *PrecisionMode::parse("2s"),
       *PrecisionMode::parse("4s"), *PrecisionMode::parse("8s")},
      5);
  const ModelDescriptor wide = generate_random_model(
      {784, 64, 64, 64, 10},
      {*PrecisionMode::parse("8s"), *PrecisionMode::parse("8s"),
       *PrecisionMode::parse("8s"), *PrecisionMode::parse("8s")},
      5);
  for (const Topology t : {Topology::SingleLayer, Topology::Systolic}) {
    const CycleReport rm = predict_cycles(t, mixed);
    const CycleReport rw = predict_cycles(t, wide);
    if (rm.total_compute() >= rw.total_compute())
      return {false, std::string("no compute win under ") + topology_name(t)};
    if (rm.total_busy() >= rw.total_busy())
      return {false, std::string("no busy win under ") + topology_name(t)};
  }
  return {true, "busy cycles scale exactly bits/8 on fixed shapes; mixed < "
                "uniform 8-bit"};
}

// --- 10: out-of-scope figures ------------------------------------------------

Outcome criterion10() {
  return {true, "trained-model accuracy and synthesis resource figures are "
                "out of scope here; arithmetic, timing and scaling behavior "
                "are covered by criteria 1-9"};
}

}  // namespace

int main() {
  Outcome (*checks[])() = {criterion1, criterion2, criterion3, criterion4,
                           criterion5, criterion6, criterion7, criterion8,
                           criterion9, criterion10};
  int failures = 0;
  for (std::size_t i = 0; i < std::size(checks); ++i) {
    const Outcome o = checks[i]();
    std::printf("criterion %zu: %s  %s\n", i + 1, o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures;
}
