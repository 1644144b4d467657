#include "bitsys/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bitsys/accel.hpp"
#include "bitsys/bitmath.hpp"
#include "bitsys/fabric.hpp"
#include "bitsys/mac.hpp"
#include "bitsys/precision.hpp"
#include "bitsys/refnet.hpp"

namespace bitsys {
namespace {

std::string hex_word(std::uint16_t w) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%04X", w);
  return buf;
}

std::string hex_byte(std::uint8_t b) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%02X", b);
  return buf;
}

bool parse_operand(const std::string& s, std::uint8_t& value) {
  try {
    std::size_t used = 0;
    const unsigned long v = std::stoul(s, &used, 0);
    if (used != s.size() || v > 0xFF) return false;
    value = static_cast<std::uint8_t>(v);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

// Plain-arithmetic product word: decode each channel, multiply natively,
// re-encode into the doubled field. Independent of the model under test.
std::uint16_t native_product_word(std::uint8_t a, std::uint8_t b, PrecisionMode m) {
  const int bits = m.bits();
  const unsigned f = (1u << bits) - 1u;
  const unsigned pf = (1u << (2 * bits)) - 1u;
  std::uint16_t word = 0;
  for (int k = 0; k < m.channels(); ++k) {
    const unsigned fa = (a >> (k * bits)) & f;
    const unsigned fb = (b >> (k * bits)) & f;
    int xa, xb;
    if (m.bnn_xnor()) {
      xa = fa ? 1 : -1;
      xb = fb ? 1 : -1;
    } else if (m.is_signed()) {
      xa = static_cast<int>(fa) - static_cast<int>((fa >> (bits - 1)) << bits);
      xb = static_cast<int>(fb) - static_cast<int>((fb >> (bits - 1)) << bits);
    } else {
      xa = static_cast<int>(fa);
      xb = static_cast<int>(fb);
    }
    word |= static_cast<std::uint16_t>((static_cast<unsigned>(xa * xb) & pf)
                                       << (k * 2 * bits));
  }
  return word;
}

// signedness: 0 unsigned, 1 signed, 2 bipolar (1-bit only)
int run_mul(const std::string& a_str, const std::string& b_str, int bits,
            int signedness, bool trace, std::ostream& out, std::ostream& err) {
  if (bits != 1 && bits != 2 && bits != 4 && bits != 8) {
    err << "error: --bits must be 1, 2, 4 or 8\n";
    return 2;
  }
  if (signedness == 2 && bits != 1) {
    err << "error: --bnn needs --bits 1\n";
    return 2;
  }
  if (signedness == 1 && bits == 1) signedness = 2;  // 1-bit signed is bipolar
  const PrecisionMode mode = PrecisionMode::make(
      bits, signedness ? Signedness::Signed : Signedness::Unsigned);
  std::uint8_t a = 0, b = 0;
  if (!parse_operand(a_str, a) || !parse_operand(b_str, b)) {
    err << "error: operands must be integers in [0, 255]\n";
    return 2;
  }

  const std::uint16_t word = multiply(a, b, mode);

  out << "a=" << hex_byte(a) << " b=" << hex_byte(b) << " mode=" << mode.name()
      << "\n";
  const ChannelValues xa = unpack(a, mode);
  const ChannelValues xb = unpack(b, mode);
  const ChannelValues prod = unpack_product(word, mode);
  for (int k = 0; k < mode.channels(); ++k)
    out << "ch" << k << ": " << xa[k] << " * " << xb[k] << " = " << prod[k] << "\n";

  if (trace) {
    Fabric fabric(mode);
    fabric.set_trace(&out);
    if (!fabric.offer_input(a, b)) {
      err << "error: fabric rejected input\n";
      return 1;
    }
    std::uint16_t got = 0;
    bool done = false;
    for (int i = 0; i < Fabric::kLatency + 2 && !done; ++i)
      for (const Completion& c : fabric.step()) {
        got = c.word;
        done = true;
      }
    if (!done || got != word) {
      err << "error: cycle model disagrees with functional result\n";
      return 1;
    }
  }

  out << "out=" << hex_word(word);
  for (int k = 0; k < mode.channels(); ++k) out << " ch" << k << "=" << prod[k];
  out << "\n";
  return 0;
}

int run_verify(const std::vector<std::string>& mode_strs, bool modes_given,
               bool exhaustive, bool fabric, unsigned samples,
               std::uint64_t seed, std::ostream& out, std::ostream& err) {
  std::vector<PrecisionMode> modes;
  if (!modes_given) {
    for (const auto& m : PrecisionMode::all()) modes.push_back(m);
  } else {
    for (const auto& s : mode_strs) {
      const auto m = PrecisionMode::parse(s);
      if (!m) {
        err << "error: unknown mode '" << s << "'\n";
        return 2;
      }
      modes.push_back(*m);
    }
    if (modes.empty()) {
      err << "error: empty mode list\n";
      return 2;
    }
  }

  std::mt19937_64 rng(seed);
  auto next_pair = [&rng, exhaustive](std::uint32_t i) {
    if (exhaustive)
      return std::pair<std::uint8_t, std::uint8_t>(
          static_cast<std::uint8_t>(i >> 8), static_cast<std::uint8_t>(i & 0xFF));
    const std::uint64_t r = rng();
    return std::pair<std::uint8_t, std::uint8_t>(
        static_cast<std::uint8_t>(r & 0xFF), static_cast<std::uint8_t>(r >> 8 & 0xFF));
  };
  const std::uint32_t cases = exhaustive ? 65536 : samples;

  for (const PrecisionMode m : modes) {
    for (std::uint32_t i = 0; i < cases; ++i) {
      const auto [a, b] = next_pair(i);
      const std::uint16_t want = native_product_word(a, b, m);
      const std::uint16_t got = multiply(a, b, m);
      if (got != want) {
        err << "mismatch mode=" << m.name() << " a=" << hex_byte(a)
            << " b=" << hex_byte(b) << " got=" << hex_word(got)
            << " want=" << hex_word(want) << "\n";
        return 1;
      }
    }
    out << "mode=" << m.name() << " " << cases << "/" << cases << " ok\n";
  }

  if (fabric) {
    for (const PrecisionMode m : modes) {
      Fabric f(m);
      std::uint32_t completed = 0;
      std::uint32_t offered = 0;
      while (completed < cases) {
        if (offered < cases) {
          const auto [a, b] = next_pair(offered);
          if (f.offer_input(a, b)) ++offered;
        }
        for (const Completion& c : f.step()) {
          ++completed;
          if (c.cycle - c.accept_cycle != Fabric::kLatency) {
            err << "latency mismatch mode=" << m.name() << " got "
                << (c.cycle - c.accept_cycle) << "\n";
            return 1;
          }
          if (c.word != multiply(c.a, c.b, m)) {
            err << "mismatch mode=" << m.name() << " a=" << hex_byte(c.a)
                << " b=" << hex_byte(c.b) << " got=" << hex_word(c.word) << "\n";
            return 1;
          }
        }
      }
      out << "mode=" << m.name() << " latency=" << Fabric::kLatency << " ok\n";
    }
  }
  return 0;
}

int run_infer(const std::string& model_path, const std::string& input_path,
              const std::string& topo_str, const std::string& report_path,
              bool oracle_check, std::ostream& out, std::ostream& err) {
  const auto topo = parse_topology(topo_str);
  if (!topo) {
    err << "error: unknown topology '" << topo_str << "'\n";
    return 2;
  }
  try {
    const ModelDescriptor model = load_model(model_path);
    const std::vector<int> input = load_input_vector(input_path);
    validate_input(model, input);

    const NetworkRun run = run_network(*topo, model, input);

    for (std::size_t i = 0; i < run.logits.size(); ++i)
      out << "acc" << i << "=" << run.logits[i] << "\n";
    out << "argmax=" << run.argmax << "\n";

    if (!report_path.empty()) {
      std::ofstream f(report_path);
      if (!f) {
        err << "error: cannot open " << report_path << "\n";
        return 2;
      }
      f << run.report.to_csv();
    }

    if (oracle_check) {
      const bool exact = run.logits == reference_network(model, input);
      out << "bit-exact: " << (exact ? "true" : "false") << "\n";
      if (!exact) return 1;
    }
    return 0;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

int run_cycles(const std::string& model_path, const std::string& topo_str,
               const std::string& out_path, std::ostream& out, std::ostream& err) {
  const auto topo = parse_topology(topo_str);
  if (!topo) {
    err << "error: unknown topology '" << topo_str << "'\n";
    return 2;
  }
  try {
    const ModelDescriptor model = load_model(model_path);
    const std::string csv = predict_cycles(*topo, model).to_csv();
    if (out_path.empty()) {
      out << csv;
    } else {
      std::ofstream f(out_path);
      if (!f) {
        err << "error: cannot open " << out_path << "\n";
        return 2;
      }
      f << csv;
    }
    return 0;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"multi-precision multiplier and accelerator toolkit", "bitsys"};
  app.require_subcommand(1);

  std::string mul_a, mul_b;
  int mul_bits = 8;
  bool mul_trace = false, mul_signed = false, mul_unsigned = false, mul_bnn = false;
  auto* mul = app.add_subcommand("mul", "multiply two packed operand bytes");
  mul->add_option("--a", mul_a, "left operand byte (decimal or 0x hex)")->required();
  mul->add_option("--b", mul_b, "right operand byte")->required();
  mul->add_option("--bits", mul_bits, "channel width: 1, 2, 4 or 8");
  auto* f_signed = mul->add_flag("--signed", mul_signed, "two's complement channels");
  auto* f_unsigned = mul->add_flag("--unsigned", mul_unsigned, "plain binary channels");
  auto* f_bnn = mul->add_flag("--bnn", mul_bnn, "bipolar 1-bit channels");
  f_signed->excludes(f_unsigned)->excludes(f_bnn);
  f_unsigned->excludes(f_bnn);
  mul->add_flag("--trace", mul_trace, "print per-cycle accept/complete events");

  std::vector<std::string> verify_modes;
  bool verify_exhaustive = false, verify_fabric = false;
  unsigned verify_samples = 1000;
  std::uint64_t verify_seed = 1;
  auto* verify =
      app.add_subcommand("verify", "sweep the multiplier against plain arithmetic");
  auto* verify_modes_opt =
      verify->add_option("--modes", verify_modes, "modes to check (default: all)")
          ->delimiter(',');
  verify->add_flag("--exhaustive", verify_exhaustive,
                   "cover all 65536 operand pairs per mode");
  verify->add_flag("--fabric", verify_fabric, "also drive the cycle model");
  verify->add_option("--samples", verify_samples,
                     "pairs per mode when not exhaustive");
  verify->add_option("--seed", verify_seed, "random seed");

  std::string infer_model, infer_input, infer_topo = "systolic", infer_report;
  bool infer_check = false;
  auto* infer = app.add_subcommand("infer", "run a model file on an input vector");
  infer->add_option("--model", infer_model, "model file")->required();
  infer->add_option("--input", infer_input, "input vector file")->required();
  infer->add_option("-t,--topology", infer_topo, "single or systolic");
  infer->add_option("--report", infer_report, "write the per-layer cycle CSV here");
  infer->add_flag("--oracle-check", infer_check,
                  "compare against the plain-integer reference");

  std::string cyc_model, cyc_topo = "systolic", cyc_out;
  auto* cycles = app.add_subcommand("cycles", "per-layer cycle counts as CSV");
  cycles->add_option("--model", cyc_model, "model file")->required();
  cycles->add_option("-t,--topology", cyc_topo, "single_layer or systolic");
  cycles->add_option("-o,--output", cyc_out, "write CSV here instead of stdout");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  if (mul->parsed()) {
    const int signedness = mul_bnn ? 2 : (mul_signed ? 1 : 0);
    return run_mul(mul_a, mul_b, mul_bits, signedness, mul_trace, out, err);
  }
  if (verify->parsed())
    return run_verify(verify_modes, verify_modes_opt->count() > 0,
                      verify_exhaustive, verify_fabric, verify_samples,
                      verify_seed, out, err);
  if (infer->parsed())
    return run_infer(infer_model, infer_input, infer_topo, infer_report,
                     infer_check, out, err);
  if (cycles->parsed()) return run_cycles(cyc_model, cyc_topo, cyc_out, out, err);
  return 2;
}

}  // namespace bitsys
