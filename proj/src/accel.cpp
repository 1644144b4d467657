#include "bitsys/accel.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "bitsys/bitmath.hpp"

namespace bitsys {

std::optional<Topology> parse_topology(std::string_view token) {
  if (token == "single" || token == "single_layer") return Topology::SingleLayer;
  if (token == "systolic") return Topology::Systolic;
  return std::nullopt;
}

std::string topology_name(Topology t) {
  return t == Topology::SingleLayer ? "single_layer" : "systolic";
}

std::int64_t CycleReport::total_compute() const {
  std::int64_t s = 0;
  for (const auto& l : layers) s += l.compute_cycles;
  return s;
}
std::int64_t CycleReport::total_reconfig() const {
  std::int64_t s = 0;
  for (const auto& l : layers) s += l.reconfig_cycles;
  return s;
}
std::int64_t CycleReport::total_activation() const {
  std::int64_t s = 0;
  for (const auto& l : layers) s += l.activation_cycles;
  return s;
}
std::int64_t CycleReport::total_busy() const {
  std::int64_t s = 0;
  for (const auto& l : layers) s += l.mult_busy_cycles;
  return s;
}

std::string CycleReport::to_csv() const {
  std::ostringstream out;
  out << "layer,mode,compute_cycles,reconfig_cycles,activation_cycles,"
         "mult_busy_cycles\n";
  for (const auto& l : layers)
    out << l.layer_index << ',' << l.mode.name() << ',' << l.compute_cycles << ','
        << l.reconfig_cycles << ',' << l.activation_cycles << ','
        << l.mult_busy_cycles << '\n';
  out << "total,-," << total_compute() << ',' << total_reconfig() << ','
      << total_activation() << ',' << total_busy() << '\n';
  return out.str();
}

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

// One multiplier consuming one packed operand word: positions
// [pos, pos + channels) of the dot product, tail channels invalid.
std::int64_t consume_word(const LayerConfig& layer, std::span<const int> x, int neuron,
                          int pos) {
  const PrecisionMode m = layer.mode;
  const int c = m.channels();
  ChannelValues xa(c, 0), wb(c, 0);
  std::uint8_t valid = 0;
  for (int k = 0; k < c; ++k) {
    const int i = pos + k;
    if (i >= layer.in_features) break;
    xa[k] = x[i];
    wb[k] = layer.weights[neuron][i];
    valid |= static_cast<std::uint8_t>(1u << k);
  }
  if (valid == 0) return 0;
  // invalid lanes hold an arbitrary in-range value; gating must zero them
  if (m.bnn_xnor())
    for (int k = 0; k < c; ++k)
      if (!((valid >> k) & 1u)) xa[k] = wb[k] = 1;
  const std::uint16_t word = multiply(pack(xa, m), pack(wb, m), m, valid);
  return convert_channels(word, m);
}

}  // namespace

LayerRun run_layer(Topology t, const LayerConfig& layer, std::span<const int> inputs) {
  if (static_cast<int>(inputs.size()) != layer.in_features)
    throw std::invalid_argument("layer input length mismatch");
  for (const int v : inputs)
    if (!layer.mode.in_range(v))
      throw std::out_of_range("input value " + std::to_string(v) +
                              " out of range for mode " + layer.mode.name());

  const int c = layer.mode.channels();
  const int out = layer.out_features;
  const std::int64_t words = ceil_div(layer.in_features, 8 * c);  // per multiplier
  const std::int64_t groups = ceil_div(out, AcceleratorSpec::kNeuronsPerGroup);
  const int act = layer.threshold_count();

  LayerRun run;
  run.accumulators.assign(out, 0);
  run.cycles.mode = layer.mode;

  std::int64_t compute = 0, busy = 0, activation = 0;

  for (std::int64_t g = 0; g < groups; ++g) {
    const int n_lo = static_cast<int>(g) * AcceleratorSpec::kNeuronsPerGroup;
    const int n_hi = std::min(out, n_lo + AcceleratorSpec::kNeuronsPerGroup);

    // streaming: every multiplier consumes one word per cycle
    for (std::int64_t q = 0; q < words; ++q) {
      if (t == Topology::SingleLayer) ++compute;
      for (int n = n_lo; n < n_hi; ++n) {
        // eight multipliers per neuron (single) or eight row slices of the
        // grid column owning the neuron (systolic); same positions either way
        std::int64_t macc = 0;
        for (int mult = 0; mult < 8; ++mult) {
          const int pos = static_cast<int>((q * 8 + mult)) * c;
          if (pos < layer.in_features) macc += consume_word(layer, inputs, n, pos);
          ++busy;
        }
        run.accumulators[n] += macc;
      }
    }

    if (t == Topology::SingleLayer) {
      // serial groups: pipeline refills and the group's neurons activate
      // in parallel before the next group starts
      compute += AcceleratorSpec::kMacPipeFill;
      activation += act;
    } else {
      // tiles stream back to back; only count the streaming cycles here
      compute += words;
    }
  }

  if (t == Topology::Systolic) {
    // skew and pipeline fills paid once; activation of all tiles except
    // the last overlaps the following tile's streaming
    compute += AcceleratorSpec::kSystolicSkewFill + AcceleratorSpec::kMacPipeFill;
    activation += act;
  }

  // 32-bit accumulator contract
  for (const std::int64_t a : run.accumulators)
    if (a > std::numeric_limits<std::int32_t>::max() ||
        a < std::numeric_limits<std::int32_t>::min())
      throw std::overflow_error("accumulator overflow: " + std::to_string(a));

  if (act > 0) {
    run.outputs.resize(out);
    for (int n = 0; n < out; ++n)
      run.outputs[n] = activate(run.accumulators[n], layer.thresholds[n]);
  }

  run.cycles.compute_cycles = compute;
  run.cycles.activation_cycles = activation;
  run.cycles.mult_busy_cycles = busy;
  return run;
}

std::int64_t schedule_cycles(Topology t, const LayerConfig& layer) {
  const std::int64_t words = ceil_div(layer.in_features, 8 * layer.mode.channels());
  const std::int64_t groups = ceil_div(layer.out_features, 8);
  const std::int64_t act = layer.threshold_count();
  if (t == Topology::SingleLayer)
    return groups * (words + AcceleratorSpec::kMacPipeFill + act);
  return groups * words + AcceleratorSpec::kSystolicSkewFill +
         AcceleratorSpec::kMacPipeFill + act;
}

NetworkRun run_network(Topology t, const ModelDescriptor& model,
                       std::span<const int> input) {
  validate_model(model);
  validate_input(model, input);

  NetworkRun net;
  std::vector<int> x(input.begin(), input.end());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const LayerConfig& L = model.layers[l];
    LayerRun run = run_layer(t, L, x);
    run.cycles.layer_index = static_cast<int>(l);
    run.cycles.reconfig_cycles =
        (l > 0 && !(L.mode == model.layers[l - 1].mode))
            ? AcceleratorSpec::kReconfigCycles
            : 0;
    net.report.layers.push_back(run.cycles);

    if (l + 1 == model.layers.size()) {
      net.logits = std::move(run.accumulators);
    } else {
      const PrecisionMode next = model.layers[l + 1].mode;
      x.resize(run.outputs.size());
      for (std::size_t n = 0; n < run.outputs.size(); ++n)
        x[n] = decode_operand_field(static_cast<unsigned>(run.outputs[n]), next);
    }
  }

  int best = 0;
  for (std::size_t i = 1; i < net.logits.size(); ++i)
    if (net.logits[i] > net.logits[best]) best = static_cast<int>(i);
  net.argmax = best;
  return net;
}

CycleReport predict_cycles(Topology t, const ModelDescriptor& model) {
  validate_model(model);
  CycleReport report;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const LayerConfig& L = model.layers[l];
    const std::int64_t words = ceil_div(L.in_features, 8 * L.mode.channels());
    const std::int64_t groups = ceil_div(L.out_features, 8);
    const std::int64_t act = L.threshold_count();
    LayerCycles c;
    c.layer_index = static_cast<int>(l);
    c.mode = L.mode;
    if (t == Topology::SingleLayer) {
      c.compute_cycles = groups * (words + AcceleratorSpec::kMacPipeFill);
      c.activation_cycles = groups * act;
    } else {
      c.compute_cycles = groups * words + AcceleratorSpec::kSystolicSkewFill +
                         AcceleratorSpec::kMacPipeFill;
      c.activation_cycles = act;
    }
    c.mult_busy_cycles = static_cast<std::int64_t>(L.out_features) * 8 * words;
    c.reconfig_cycles = (l > 0 && !(L.mode == model.layers[l - 1].mode))
                            ? AcceleratorSpec::kReconfigCycles
                            : 0;
    report.layers.push_back(c);
  }
  return report;
}

}  // namespace bitsys
