#include "bitsys/refnet.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace bitsys {

namespace {

std::string layer_label(std::size_t idx) { return "layer " + std::to_string(idx); }

[[noreturn]] void model_fail(const std::string& msg) { throw ModelError(msg); }

}  // namespace

void validate_model(const ModelDescriptor& model) {
  if (model.layers.empty()) model_fail("model has no layers");
  if (model.input_width != model.layers.front().in_features)
    model_fail("input width " + std::to_string(model.input_width) +
               " does not match first layer in=" +
               std::to_string(model.layers.front().in_features));
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const LayerConfig& L = model.layers[l];
    const std::string where = layer_label(l);
    if (L.in_features <= 0 || L.out_features <= 0)
      model_fail(where + ": non-positive shape");
    if (l > 0 && model.layers[l - 1].out_features != L.in_features)
      model_fail(where + ": in=" + std::to_string(L.in_features) +
                 " does not chain from previous out=" +
                 std::to_string(model.layers[l - 1].out_features));
    if (static_cast<int>(L.weights.size()) != L.out_features)
      model_fail(where + ": weight row count mismatch");
    for (const auto& row : L.weights) {
      if (static_cast<int>(row.size()) != L.in_features)
        model_fail(where + ": weight column count mismatch");
      for (const std::int32_t w : row)
        if (!L.mode.in_range(w))
          model_fail(where + ": weight " + std::to_string(w) +
                     " out of range for mode " + L.mode.name());
    }
    const bool final_layer = (l + 1 == model.layers.size());
    if (final_layer) {
      if (!L.thresholds.empty())
        model_fail(where + ": final layer must not carry thresholds");
      continue;
    }
    const int want = (1 << model.layers[l + 1].mode.bits()) - 1;
    if (static_cast<int>(L.thresholds.size()) != L.out_features)
      model_fail(where + ": threshold row count mismatch");
    for (const auto& row : L.thresholds) {
      if (static_cast<int>(row.size()) != want)
        model_fail(where + ": expected " + std::to_string(want) +
                   " thresholds per neuron, got " + std::to_string(row.size()));
      for (std::size_t i = 1; i < row.size(); ++i)
        if (row[i] <= row[i - 1]) model_fail(where + ": thresholds not ascending");
    }
  }
}

void validate_input(const ModelDescriptor& model, std::span<const int> input) {
  if (static_cast<int>(input.size()) != model.input_width)
    model_fail("expected " + std::to_string(model.input_width) + " input values, got " +
               std::to_string(input.size()));
  const PrecisionMode m = model.layers.front().mode;
  for (const int v : input)
    if (!m.in_range(v))
      model_fail("input value " + std::to_string(v) + " out of range for mode " +
                 m.name());
}

std::vector<std::int64_t> layer_accumulators(const LayerConfig& layer,
                                             std::span<const int> input) {
  if (static_cast<int>(input.size()) != layer.in_features)
    model_fail("layer input length mismatch");
  std::vector<std::int64_t> acc(layer.out_features, 0);
  for (int n = 0; n < layer.out_features; ++n) {
    const auto& w = layer.weights[n];
    std::int64_t s = 0;
    for (int i = 0; i < layer.in_features; ++i)
      s += static_cast<std::int64_t>(w[i]) * input[i];
    acc[n] = s;
  }
  return acc;
}

std::vector<int> reference_layer(const LayerConfig& layer, std::span<const int> input) {
  if (layer.thresholds.empty()) model_fail("layer has no thresholds");
  const auto acc = layer_accumulators(layer, input);
  std::vector<int> out(layer.out_features);
  for (int n = 0; n < layer.out_features; ++n) {
    int below = 0;
    for (const std::int32_t t : layer.thresholds[n])
      if (t < acc[n]) ++below;
    out[n] = below;
  }
  return out;
}

int decode_activation_code(int code, PrecisionMode next_mode) {
  if (next_mode.bnn_xnor()) return code ? 1 : -1;
  if (next_mode.is_signed() && (code >> (next_mode.bits() - 1)))
    return code - (1 << next_mode.bits());
  return code;
}

std::vector<std::int64_t> reference_network(const ModelDescriptor& model,
                                            std::span<const int> input) {
  validate_input(model, input);
  std::vector<int> x(input.begin(), input.end());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const LayerConfig& L = model.layers[l];
    if (l + 1 == model.layers.size()) return layer_accumulators(L, x);
    const auto codes = reference_layer(L, x);
    const PrecisionMode next = model.layers[l + 1].mode;
    x.resize(codes.size());
    for (std::size_t n = 0; n < codes.size(); ++n)
      x[n] = decode_activation_code(codes[n], next);
  }
  return {};
}

// ===== model file format =====

namespace {

struct LineReader {
  std::istream& in;
  std::string origin;
  int lineno = 0;
  std::string pending{};
  bool has_pending = false;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ModelError(origin + ":" + std::to_string(lineno) + ": " + msg);
  }

  // next non-blank, non-comment line; false at EOF
  bool next(std::string& line) {
    if (has_pending) {
      line = pending;
      has_pending = false;
      return true;
    }
    while (std::getline(in, line)) {
      ++lineno;
      const auto pos = line.find('#');
      if (pos != std::string::npos) line.erase(pos);
      bool blank = true;
      for (const char c : line)
        if (!std::isspace(static_cast<unsigned char>(c))) {
          blank = false;
          break;
        }
      if (!blank) return true;
    }
    return false;
  }

  // lineno already points at the pushed-back line when it is re-read
  void push_back(const std::string& line) {
    pending = line;
    has_pending = true;
  }
};

std::vector<std::string> tokens_of(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream ss(line);
  std::string t;
  while (ss >> t) toks.push_back(t);
  return toks;
}

long parse_int(const std::string& s, LineReader& r) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    r.fail("expected integer, got '" + s + "'");
  return v;
}

// key=value field from a layer header
long header_field(const std::vector<std::string>& toks, const std::string& key,
                  LineReader& r) {
  for (const auto& t : toks) {
    if (t.rfind(key + "=", 0) == 0) return parse_int(t.substr(key.size() + 1), r);
  }
  r.fail("missing field " + key + "=");
}

std::vector<std::int32_t> parse_row(const std::string& line, int want, LineReader& r,
                                    const char* what) {
  const auto toks = tokens_of(line);
  if (static_cast<int>(toks.size()) != want)
    r.fail("expected " + std::to_string(want) + " " + what + " values, got " +
           std::to_string(toks.size()));
  std::vector<std::int32_t> row(toks.size());
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const long v = parse_int(toks[i], r);
    if (v < std::numeric_limits<std::int32_t>::min() ||
        v > std::numeric_limits<std::int32_t>::max())
      r.fail("value out of 32-bit range");
    row[i] = static_cast<std::int32_t>(v);
  }
  return row;
}

}  // namespace

ModelDescriptor parse_model(std::istream& in, const std::string& origin) {
  LineReader r{in, origin};
  std::string line;
  if (!r.next(line)) r.fail("empty model file");
  auto toks = tokens_of(line);
  if (toks.size() != 4 || toks[0] != "model" || toks[2] != "input")
    r.fail("expected 'model <name> input <n>'");
  ModelDescriptor model;
  model.name = toks[1];
  model.input_width = static_cast<int>(parse_int(toks[3], r));

  std::vector<int> header_lines;
  while (r.next(line)) {
    toks = tokens_of(line);
    if (toks.empty() || toks[0] != "layer") r.fail("expected 'layer' header");
    if (toks.size() < 2 || toks[1] != "dense") r.fail("unsupported layer kind");
    header_lines.push_back(r.lineno);

    LayerConfig L;
    L.in_features = static_cast<int>(header_field(toks, "in", r));
    L.out_features = static_cast<int>(header_field(toks, "out", r));
    const int bits = static_cast<int>(header_field(toks, "bits", r));
    const long sgn = header_field(toks, "signed", r);
    const long bnn = header_field(toks, "bnn", r);
    if (bits != 1 && bits != 2 && bits != 4 && bits != 8) r.fail("unsupported precision");
    if (sgn != 0 && sgn != 1) r.fail("signed must be 0 or 1");
    if (bnn != 0 && bnn != 1) r.fail("bnn must be 0 or 1");
    if (bnn == 1 && (bits != 1 || sgn != 1)) r.fail("bnn=1 requires bits=1 signed=1");
    if (bnn == 0 && bits == 1 && sgn == 1) r.fail("1-bit signed layers must set bnn=1");
    L.mode = PrecisionMode::make(bits, sgn ? Signedness::Signed : Signedness::Unsigned);

    if (!r.next(line) || line != "weights") r.fail("expected 'weights'");
    for (int n = 0; n < L.out_features; ++n) {
      if (!r.next(line)) r.fail("unexpected end of file in weights");
      L.weights.push_back(parse_row(line, L.in_features, r, "weight"));
      for (const std::int32_t w : L.weights.back())
        if (!L.mode.in_range(w))
          r.fail("weight " + std::to_string(w) + " out of range for mode " +
                 L.mode.name());
    }

    if (r.next(line)) {
      if (line == "thresholds") {
        for (int n = 0; n < L.out_features; ++n) {
          if (!r.next(line)) r.fail("unexpected end of file in thresholds");
          // row width checked against the next layer during validation
          auto row = parse_row(line, static_cast<int>(tokens_of(line).size()), r,
                               "threshold");
          for (std::size_t i = 1; i < row.size(); ++i)
            if (row[i] <= row[i - 1]) r.fail("thresholds not ascending");
          L.thresholds.push_back(std::move(row));
        }
      } else {
        r.push_back(line);
      }
    }
    model.layers.push_back(std::move(L));
  }

  try {
    validate_model(model);
  } catch (const ModelError& e) {
    // map layer-level validation errors back to their header lines
    std::string msg = e.what();
    for (std::size_t l = 0; l < header_lines.size(); ++l) {
      const std::string tag = layer_label(l) + ":";
      if (msg.rfind(tag, 0) == 0) {
        throw ModelError(origin + ":" + std::to_string(header_lines[l]) + ":" +
                         msg.substr(tag.size()));
      }
    }
    throw ModelError(origin + ": " + msg);
  }
  return model;
}

ModelDescriptor load_model(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ModelError("cannot open " + path);
  return parse_model(f, path);
}

void write_model(const ModelDescriptor& model, std::ostream& out) {
  out << "model " << model.name << " input " << model.input_width << "\n";
  for (const LayerConfig& L : model.layers) {
    out << "layer dense in=" << L.in_features << " out=" << L.out_features
        << " bits=" << L.mode.bits() << " signed=" << (L.mode.is_signed() ? 1 : 0)
        << " bnn=" << (L.mode.bnn_xnor() ? 1 : 0) << "\n";
    out << "weights\n";
    for (const auto& row : L.weights) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << row[i];
      out << "\n";
    }
    if (!L.thresholds.empty()) {
      out << "thresholds\n";
      for (const auto& row : L.thresholds) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << row[i];
        out << "\n";
      }
    }
  }
}

void save_model(const ModelDescriptor& model, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ModelError("cannot open " + path);
  write_model(model, f);
}

std::vector<int> parse_input_vector(std::istream& in, const std::string& origin) {
  LineReader r{in, origin};
  std::vector<int> values;
  std::string line;
  while (r.next(line)) {
    const auto toks = tokens_of(line);
    for (const auto& t : toks) values.push_back(static_cast<int>(parse_int(t, r)));
  }
  return values;
}

std::vector<int> load_input_vector(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ModelError("cannot open " + path);
  return parse_input_vector(f, path);
}

ModelDescriptor generate_random_model(const std::vector<int>& shape,
                                      const std::vector<PrecisionMode>& modes,
                                      std::uint64_t seed) {
  if (shape.size() < 2) throw ModelError("shape needs at least input and one layer");
  if (modes.size() != shape.size() - 1)
    throw ModelError("need one mode per layer");
  std::mt19937_64 rng(seed);
  // avoid distribution objects: raw modulo keeps output identical everywhere
  const auto uniform = [&rng](std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(rng() %
                                          static_cast<std::uint64_t>(hi - lo + 1));
  };

  ModelDescriptor model;
  model.name = "random-" + std::to_string(seed);
  model.input_width = shape[0];
  for (std::size_t l = 0; l + 1 < shape.size(); ++l) {
    LayerConfig L;
    L.in_features = shape[l];
    L.out_features = shape[l + 1];
    L.mode = modes[l];
    L.weights.resize(L.out_features);
    for (auto& row : L.weights) {
      row.resize(L.in_features);
      for (auto& w : row) {
        if (L.mode.bnn_xnor())
          w = (rng() & 1u) ? 1 : -1;
        else
          w = static_cast<std::int32_t>(uniform(L.mode.min_value(), L.mode.max_value()));
      }
    }
    if (l + 2 < shape.size()) {
      const int count = (1 << modes[l + 1].bits()) - 1;
      const std::int64_t xmax =
          std::max(std::abs(L.mode.min_value()), std::abs(L.mode.max_value()));
      L.thresholds.resize(L.out_features);
      for (int n = 0; n < L.out_features; ++n) {
        std::int64_t reach = 0;
        for (const std::int32_t w : L.weights[n]) reach += std::abs(w) * xmax;
        const std::int64_t half = std::max<std::int64_t>(reach, count);
        std::set<std::int64_t> pick;
        while (static_cast<int>(pick.size()) < count) pick.insert(uniform(-half, half));
        for (const std::int64_t t : pick)
          L.thresholds[n].push_back(static_cast<std::int32_t>(t));
      }
    }
    model.layers.push_back(std::move(L));
  }
  validate_model(model);
  return model;
}

}  // namespace bitsys
