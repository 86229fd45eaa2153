#pragma once

// Feed-forward network model, NNet text format, and plain forward evaluation.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lattice_reach/errors.hpp"

namespace lattice_reach {

enum class Activation { ReLU, Linear };

struct Layer {
  Eigen::MatrixXd weights;  // width x previous width
  Eigen::VectorXd bias;
  Activation activation = Activation::ReLU;

  std::size_t width() const { return static_cast<std::size_t>(weights.rows()); }
  std::size_t input_width() const { return static_cast<std::size_t>(weights.cols()); }
};

/// NNet input/output scaling. `means` and `ranges` carry input_dim + 1
/// entries; the last one applies to every output.
struct Normalization {
  Eigen::VectorXd input_mins;
  Eigen::VectorXd input_maxes;
  Eigen::VectorXd means;
  Eigen::VectorXd ranges;

  double output_mean() const { return means(means.size() - 1); }
  double output_range() const { return ranges(ranges.size() - 1); }
};

class Network {
 public:
  Network() = default;

  Network(std::vector<Layer> layers, std::optional<Normalization> normalization = std::nullopt)
      : layers_(std::move(layers)), normalization_(std::move(normalization)) {
    if (layers_.empty()) throw InvalidArgument("network needs at least one layer");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const Layer& l = layers_[i];
      detail::require_dim(static_cast<std::size_t>(l.bias.size()), l.width(),
                          ("layer " + std::to_string(i) + " bias").c_str());
      if (i > 0) {
        detail::require_dim(l.input_width(), layers_[i - 1].width(),
                            ("layer " + std::to_string(i) + " weight columns").c_str());
      }
    }
    if (normalization_) {
      const auto n = input_dim();
      detail::require_dim(static_cast<std::size_t>(normalization_->input_mins.size()), n, "input minima");
      detail::require_dim(static_cast<std::size_t>(normalization_->input_maxes.size()), n, "input maxima");
      detail::require_dim(static_cast<std::size_t>(normalization_->means.size()), n + 1, "means");
      detail::require_dim(static_cast<std::size_t>(normalization_->ranges.size()), n + 1, "ranges");
    }
  }

  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t input_dim() const { return layers_.front().input_width(); }
  std::size_t output_dim() const { return layers_.back().width(); }
  const std::optional<Normalization>& normalization() const { return normalization_; }

  std::size_t relu_neuron_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.activation == Activation::ReLU ? l.width() : 0;
    return n;
  }

 private:
  std::vector<Layer> layers_;
  std::optional<Normalization> normalization_;
};

inline Eigen::VectorXd apply_layer(const Layer& layer, const Eigen::VectorXd& x) {
  Eigen::VectorXd z = layer.weights * x + layer.bias;
  if (layer.activation == Activation::ReLU) z = z.cwiseMax(0.0);
  return z;
}

inline Eigen::VectorXd forward(const Network& net, const Eigen::VectorXd& x) {
  detail::require_dim(static_cast<std::size_t>(x.size()), net.input_dim(), "network input");
  Eigen::VectorXd y = x;
  for (const auto& layer : net.layers()) y = apply_layer(layer, y);
  return y;
}

/// Clamp to [mins, maxes], subtract mean, divide by range. Identity without
/// normalization data.
inline Eigen::VectorXd normalize_input(const Network& net, const Eigen::VectorXd& x) {
  detail::require_dim(static_cast<std::size_t>(x.size()), net.input_dim(), "input");
  if (!net.normalization()) return x;
  const auto& n = *net.normalization();
  const auto k = x.size();
  Eigen::VectorXd c = x.cwiseMax(n.input_mins).cwiseMin(n.input_maxes);
  return ((c - n.means.head(k)).array() / n.ranges.head(k).array()).matrix();
}

/// Inverse of the affine part of normalize_input (no clamp).
inline Eigen::VectorXd denormalize_input(const Network& net, const Eigen::VectorXd& x) {
  detail::require_dim(static_cast<std::size_t>(x.size()), net.input_dim(), "input");
  if (!net.normalization()) return x;
  const auto& n = *net.normalization();
  const auto k = x.size();
  return (x.array() * n.ranges.head(k).array() + n.means.head(k).array()).matrix();
}

inline Eigen::VectorXd denormalize_output(const Network& net, const Eigen::VectorXd& y) {
  detail::require_dim(static_cast<std::size_t>(y.size()), net.output_dim(), "output");
  if (!net.normalization()) return y;
  const auto& n = *net.normalization();
  return (y.array() * n.output_range() + n.output_mean()).matrix();
}

/// Network evaluated in raw (un-normalized) units on both ends.
inline Eigen::VectorXd evaluate_raw(const Network& net, const Eigen::VectorXd& x) {
  return denormalize_output(net, forward(net, normalize_input(net, x)));
}

// ---------------------------------------------------------------------------
// NNet format

namespace detail {

class NNetReader {
 public:
  explicit NNetReader(std::istream& in) : in_(in) {}

  // Next non-comment, non-blank line split on commas. Empty trailing fields
  // (the format ends lines with a comma) are dropped.
  std::vector<double> row(const char* what) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      std::string_view sv(line);
      while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t')) sv.remove_prefix(1);
      if (sv.empty() || sv == "\r" || sv.substr(0, 2) == "//") continue;
      return parse(sv, what);
    }
    throw ParseError(std::string("unexpected end of file while reading ") + what, line_no_ + 1);
  }

  std::vector<double> row(const char* what, std::size_t expected) {
    auto r = row(what);
    if (r.size() != expected) {
      throw ParseError(std::string(what) + ": expected " + std::to_string(expected) +
                           " values, found " + std::to_string(r.size()),
                       line_no_);
    }
    return r;
  }

  std::size_t line() const { return line_no_; }

 private:
  std::vector<double> parse(std::string_view sv, const char* what) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= sv.size()) {
      std::size_t end = sv.find(',', start);
      if (end == std::string_view::npos) end = sv.size();
      std::string tok(sv.substr(start, end - start));
      const auto b = tok.find_first_not_of(" \t\r");
      const auto e = tok.find_last_not_of(" \t\r");
      if (b != std::string::npos) {
        tok = tok.substr(b, e - b + 1);
        char* stop = nullptr;
        errno = 0;
        const double v = std::strtod(tok.c_str(), &stop);
        if (stop == tok.c_str() || *stop != '\0' || errno == ERANGE) {
          throw ParseError(std::string(what) + ": non-numeric token '" + tok + "'", line_no_);
        }
        out.push_back(v);
      } else if (end != sv.size()) {
        throw ParseError(std::string(what) + ": empty field", line_no_);
      }
      start = end + 1;
    }
    return out;
  }

  std::istream& in_;
  std::size_t line_no_ = 0;
};

inline std::size_t as_count(double v, const char* what, std::size_t line) {
  if (!(v >= 1.0) || v != static_cast<double>(static_cast<std::size_t>(v))) {
    throw ParseError(std::string(what) + " must be a positive integer", line);
  }
  return static_cast<std::size_t>(v);
}

inline Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

/// Hidden layers are ReLU, the last layer is Linear.
inline Network parse_nnet(std::istream& in) {
  detail::NNetReader r(in);
  auto header = r.row("header", 4);
  const std::size_t num_layers = detail::as_count(header[0], "layer count", r.line());
  const std::size_t input_size = detail::as_count(header[1], "input size", r.line());
  const std::size_t output_size = detail::as_count(header[2], "output size", r.line());

  auto sizes_row = r.row("layer sizes", num_layers + 1);
  std::vector<std::size_t> sizes;
  for (double s : sizes_row) sizes.push_back(detail::as_count(s, "layer size", r.line()));
  if (sizes.front() != input_size || sizes.back() != output_size) {
    throw ParseError("layer sizes disagree with declared input/output size", r.line());
  }

  r.row("symmetric flag");
  Normalization norm;
  norm.input_mins = detail::to_vector(r.row("input minima", input_size));
  norm.input_maxes = detail::to_vector(r.row("input maxima", input_size));
  norm.means = detail::to_vector(r.row("means", input_size + 1));
  norm.ranges = detail::to_vector(r.row("ranges", input_size + 1));

  std::vector<Layer> layers;
  for (std::size_t l = 0; l < num_layers; ++l) {
    Layer layer;
    const auto rows = static_cast<Eigen::Index>(sizes[l + 1]);
    const auto cols = static_cast<Eigen::Index>(sizes[l]);
    layer.weights.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      auto w = r.row("weight row", sizes[l]);
      layer.weights.row(i) = detail::to_vector(w).transpose();
    }
    layer.bias.resize(rows);
    for (Eigen::Index i = 0; i < rows; ++i) layer.bias(i) = r.row("bias", 1)[0];
    layer.activation = l + 1 == num_layers ? Activation::Linear : Activation::ReLU;
    layers.push_back(std::move(layer));
  }
  return Network(std::move(layers), std::move(norm));
}

inline Network parse_nnet(const std::string& text) {
  std::istringstream in(text);
  return parse_nnet(in);
}

/// Writes the NNet format at round-trip precision. Networks without
/// normalization get the identity scaling (means 0, ranges 1, infinite bounds
/// replaced by +-1e300).
inline void write_nnet(std::ostream& out, const Network& net) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  auto line = [&](const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out << num(v(i)) << ',';
    out << '\n';
  };
  const auto n = static_cast<Eigen::Index>(net.input_dim());
  std::size_t max_width = net.input_dim();
  for (const auto& l : net.layers()) max_width = std::max(max_width, l.width());
  out << "// lattice_reach network\n";
  out << net.layers().size() << ',' << net.input_dim() << ',' << net.output_dim() << ','
      << max_width << ",\n";
  out << net.input_dim() << ',';
  for (const auto& l : net.layers()) out << l.width() << ',';
  out << "\n0,\n";
  if (net.normalization()) {
    const auto& z = *net.normalization();
    line(z.input_mins);
    line(z.input_maxes);
    line(z.means);
    line(z.ranges);
  } else {
    line(Eigen::VectorXd::Constant(n, -1e300));
    line(Eigen::VectorXd::Constant(n, 1e300));
    line(Eigen::VectorXd::Zero(n + 1));
    line(Eigen::VectorXd::Ones(n + 1));
  }
  for (const auto& l : net.layers()) {
    for (Eigen::Index i = 0; i < l.weights.rows(); ++i) line(l.weights.row(i).transpose());
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) out << num(l.bias(i)) << ",\n";
  }
}

// ---------------------------------------------------------------------------
// JSON network format

inline nlohmann::json network_to_json(const Network& net) {
  using nlohmann::json;
  json layers = json::array();
  for (const auto& l : net.layers()) {
    json w = json::array();
    for (Eigen::Index i = 0; i < l.weights.rows(); ++i) {
      w.push_back(std::vector<double>(l.weights.row(i).begin(), l.weights.row(i).end()));
    }
    layers.push_back({{"weights", w},
                      {"bias", std::vector<double>(l.bias.begin(), l.bias.end())},
                      {"activation", l.activation == Activation::ReLU ? "relu" : "linear"}});
  }
  json j = {{"input_dim", net.input_dim()}, {"output_dim", net.output_dim()}, {"layers", layers}};
  if (net.normalization()) {
    const auto& z = *net.normalization();
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.begin(), v.end()); };
    j["normalization"] = {{"input_mins", vec(z.input_mins)},
                          {"input_maxes", vec(z.input_maxes)},
                          {"means", vec(z.means)},
                          {"ranges", vec(z.ranges)}};
  } else {
    j["normalization"] = nullptr;
  }
  return j;
}

inline Network network_from_json(const nlohmann::json& j) {
  try {
    std::vector<Layer> layers;
    for (const auto& jl : j.at("layers")) {
      Layer l;
      const auto& rows = jl.at("weights");
      const auto r = static_cast<Eigen::Index>(rows.size());
      const auto c = r == 0 ? 0 : static_cast<Eigen::Index>(rows.at(0).size());
      l.weights.resize(r, c);
      for (Eigen::Index i = 0; i < r; ++i) {
        auto row = rows.at(static_cast<std::size_t>(i)).get<std::vector<double>>();
        detail::require_dim(row.size(), static_cast<std::size_t>(c), "weight row");
        l.weights.row(i) = detail::to_vector(row).transpose();
      }
      l.bias = detail::to_vector(jl.at("bias").get<std::vector<double>>());
      const auto act = jl.value("activation", std::string("relu"));
      if (act == "relu") {
        l.activation = Activation::ReLU;
      } else if (act == "linear") {
        l.activation = Activation::Linear;
      } else {
        throw ParseError("unknown activation '" + act + "'", 0);
      }
      layers.push_back(std::move(l));
    }
    std::optional<Normalization> norm;
    if (j.contains("normalization") && !j["normalization"].is_null()) {
      const auto& z = j["normalization"];
      norm = Normalization{detail::to_vector(z.at("input_mins").get<std::vector<double>>()),
                           detail::to_vector(z.at("input_maxes").get<std::vector<double>>()),
                           detail::to_vector(z.at("means").get<std::vector<double>>()),
                           detail::to_vector(z.at("ranges").get<std::vector<double>>())};
    }
    Network net(std::move(layers), std::move(norm));
    if (j.contains("input_dim")) detail::require_dim(net.input_dim(), j["input_dim"].get<std::size_t>(), "input_dim");
    if (j.contains("output_dim")) detail::require_dim(net.output_dim(), j["output_dim"].get<std::size_t>(), "output_dim");
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("network JSON: ") + e.what(), 0);
  }
}

}  // namespace lattice_reach
