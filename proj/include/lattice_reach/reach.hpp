#pragma once

// Exact reachable-set propagation. A transformation tuple pairs an input
// region with the affine map (M, d) that sends it to the current layer; each
// ReLU neuron divides regions by the pulled-back neuron hyperplane and
// zeroes the map row on the inactive side.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "lattice_reach/errors.hpp"
#include "lattice_reach/face_lattice.hpp"
#include "lattice_reach/network.hpp"
#include "lattice_reach/parallel.hpp"

namespace lattice_reach {

/// Activation decision for one ReLU neuron.
struct Decision {
  std::uint32_t layer = 0;
  std::uint32_t neuron = 0;
  bool active = true;

  friend bool operator==(const Decision&, const Decision&) = default;
};

using Lineage = std::vector<Decision>;

struct TransformTuple {
  FaceLattice region;     // input-space polytope
  Eigen::MatrixXd map;    // current width x input dim
  Eigen::VectorXd shift;  // current width
  Lineage lineage;
};

struct Strategy {
  enum class Kind { PerLayer, SplitAt };
  Kind kind = Kind::SplitAt;
  std::size_t split_layer = 1;

  static Strategy per_layer() { return {Kind::PerLayer, 0}; }
  static Strategy split_at(std::size_t j) { return {Kind::SplitAt, j}; }

  std::string to_string() const {
    return kind == Kind::PerLayer ? "per-layer" : "split-at:" + std::to_string(split_layer);
  }
};

struct ReachConfig {
  double eps = 1e-9;
  std::size_t workers = 1;
  Strategy strategy{};
  std::size_t region_cap = 5'000'000;
};

struct ReachStats {
  std::size_t region_count = 0;
  std::size_t splits_performed = 0;
  // Regions that lay entirely on a neuron hyperplane; sent down the active
  // branch.
  std::size_t degenerate_splits = 0;
  double wall_time_seconds = 0.0;
  std::vector<std::size_t> per_layer_counts;
};

struct ReachResult {
  std::vector<TransformTuple> tuples;
  ReachStats stats;
};

struct StepCounters {
  std::size_t splits = 0;
  std::size_t degenerate = 0;

  StepCounters& operator+=(const StepCounters& o) {
    splits += o.splits;
    degenerate += o.degenerate;
    return *this;
  }
};

// ---------------------------------------------------------------------------
// Tuple operations

inline TransformTuple init_tuple(const FaceLattice& input) {
  const auto n = static_cast<Eigen::Index>(input.ambient_dim());
  return {input, Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n), {}};
}

inline TransformTuple affine_step(TransformTuple t, const Layer& layer) {
  detail::require_dim(layer.input_width(), static_cast<std::size_t>(t.map.rows()),
                      "layer weight columns");
  t.map = layer.weights * t.map;
  t.shift = layer.weights * t.shift + layer.bias;
  return t;
}

/// Pre-activation of neuron i as a functional on the input region.
inline Hyperplane map_back_hyperplane(const TransformTuple& t, std::size_t i) {
  if (i >= static_cast<std::size_t>(t.map.rows())) {
    throw InvalidArgument("neuron index " + std::to_string(i) + " out of range");
  }
  const auto r = static_cast<Eigen::Index>(i);
  return Hyperplane(t.map.row(r).transpose(), t.shift(r));
}

inline TransformTuple project_negative(TransformTuple t, std::size_t i, std::uint32_t layer = 0) {
  if (i >= static_cast<std::size_t>(t.map.rows())) {
    throw InvalidArgument("neuron index " + std::to_string(i) + " out of range");
  }
  const auto r = static_cast<Eigen::Index>(i);
  t.map.row(r).setZero();
  t.shift(r) = 0.0;
  t.lineage.push_back({layer, static_cast<std::uint32_t>(i), false});
  return t;
}

/// Classification with the tolerance scaled by the largest |value| (never
/// below eps itself).
inline VertexClassification classify_relative(const FaceLattice& region, const Hyperplane& h,
                                              double eps) {
  const Eigen::VectorXd values = evaluate_vertices(region, h);
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  return classify_values(values, eps * scale);
}

/// Appends the one or two tuples produced by neuron i to `out`.
inline void neuron_step_into(TransformTuple t, std::size_t i, double eps, std::uint32_t layer,
                             std::vector<TransformTuple>& out, StepCounters& counters) {
  const Hyperplane h = map_back_hyperplane(t, i);
  const auto cls = classify_relative(t.region, h, eps);
  const auto neuron = static_cast<std::uint32_t>(i);
  if (cls.positive.empty() && cls.negative.empty()) {
    // Region inside the hyperplane: ReLU is the identity and the zero map
    // alike here, so keep the active branch.
    ++counters.degenerate;
    t.lineage.push_back({layer, neuron, true});
    out.push_back(std::move(t));
    return;
  }
  SplitResult res = split(t.region, cls);
  if (std::holds_alternative<PositiveOnly>(res)) {
    t.lineage.push_back({layer, neuron, true});
    out.push_back(std::move(t));
  } else if (std::holds_alternative<NegativeOnly>(res)) {
    out.push_back(project_negative(std::move(t), i, layer));
  } else {
    ++counters.splits;
    auto& parts = std::get<Divided>(res);
    TransformTuple neg{std::move(parts.negative), t.map, t.shift, t.lineage};
    t.region = std::move(parts.positive);
    t.lineage.push_back({layer, neuron, true});
    out.push_back(std::move(t));
    out.push_back(project_negative(std::move(neg), i, layer));
  }
}

inline std::vector<TransformTuple> neuron_step(const TransformTuple& t, std::size_t i, double eps,
                                               std::uint32_t layer = 0) {
  std::vector<TransformTuple> out;
  StepCounters counters;
  neuron_step_into(t, i, eps, layer, out, counters);
  return out;
}

/// One tuple through one layer: affine update, then neurons in ascending
/// index order. Linear layers only get the affine update.
inline std::vector<TransformTuple> single_layer_output(const TransformTuple& t, const Layer& layer,
                                                       std::uint32_t layer_index, double eps,
                                                       StepCounters& counters) {
  std::vector<TransformTuple> current;
  current.push_back(affine_step(t, layer));
  if (layer.activation == Activation::Linear) return current;
  std::vector<TransformTuple> next;
  for (std::size_t i = 0; i < layer.width(); ++i) {
    next.clear();
    next.reserve(current.size() * 2);
    for (auto& tup : current) neuron_step_into(std::move(tup), i, eps, layer_index, next, counters);
    std::swap(current, next);
  }
  return current;
}

inline std::vector<TransformTuple> layer_step(const std::vector<TransformTuple>& tuples,
                                              const Layer& layer, double eps,
                                              std::uint32_t layer_index = 0,
                                              std::size_t workers = 1,
                                              StepCounters* counters = nullptr) {
  std::vector<std::vector<TransformTuple>> parts(tuples.size());
  std::vector<StepCounters> per(tuples.size());
  parallel_for(tuples.size(), workers, [&](std::size_t k) {
    parts[k] = single_layer_output(tuples[k], layer, layer_index, eps, per[k]);
  });
  std::vector<TransformTuple> out;
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  out.reserve(total);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    for (auto& t : parts[k]) out.push_back(std::move(t));
    if (counters) *counters += per[k];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Whole network

namespace detail {

inline void check_cap(std::size_t count, std::size_t cap) {
  if (count > cap) {
    throw ResourceLimitError("region count " + std::to_string(count) + " exceeds cap " +
                             std::to_string(cap));
  }
}

}  // namespace detail

/// Exact partition of `input` into linear regions, each with its affine
/// output map. Output order is the lexicographic order of the lineages with
/// the active branch first, for every strategy and worker count.
inline ReachResult reach(const Network& net, const FaceLattice& input, const ReachConfig& cfg = {}) {
  detail::require_dim(input.ambient_dim(), net.input_dim(), "input polytope");
  if (!(cfg.eps > 0.0)) throw InvalidArgument("eps must be positive");
  const auto start = std::chrono::steady_clock::now();
  const auto& layers = net.layers();
  const std::size_t workers = std::max<std::size_t>(cfg.workers, 1);

  ReachResult result;
  result.stats.per_layer_counts.assign(layers.size(), 0);
  StepCounters counters;

  std::size_t prefix = layers.size();
  if (cfg.strategy.kind == Strategy::Kind::SplitAt) {
    prefix = std::min(cfg.strategy.split_layer, layers.size());
  }

  std::vector<TransformTuple> tuples{init_tuple(input)};
  for (std::size_t k = 0; k < prefix; ++k) {
    tuples = layer_step(tuples, layers[k], cfg.eps, static_cast<std::uint32_t>(k), workers, &counters);
    result.stats.per_layer_counts[k] = tuples.size();
    detail::check_cap(tuples.size(), cfg.region_cap);
  }

  if (prefix < layers.size()) {
    // Each tuple runs the remaining layers on its own.
    std::vector<std::vector<TransformTuple>> parts(tuples.size());
    std::vector<StepCounters> per(tuples.size());
    std::vector<std::vector<std::size_t>> counts(tuples.size());
    std::atomic<std::size_t> finished{0};
    parallel_for(tuples.size(), workers, [&](std::size_t idx) {
      std::vector<TransformTuple> local{std::move(tuples[idx])};
      for (std::size_t k = prefix; k < layers.size(); ++k) {
        std::vector<TransformTuple> next;
        for (const auto& t : local) {
          auto produced = single_layer_output(t, layers[k], static_cast<std::uint32_t>(k), cfg.eps, per[idx]);
          for (auto& p : produced) next.push_back(std::move(p));
        }
        local = std::move(next);
        counts[idx].push_back(local.size());
        detail::check_cap(local.size() + finished.load(std::memory_order_relaxed), cfg.region_cap);
      }
      finished.fetch_add(local.size(), std::memory_order_relaxed);
      parts[idx] = std::move(local);
    });
    std::vector<TransformTuple> merged;
    merged.reserve(finished.load());
    for (std::size_t idx = 0; idx < parts.size(); ++idx) {
      for (std::size_t k = prefix; k < layers.size(); ++k) {
        result.stats.per_layer_counts[k] += counts[idx][k - prefix];
      }
      counters += per[idx];
      for (auto& t : parts[idx]) merged.push_back(std::move(t));
    }
    tuples = std::move(merged);
    detail::check_cap(tuples.size(), cfg.region_cap);
  }

  result.tuples = std::move(tuples);
  result.stats.region_count = result.tuples.size();
  result.stats.splits_performed = counters.splits;
  result.stats.degenerate_splits = counters.degenerate;
  result.stats.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

/// Image of each region vertex, in region vertex order.
inline std::vector<Eigen::VectorXd> output_vertices(const TransformTuple& t) {
  Eigen::MatrixXd image = t.map * t.region.vertices();
  image.colwise() += t.shift;
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(image.cols()));
  for (Eigen::Index i = 0; i < image.cols(); ++i) out.emplace_back(image.col(i));
  return out;
}

/// Evaluates the first `layers_done` layers with every ReLU forced to the
/// recorded decision instead of its sign (inactive rows are zeroed, active
/// rows pass through unclamped). Matches M x + d of the tuple owning the
/// lineage.
inline Eigen::VectorXd evaluate_with_lineage(const Network& net, const Lineage& lineage,
                                             std::size_t layers_done, const Eigen::VectorXd& x) {
  Eigen::VectorXd y = x;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < layers_done; ++k) {
    const Layer& l = net.layers()[k];
    y = l.weights * y + l.bias;
    if (l.activation == Activation::Linear) continue;
    for (; pos < lineage.size() && lineage[pos].layer == k; ++pos) {
      if (!lineage[pos].active) y(lineage[pos].neuron) = 0.0;
    }
  }
  return y;
}

}  // namespace lattice_reach
