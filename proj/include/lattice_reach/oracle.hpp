#pragma once

// Brute-force validators for the reachability engine: linear-region
// enumeration by LP-pruned activation-pattern search, and Monte-Carlo
// sampling of the computed partition.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "lattice_reach/errors.hpp"
#include "lattice_reach/face_lattice.hpp"
#include "lattice_reach/lp.hpp"
#include "lattice_reach/network.hpp"
#include "lattice_reach/parallel.hpp"
#include "lattice_reach/reach.hpp"

namespace lattice_reach {

/// Per ReLU layer, one flag per neuron (true = active).
using ActivationPattern = std::vector<std::vector<bool>>;

struct OracleRegion {
  ActivationPattern pattern;
  Lineage lineage;
  Eigen::MatrixXd map;
  Eigen::VectorXd shift;
  Eigen::VectorXd interior_point;  // strictly inside the region
  double margin = 0.0;             // distance of interior_point to the nearest neuron hyperplane
};

struct OracleOptions {
  double slack = 1e-9;
  double eps = 1e-9;  // constant pre-activations within eps count as active
  std::size_t region_cap = 100000;
};

/// Affine map (M, d) from input to the output of the first `layers_done`
/// layers under the decisions recorded in `lineage`.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> lineage_affine_map(const Network& net, const Lineage& lineage,
                                                                      std::size_t layers_done) {
  const auto n = static_cast<Eigen::Index>(net.input_dim());
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  std::size_t pos = 0;
  for (std::size_t k = 0; k < layers_done; ++k) {
    const Layer& l = net.layers()[k];
    M = l.weights * M;
    d = l.weights * d + l.bias;
    for (; pos < lineage.size() && lineage[pos].layer == k; ++pos) {
      if (!lineage[pos].active) {
        M.row(lineage[pos].neuron).setZero();
        d(lineage[pos].neuron) = 0.0;
      }
    }
  }
  return {M, d};
}

namespace detail {

struct SignedConstraint {
  Eigen::VectorXd normal;  // unit length
  double offset;           // normal.x + offset is the scaled pre-activation
  double sign;             // +1 active, -1 inactive
};

// maximize t  s.t.  sign*(normal.x + offset) >= t, lower <= x <= upper, 0 <= t <= 1.
inline std::pair<double, Eigen::VectorXd> max_margin(const std::vector<SignedConstraint>& cons,
                                                     const Eigen::VectorXd& lower,
                                                     const Eigen::VectorXd& upper) {
  const auto n = lower.size();
  const auto m = static_cast<Eigen::Index>(cons.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m + n + 1, n + 1);
  Eigen::VectorXd b(m + n + 1);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto& c = cons[static_cast<std::size_t>(r)];
    A.row(r).head(n) = -c.sign * c.normal.transpose();
    A(r, n) = 1.0;
    b(r) = c.sign * (c.normal.dot(lower) + c.offset);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    A(m + i, i) = 1.0;
    b(m + i) = upper(i) - lower(i);
  }
  A(m + n, n) = 1.0;
  b(m + n) = 1.0;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n + 1);
  c(n) = 1.0;
  const lp::Result r = lp::maximize(c, A, b);
  if (r.status != lp::Status::Optimal) return {-1.0, Eigen::VectorXd()};
  return {r.x(n), Eigen::VectorXd(lower + r.x.head(n))};
}

struct EnumerationState {
  const Network& net;
  const Eigen::VectorXd& lower;
  const Eigen::VectorXd& upper;
  const OracleOptions& opt;
  std::vector<OracleRegion>& out;
};

inline void enumerate(EnumerationState& s, std::size_t layer, std::size_t neuron, Eigen::MatrixXd pre_map,
                      Eigen::VectorXd pre_shift, std::vector<SignedConstraint>& cons, Lineage& lineage,
                      ActivationPattern& pattern, const Eigen::VectorXd& witness, double margin) {
  const auto& layers = s.net.layers();
  if (layer == layers.size()) {
    if (s.out.size() >= s.opt.region_cap) throw ResourceLimitError("oracle region cap exceeded");
    s.out.push_back({pattern, lineage, pre_map, pre_shift, witness, margin});
    return;
  }
  const Layer& l = layers[layer];
  if (neuron == 0) {
    // Entering the layer: pre_map/pre_shift hold the previous layer's output.
    pre_map = l.weights * pre_map;
    pre_shift = l.weights * pre_shift + l.bias;
    if (l.activation == Activation::Linear) {
      enumerate(s, layer + 1, 0, std::move(pre_map), std::move(pre_shift), cons, lineage, pattern, witness, margin);
      return;
    }
    pattern.emplace_back();
  }
  if (neuron == l.width()) {
    enumerate(s, layer + 1, 0, std::move(pre_map), std::move(pre_shift), cons, lineage, pattern, witness, margin);
    return;
  }
  const auto i = static_cast<Eigen::Index>(neuron);
  const Eigen::VectorXd row = pre_map.row(i).transpose();
  const double norm = row.norm();
  auto descend = [&](bool active, const Eigen::VectorXd& w, double mg) {
    Eigen::MatrixXd m = pre_map;
    Eigen::VectorXd d = pre_shift;
    if (!active) {
      m.row(i).setZero();
      d(i) = 0.0;
    }
    lineage.push_back({static_cast<std::uint32_t>(layer), static_cast<std::uint32_t>(neuron), active});
    pattern.back().push_back(active);
    enumerate(s, layer, neuron + 1, std::move(m), std::move(d), cons, lineage, pattern, w, mg);
    lineage.pop_back();
    pattern.back().pop_back();
  };

  // Constant pre-activation over the whole input: its sign decides alone.
  const double scale = std::max({1.0, std::abs(pre_shift(i)),
                                 norm * std::max(s.lower.cwiseAbs().maxCoeff(), s.upper.cwiseAbs().maxCoeff())});
  if (norm <= 1e-14 * scale) {
    descend(pre_shift(i) >= -s.opt.eps * scale, witness, margin);
  } else {
    for (bool active : {true, false}) {
      cons.push_back({row / norm, pre_shift(i) / norm, active ? 1.0 : -1.0});
      auto [t, x] = max_margin(cons, s.lower, s.upper);
      if (t > s.opt.slack) descend(active, x, t);
      cons.pop_back();
    }
  }
  if (neuron == 0) pattern.pop_back();
}

}  // namespace detail

/// Every full-dimensional linear region of `net` over the box, in the same
/// order the reachability engine emits them (active branch first).
inline std::vector<OracleRegion> enumerate_regions_lp(const Network& net, const Eigen::VectorXd& lower,
                                                      const Eigen::VectorXd& upper, const OracleOptions& opt = {}) {
  detail::require_dim(static_cast<std::size_t>(lower.size()), net.input_dim(), "oracle box");
  detail::require_dim(static_cast<std::size_t>(upper.size()), net.input_dim(), "oracle box");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!(lower(i) < upper(i))) throw InvalidArgument("oracle box must be full-dimensional");
  }
  std::vector<OracleRegion> out;
  detail::EnumerationState s{net, lower, upper, opt, out};
  const auto n = static_cast<Eigen::Index>(net.input_dim());
  std::vector<detail::SignedConstraint> cons;
  Lineage lineage;
  ActivationPattern pattern;
  const Eigen::VectorXd mid = (lower + upper) / 2;
  detail::enumerate(s, 0, 0, Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n), cons, lineage, pattern,
                    mid, (upper - lower).minCoeff() / 2);
  return out;
}

// ---------------------------------------------------------------------------
// Sampling check

struct SampleReport {
  std::size_t samples = 0;
  std::size_t uncovered = 0;
  std::size_t multi_covered_interior = 0;
  std::size_t deviation_failures = 0;
  double max_deviation = 0.0;  // relative, over covering regions

  bool passed() const { return uncovered == 0 && multi_covered_interior == 0 && deviation_failures == 0; }

  nlohmann::json to_json() const {
    return {{"samples", samples},
            {"uncovered", uncovered},
            {"multi_covered_interior", multi_covered_interior},
            {"deviation_failures", deviation_failures},
            {"max_deviation", max_deviation},
            {"passed", passed()}};
  }
};

/// Draws `n` uniform points from [lower, upper] (network units) and checks
/// each lies in some region whose affine map reproduces the forward pass
/// within `tol` (relative).
inline SampleReport sample_check(const Network& net, const ReachResult& result, const Eigen::VectorXd& lower,
                                 const Eigen::VectorXd& upper, std::size_t n, std::uint64_t seed, double tol,
                                 std::size_t workers = 1) {
  detail::require_dim(static_cast<std::size_t>(lower.size()), net.input_dim(), "sample box");
  SampleReport report;
  report.samples = n;
  if (n == 0) return report;

  std::mt19937_64 rng(seed);
  std::vector<Eigen::VectorXd> xs(n);
  for (auto& x : xs) {
    x.resize(lower.size());
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
      x(i) = std::uniform_real_distribution<double>(lower(i), upper(i))(rng);
      if (lower(i) == upper(i)) x(i) = lower(i);
    }
  }

  const std::size_t r = result.tuples.size();
  std::vector<Eigen::VectorXd> lo(r), hi(r);
  for (std::size_t k = 0; k < r; ++k) {
    lo[k] = result.tuples[k].region.vertices().rowwise().minCoeff();
    hi[k] = result.tuples[k].region.vertices().rowwise().maxCoeff();
  }

  struct Outcome {
    bool covered = false;
    bool multi_interior = false;
    bool failed = false;
    double deviation = 0.0;
  };
  std::vector<Outcome> outcome(n);
  parallel_for(n, workers, [&](std::size_t s) {
    const Eigen::VectorXd& x = xs[s];
    const Eigen::VectorXd y = forward(net, x);
    const double yscale = std::max(1.0, y.cwiseAbs().maxCoeff());
    std::vector<std::size_t> covering;
    for (std::size_t k = 0; k < r; ++k) {
      if (((x - lo[k]).array() < -tol).any() || ((hi[k] - x).array() < -tol).any()) continue;
      if (!contains_point(result.tuples[k].region, x, tol)) continue;
      covering.push_back(k);
      const auto& t = result.tuples[k];
      const double dev = (t.map * x + t.shift - y).cwiseAbs().maxCoeff() / yscale;
      outcome[s].deviation = std::max(outcome[s].deviation, dev);
    }
    outcome[s].covered = !covering.empty();
    outcome[s].failed = outcome[s].deviation > tol;
    // Several covering regions are fine when x sits on the hyperplane that
    // separates them.
    for (std::size_t a = 1; a < covering.size() && !outcome[s].multi_interior; ++a) {
      const Lineage& la = result.tuples[covering[0]].lineage;
      const Lineage& lb = result.tuples[covering[a]].lineage;
      std::size_t p = 0;
      while (p < la.size() && p < lb.size() && la[p] == lb[p]) ++p;
      if (p >= la.size() || p >= lb.size()) continue;
      const Lineage prefix(la.begin(), la.begin() + static_cast<std::ptrdiff_t>(p));
      const Layer& layer = net.layers()[la[p].layer];
      auto [M, d] = lineage_affine_map(net, prefix, la[p].layer);
      const auto row = static_cast<Eigen::Index>(la[p].neuron);
      const Eigen::VectorXd grad = (layer.weights * M).row(row).transpose();
      const double z = grad.dot(x) + (layer.weights * d + layer.bias)(row);
      const double g = grad.norm();
      const bool on_boundary = g == 0.0 || std::abs(z) / g <= 10.0 * tol * (1.0 + x.norm());
      if (!on_boundary) outcome[s].multi_interior = true;
    }
  });
  for (const auto& o : outcome) {
    report.uncovered += !o.covered;
    report.multi_covered_interior += o.multi_interior;
    report.deviation_failures += o.failed;
    report.max_deviation = std::max(report.max_deviation, o.deviation);
  }
  return report;
}

}  // namespace lattice_reach
