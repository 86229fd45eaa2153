#pragma once

// Safety checking of computed reachable sets against linear unsafe output
// sets, and extraction of every input polytope that reaches them.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lattice_reach/errors.hpp"
#include "lattice_reach/face_lattice.hpp"
#include "lattice_reach/hyperplane.hpp"
#include "lattice_reach/network.hpp"
#include "lattice_reach/parallel.hpp"
#include "lattice_reach/reach.hpp"

namespace lattice_reach {

/// Union of conjunctions of output halfspaces a.y + c <= 0.
struct UnsafeSet {
  std::vector<std::vector<Halfspace>> disjuncts;

  std::size_t output_dim() const { return disjuncts.at(0).at(0).dim(); }

  void validate(std::size_t output_dim) const {
    if (disjuncts.empty()) throw InvalidArgument("unsafe set needs at least one disjunct");
    for (const auto& conj : disjuncts) {
      if (conj.empty()) throw InvalidArgument("unsafe disjunct needs at least one halfspace");
      for (const auto& h : conj) detail::require_dim(h.dim(), output_dim, "unsafe halfspace");
    }
  }

  bool contains(const Eigen::VectorXd& y, double tol) const {
    for (const auto& conj : disjuncts) {
      bool all = true;
      for (const auto& h : conj) all = all && h.contains(y, tol);
      if (all) return true;
    }
    return false;
  }
};

struct Property {
  std::string name;
  Eigen::VectorXd input_lower;
  Eigen::VectorXd input_upper;
  UnsafeSet unsafe;
  // True when bounds and constraints are already in network units.
  bool normalized = false;
};

struct Verdict {
  enum class Status { Sat, Unsat };
  Status status = Status::Unsat;
  std::optional<Eigen::VectorXd> witness;  // network-space input
  bool witness_verified = false;
  std::vector<FaceLattice> unsafe_regions;

  bool sat() const { return status == Status::Sat; }
};

inline Halfspace map_back_halfspace(const TransformTuple& t, const Halfspace& h) {
  detail::require_dim(h.dim(), static_cast<std::size_t>(t.map.rows()), "unsafe halfspace");
  return Halfspace(Eigen::VectorXd(t.map.transpose() * h.normal), h.normal.dot(t.shift) + h.offset);
}

/// Bounds and constraints expressed in the network's own units. When
/// `normalize` is set the input box is pushed through the NNet input scaling
/// and each halfspace is rewritten against raw outputs y*range + mean.
inline Property to_network_space(const Network& net, const Property& p, bool normalize) {
  detail::require_dim(static_cast<std::size_t>(p.input_lower.size()), net.input_dim(), "property lower bound");
  detail::require_dim(static_cast<std::size_t>(p.input_upper.size()), net.input_dim(), "property upper bound");
  p.unsafe.validate(net.output_dim());
  if (!normalize || !net.normalization()) return p;
  Property q = p;
  q.normalized = true;
  q.input_lower = normalize_input(net, p.input_lower);
  q.input_upper = normalize_input(net, p.input_upper);
  const auto& z = *net.normalization();
  for (auto& conj : q.unsafe.disjuncts) {
    for (auto& h : conj) {
      const double shift = h.normal.sum() * z.output_mean();
      h.normal *= z.output_range();
      h.offset += shift;
    }
  }
  return q;
}

namespace detail {

// Survivor of one conjunction inside one region, or nothing.
inline std::optional<FaceLattice> cut_to_conjunction(const TransformTuple& t,
                                                     const std::vector<Halfspace>& conj, double eps) {
  FaceLattice region = t.region;
  for (const auto& h : conj) {
    const Halfspace mapped = map_back_halfspace(t, h);
    const auto cls = classify_relative(region, mapped, eps);
    if (cls.negative.empty() && cls.positive.empty()) continue;  // on the boundary
    if (cls.negative.empty()) return std::nullopt;  // outside, at most touching
    if (cls.positive.empty()) continue;
    region = std::get<Divided>(split(region, cls)).negative;
  }
  return region;
}

}  // namespace detail

struct UnsafeRegion {
  FaceLattice region;
  std::size_t tuple_index = 0;
  std::size_t disjunct = 0;
};

/// Every input polytope whose image meets the unsafe set, ordered by region
/// then disjunct.
inline std::vector<UnsafeRegion> unsafe_regions(const ReachResult& result, const UnsafeSet& unsafe,
                                                double eps, std::size_t workers = 1) {
  if (!result.tuples.empty()) unsafe.validate(static_cast<std::size_t>(result.tuples[0].map.rows()));
  std::vector<std::vector<UnsafeRegion>> per(result.tuples.size());
  parallel_for(result.tuples.size(), workers, [&](std::size_t k) {
    for (std::size_t j = 0; j < unsafe.disjuncts.size(); ++j) {
      if (auto r = detail::cut_to_conjunction(result.tuples[k], unsafe.disjuncts[j], eps)) {
        per[k].push_back({std::move(*r), k, j});
      }
    }
  });
  std::vector<UnsafeRegion> out;
  for (auto& v : per) {
    for (auto& r : v) out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<FaceLattice> extract_unsafe_inputs(const Network& /*net*/, const ReachResult& result,
                                                      const UnsafeSet& unsafe, double eps,
                                                      std::size_t workers = 1) {
  std::vector<FaceLattice> out;
  for (auto& r : unsafe_regions(result, unsafe, eps, workers)) out.push_back(std::move(r.region));
  return out;
}

/// Relative slack allowed when re-checking a witness by forward evaluation.
inline constexpr double kWitnessTolerance = 1e-7;

/// SAT iff some region survives. The witness is the vertex of the first
/// surviving region that lies deepest inside its disjunct; it is re-checked
/// with a plain forward pass.
inline Verdict check_property(const Network& net, const ReachResult& result, const UnsafeSet& unsafe,
                              double eps, std::size_t workers = 1) {
  Verdict v;
  auto regions = unsafe_regions(result, unsafe, eps, workers);
  if (regions.empty()) return v;
  v.status = Verdict::Status::Sat;
  const UnsafeRegion& first = regions.front();
  const auto& conj = unsafe.disjuncts[first.disjunct];
  const TransformTuple& t = result.tuples[first.tuple_index];
  double best = -std::numeric_limits<double>::infinity();
  for (FaceId i = 0; i < first.region.vertex_count(); ++i) {
    const Eigen::VectorXd x = first.region.vertex(i);
    const Eigen::VectorXd y = t.map * x + t.shift;
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& h : conj) margin = std::min(margin, -h.evaluate(y));
    if (margin > best) {
      best = margin;
      v.witness = x;
    }
  }
  const Eigen::VectorXd y = forward(net, *v.witness);
  const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  v.witness_verified = unsafe.contains(y, kWitnessTolerance * scale);
  for (auto& r : regions) v.unsafe_regions.push_back(std::move(r.region));
  return v;
}

// ---------------------------------------------------------------------------
// Built-in ACAS Xu properties, raw units. Upper/lower limits that the
// original definitions leave open are the network input ranges.

namespace detail {

inline constexpr double kPi = 3.141593;

// "COC is minimal": y0 - yj <= 0 for all j != 0.
inline UnsafeSet coc_minimal() {
  std::vector<Halfspace> conj;
  for (int j = 1; j < 5; ++j) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(5);
    a(0) = 1.0;
    a(j) = -1.0;
    conj.emplace_back(a, 0.0);
  }
  return {{conj}};
}

// "COC is maximal": yj - y0 <= 0 for all j != 0.
inline UnsafeSet coc_maximal() {
  UnsafeSet s = coc_minimal();
  for (auto& h : s.disjuncts[0]) h.normal = -h.normal;
  return s;
}

inline Eigen::VectorXd vec5(double a, double b, double c, double d, double e) {
  Eigen::VectorXd v(5);
  v << a, b, c, d, e;
  return v;
}

}  // namespace detail

inline std::vector<std::string> builtin_property_names() { return {"phi1", "phi2", "phi3", "phi4"}; }

inline Property builtin_property(const std::string& name) {
  using detail::kPi;
  using detail::vec5;
  Property p;
  p.name = name;
  p.normalized = false;
  if (name == "phi1" || name == "phi2") {
    p.input_lower = vec5(55947.691, -kPi, -kPi, 1145.0, 0.0);
    p.input_upper = vec5(60760.0, kPi, kPi, 1200.0, 60.0);
    if (name == "phi1") {
      // Clear-of-conflict score at least 1500.
      Eigen::VectorXd a = Eigen::VectorXd::Zero(5);
      a(0) = -1.0;
      p.unsafe = {{{Halfspace(a, 1500.0)}}};
    } else {
      p.unsafe = detail::coc_maximal();
    }
  } else if (name == "phi3") {
    p.input_lower = vec5(1500.0, -0.06, 3.10, 980.0, 960.0);
    p.input_upper = vec5(1800.0, 0.06, kPi, 1200.0, 1200.0);
    p.unsafe = detail::coc_minimal();
  } else if (name == "phi4") {
    p.input_lower = vec5(1500.0, -0.06, 0.0, 1000.0, 700.0);
    p.input_upper = vec5(1800.0, 0.06, 0.0, 1200.0, 800.0);
    p.unsafe = detail::coc_minimal();
  } else {
    throw InvalidArgument("unknown built-in property '" + name + "'");
  }
  return p;
}

// ---------------------------------------------------------------------------
// Property JSON

inline Property property_from_json(const nlohmann::json& j) {
  try {
    Property p;
    p.name = j.value("name", std::string("property"));
    p.input_lower = detail::to_vector(j.at("input_lower").get<std::vector<double>>());
    p.input_upper = detail::to_vector(j.at("input_upper").get<std::vector<double>>());
    p.normalized = j.value("normalized", false);
    for (const auto& jd : j.at("unsafe")) {
      std::vector<Halfspace> conj;
      for (const auto& jh : jd) {
        conj.emplace_back(detail::to_vector(jh.at("a").get<std::vector<double>>()), jh.at("c").get<double>());
      }
      p.unsafe.disjuncts.push_back(std::move(conj));
    }
    detail::require_dim(static_cast<std::size_t>(p.input_upper.size()),
                        static_cast<std::size_t>(p.input_lower.size()), "input_upper");
    if (p.unsafe.disjuncts.empty()) throw ParseError("property JSON: empty unsafe set", 0);
    p.unsafe.validate(p.unsafe.output_dim());
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("property JSON: ") + e.what(), 0);
  }
}

inline nlohmann::json property_to_json(const Property& p) {
  nlohmann::json unsafe = nlohmann::json::array();
  for (const auto& conj : p.unsafe.disjuncts) {
    nlohmann::json jc = nlohmann::json::array();
    for (const auto& h : conj) {
      jc.push_back({{"a", std::vector<double>(h.normal.begin(), h.normal.end())}, {"c", h.offset}});
    }
    unsafe.push_back(jc);
  }
  return {{"name", p.name},
          {"input_lower", std::vector<double>(p.input_lower.begin(), p.input_lower.end())},
          {"input_upper", std::vector<double>(p.input_upper.begin(), p.input_upper.end())},
          {"unsafe", unsafe},
          {"normalized", p.normalized}};
}

}  // namespace lattice_reach
