#pragma once

#include <Eigen/Dense>

#include "lattice_reach/errors.hpp"

namespace lattice_reach {

/// The affine functional x -> normal.x + offset. As a hyperplane it is the
/// zero set; as a halfspace it is {x : normal.x + offset <= 0}.
struct Hyperplane {
  Eigen::VectorXd normal;
  double offset = 0.0;

  Hyperplane() = default;
  Hyperplane(Eigen::VectorXd n, double c) : normal(std::move(n)), offset(c) {}

  std::size_t dim() const { return static_cast<std::size_t>(normal.size()); }

  double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return normal.dot(x) + offset;
  }

  /// A zero normal describes either nothing or everything; such functionals
  /// still classify consistently (every point gets the sign of the offset).
  bool is_degenerate() const { return normal.size() == 0 || normal.cwiseAbs().maxCoeff() == 0.0; }

  /// Rejects the degenerate functional. Used where user input builds one.
  static Hyperplane checked(Eigen::VectorXd n, double c) {
    Hyperplane h(std::move(n), c);
    if (h.is_degenerate()) throw InvalidArgument("hyperplane normal must have a nonzero entry");
    return h;
  }

  Hyperplane flipped() const { return Hyperplane(-normal, -offset); }
};

/// Same representation; `contains(y)` means normal.y + offset <= tol.
struct Halfspace : Hyperplane {
  using Hyperplane::Hyperplane;
  explicit Halfspace(Hyperplane h) : Hyperplane(std::move(h)) {}

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& y, double tol = 0.0) const {
    return evaluate(y) <= tol;
  }
};

}  // namespace lattice_reach
