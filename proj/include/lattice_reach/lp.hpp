#pragma once

// Small dense two-phase simplex. Sized for the feasibility questions the
// library asks (tens of rows, a few hundred columns); not a general solver.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace lattice_reach::lp {

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Options {
  double pivot_tol = 1e-11;
  double feasibility_tol = 1e-9;
  std::size_t max_iterations = 100000;
  // Consecutive degenerate pivots before switching from Dantzig to Bland.
  std::size_t degenerate_switch = 50;
};

struct Result {
  Status status = Status::Infeasible;
  double objective = 0.0;
  // Optimal value of the phase-one problem (sum of artificial variables).
  double infeasibility = 0.0;
  Eigen::VectorXd x;
};

namespace detail {

class Tableau {
 public:
  Tableau(const Eigen::MatrixXd& A, const Eigen::VectorXd& b)
      : rows_(A.rows()), cols_(A.cols()), t_(A.rows() + 1, A.cols() + A.rows() + 1),
        basis_(static_cast<std::size_t>(A.rows())) {
    t_.setZero();
    for (Eigen::Index i = 0; i < rows_; ++i) {
      const double sign = b(i) < 0.0 ? -1.0 : 1.0;
      t_.row(i).head(cols_) = sign * A.row(i);
      t_(i, cols_ + i) = 1.0;
      t_(i, rhs()) = sign * b(i);
      basis_[static_cast<std::size_t>(i)] = cols_ + i;
    }
  }

  Eigen::Index rhs() const { return cols_ + rows_; }
  Eigen::Index total_columns() const { return cols_ + rows_; }

  bool is_artificial(Eigen::Index j) const { return j >= cols_; }

  // Loads the reduced-cost row for `cost` (length total_columns()).
  void set_cost(const Eigen::VectorXd& cost) {
    t_.row(rows_).head(total_columns()) = cost.transpose();
    t_(rows_, rhs()) = 0.0;
    for (Eigen::Index i = 0; i < rows_; ++i) {
      const double cb = cost(basis_[static_cast<std::size_t>(i)]);
      if (cb != 0.0) t_.row(rows_) -= cb * t_.row(i);
    }
  }

  double objective() const { return -t_(rows_, rhs()); }

  void pivot(Eigen::Index r, Eigen::Index j) {
    t_.row(r) /= t_(r, j);
    for (Eigen::Index i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      const double f = t_(i, j);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = j;
  }

  Status optimize(const Options& opt, bool allow_artificial_entry) {
    std::size_t degenerate_run = 0;
    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
      const bool bland = degenerate_run >= opt.degenerate_switch;
      Eigen::Index enter = -1;
      double best = -opt.pivot_tol;
      const Eigen::Index limit = allow_artificial_entry ? total_columns() : cols_;
      for (Eigen::Index j = 0; j < limit; ++j) {
        const double rc = t_(rows_, j);
        if (rc < best) {
          enter = j;
          if (bland) break;
          best = rc;
        }
      }
      if (enter < 0) return Status::Optimal;

      Eigen::Index leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < rows_; ++i) {
        const double a = t_(i, enter);
        if (a <= opt.pivot_tol) continue;
        const double q = std::max(t_(i, rhs()), 0.0) / a;
        if (q < ratio - 1e-15 ||
            (q <= ratio + 1e-15 && leave >= 0 &&
             basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          ratio = q;
          leave = i;
        }
      }
      if (leave < 0) return Status::Unbounded;
      degenerate_run = ratio <= 1e-15 ? degenerate_run + 1 : 0;
      pivot(leave, enter);
    }
    return Status::IterationLimit;
  }

  // After phase one: move artificial variables out of the basis where a
  // structural column can replace them. Rows that cannot be repaired are
  // redundant and keep a zero-level artificial.
  void expel_artificials(const Options& opt) {
    for (Eigen::Index i = 0; i < rows_; ++i) {
      if (!is_artificial(basis_[static_cast<std::size_t>(i)])) continue;
      Eigen::Index col = -1;
      double best = opt.pivot_tol;
      for (Eigen::Index j = 0; j < cols_; ++j) {
        if (std::abs(t_(i, j)) > best) {
          best = std::abs(t_(i, j));
          col = j;
        }
      }
      if (col >= 0) pivot(i, col);
    }
  }

  Eigen::VectorXd primal() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(cols_);
    for (Eigen::Index i = 0; i < rows_; ++i) {
      const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
      if (j < cols_) x(j) = std::max(t_(i, rhs()), 0.0);
    }
    return x;
  }

 private:
  Eigen::Index rows_;
  Eigen::Index cols_;
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
};

inline Eigen::VectorXd phase_one_cost(Eigen::Index cols, Eigen::Index rows) {
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols + rows);
  cost.tail(rows).setOnes();
  return cost;
}

}  // namespace detail

/// Phase-one only: the minimum of sum|A x - b| over x >= 0, realised through
/// artificial variables. Zero (up to rounding) iff {A x = b, x >= 0} is feasible.
inline double feasibility_residual(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                   const Options& opt = {}) {
  detail::Tableau tab(A, b);
  tab.set_cost(detail::phase_one_cost(A.cols(), A.rows()));
  if (tab.optimize(opt, true) == Status::IterationLimit) {
    return std::numeric_limits<double>::infinity();
  }
  return std::max(tab.objective(), 0.0);
}

/// minimize c.x  subject to  A x = b, x >= 0.
inline Result minimize(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                       const Eigen::VectorXd& c, const Options& opt = {}) {
  Result res;
  detail::Tableau tab(A, b);
  tab.set_cost(detail::phase_one_cost(A.cols(), A.rows()));
  const Status p1 = tab.optimize(opt, true);
  if (p1 == Status::IterationLimit) {
    res.status = p1;
    return res;
  }
  res.infeasibility = std::max(tab.objective(), 0.0);
  if (res.infeasibility > opt.feasibility_tol) {
    res.status = Status::Infeasible;
    return res;
  }
  tab.expel_artificials(opt);
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(tab.total_columns());
  cost.head(A.cols()) = c;
  tab.set_cost(cost);
  res.status = tab.optimize(opt, false);
  res.x = tab.primal();
  res.objective = c.dot(res.x);
  return res;
}

/// maximize c.x  subject to  A x <= b, x >= 0. Slack columns are appended.
inline Result maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                       const Eigen::VectorXd& b, const Options& opt = {}) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  Eigen::MatrixXd std_a(m, n + m);
  std_a << A, Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(n + m);
  cost.head(n) = -c;
  Result r = minimize(std_a, b, cost, opt);
  if (r.status == Status::Optimal) {
    r.x = r.x.head(n).eval();
    r.objective = c.dot(r.x);
  }
  return r;
}

}  // namespace lattice_reach::lp
