#pragma once

// Dense bounded-variable primal simplex.
//
// Maximizes c.x subject to rows A_i.x {<=,=,>=} b_i and lower <= x <= upper.
// Two phases: phase one minimizes the sum of artificial variables placed on
// rows whose slack cannot absorb the initial residual, phase two optimizes
// the real objective from the feasible basis. Pricing is Dantzig's rule
// until a run of degenerate pivots (or the pivot-count threshold) is hit,
// after which entering columns follow Bland's smallest-index rule until the
// next nondegenerate step. The ratio test is Harris's two-pass test, and the
// tableau is rebuilt from an LU factorization of the basis periodically and
// after any small pivot.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "matchain/error.hpp"

namespace matchain {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { LessEqual, Equal, GreaterEqual };

struct LPProblem {
  std::vector<double> objective;  // maximized
  Eigen::MatrixXd constraints;    // rows x variables
  std::vector<RowSense> senses;
  std::vector<double> rhs;
  std::vector<double> lower;  // empty means all 0
  std::vector<double> upper;  // empty means all +inf

  [[nodiscard]] std::size_t num_vars() const { return objective.size(); }
  [[nodiscard]] std::size_t num_rows() const { return rhs.size(); }

  void validate() const {
    const auto n = static_cast<Eigen::Index>(objective.size());
    const auto m = static_cast<Eigen::Index>(rhs.size());
    if (constraints.rows() != m || static_cast<Eigen::Index>(senses.size()) != m) {
      throw DimensionError("LPProblem: constraint rows, senses and rhs must have equal length");
    }
    if (m > 0 && constraints.cols() != n) {
      throw DimensionError("LPProblem: constraint matrix column count differs from objective length");
    }
    if ((!lower.empty() && lower.size() != objective.size()) ||
        (!upper.empty() && upper.size() != objective.size())) {
      throw DimensionError("LPProblem: bound vectors must match objective length");
    }
    for (std::size_t j = 0; j < objective.size(); ++j) {
      const double lo = lower.empty() ? 0.0 : lower[j];
      const double hi = upper.empty() ? kInf : upper[j];
      if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
        throw PreconditionError("LPProblem: variable " + std::to_string(j) + " has lower > upper");
      }
    }
  }
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LPStatus s) {
  switch (s) {
    case LPStatus::Optimal: return "optimal";
    case LPStatus::Infeasible: return "infeasible";
    case LPStatus::Unbounded: return "unbounded";
  }
  return "?";
}

struct LPSolution {
  LPStatus status = LPStatus::Infeasible;
  double objective_value = 0.0;
  std::vector<double> primal;
  std::size_t pivots = 0;
};

struct LPOptions {
  double feasibility_tol = 1e-7;
  double pivot_tol = 1e-9;
  double optimality_tol = 1e-9;
  // Consecutive degenerate pivots tolerated before switching to Bland's rule.
  std::size_t degenerate_streak_limit = 1000;
  // Total pivots in a phase before switching to Bland's rule (0: 20*(rows+cols)).
  std::size_t bland_after = 0;
  // Hard cap on pivots over both phases (0: 200*(rows+cols) + 1000).
  std::size_t max_pivots = 0;
};

namespace detail {

class BoundedSimplex {
 public:
  BoundedSimplex(const LPProblem& problem, const LPOptions& options)
      : opt_(options),
        m_(static_cast<Eigen::Index>(problem.num_rows())),
        n_(static_cast<Eigen::Index>(problem.num_vars())) {
    setup(problem);
  }

  LPSolution run(const std::vector<double>& objective) {
    LPSolution sol;
    if (num_art_ > 0) {
      std::vector<double> phase_one(static_cast<std::size_t>(ncols_), 0.0);
      for (Eigen::Index j = n_ + m_; j < ncols_; ++j) phase_one[static_cast<std::size_t>(j)] = -1.0;
      if (!optimize(phase_one)) throw NumericalError("simplex phase one reported an unbounded ray");
      settle();
      double infeasibility = 0.0;
      for (Eigen::Index j = n_ + m_; j < ncols_; ++j) infeasibility = std::max(infeasibility, x_[j]);
      if (infeasibility > opt_.feasibility_tol) {
        sol.status = LPStatus::Infeasible;
        sol.pivots = pivots_;
        return sol;
      }
      expel_artificials();
    }

    std::vector<double> phase_two(static_cast<std::size_t>(ncols_), 0.0);
    for (Eigen::Index j = 0; j < n_; ++j) phase_two[static_cast<std::size_t>(j)] = objective[static_cast<std::size_t>(j)];
    const bool bounded = optimize(phase_two);
    settle();
    sol.pivots = pivots_;
    if (!bounded) {
      sol.status = LPStatus::Unbounded;
      sol.objective_value = kInf;
      return sol;
    }
    if (!x_.allFinite() || basic_violation() > 100.0 * opt_.feasibility_tol) {
      throw NumericalError("simplex basis lost feasibility (violation " + std::to_string(basic_violation()) + ")");
    }
    sol.status = LPStatus::Optimal;
    sol.primal.assign(x_.data(), x_.data() + n_);
    for (Eigen::Index j = 0; j < n_; ++j) {
      // Snap values that drifted marginally outside their bounds.
      sol.primal[static_cast<std::size_t>(j)] = std::clamp(sol.primal[static_cast<std::size_t>(j)], lo_[j], hi_[j]);
      sol.objective_value += objective[static_cast<std::size_t>(j)] * sol.primal[static_cast<std::size_t>(j)];
    }
    return sol;
  }

 private:
  using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  void setup(const LPProblem& p) {
    // Columns: structural [0,n), slacks [n,n+m), artificials [n+m, ...).
    std::vector<double> art_sign(static_cast<std::size_t>(m_), 0.0);
    lo_.resize(n_ + m_);
    hi_.resize(n_ + m_);
    x_.setZero(n_ + m_);
    for (Eigen::Index j = 0; j < n_; ++j) {
      lo_[j] = p.lower.empty() ? 0.0 : p.lower[static_cast<std::size_t>(j)];
      hi_[j] = p.upper.empty() ? kInf : p.upper[static_cast<std::size_t>(j)];
      if (std::isfinite(lo_[j])) {
        x_[j] = lo_[j];
      } else if (std::isfinite(hi_[j])) {
        x_[j] = hi_[j];
      }
    }
    b_ = Eigen::Map<const Eigen::VectorXd>(p.rhs.data(), m_);
    const Eigen::VectorXd activity = m_ > 0 ? Eigen::VectorXd(p.constraints * x_.head(n_)) : Eigen::VectorXd();

    basis_.assign(static_cast<std::size_t>(m_), -1);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index s = n_ + i;
      switch (p.senses[static_cast<std::size_t>(i)]) {
        case RowSense::LessEqual: lo_[s] = 0.0; hi_[s] = kInf; break;
        case RowSense::GreaterEqual: lo_[s] = -kInf; hi_[s] = 0.0; break;
        case RowSense::Equal: lo_[s] = 0.0; hi_[s] = 0.0; break;
      }
      const double residual = b_[i] - activity[i];
      const double clamped = std::clamp(residual, lo_[s], hi_[s]);
      x_[s] = clamped;
      if (residual == clamped) {
        basis_[static_cast<std::size_t>(i)] = s;
      } else {
        art_sign[static_cast<std::size_t>(i)] = residual > clamped ? 1.0 : -1.0;
        ++num_art_;
      }
    }

    ncols_ = n_ + m_ + num_art_;
    lo_.conservativeResize(ncols_);
    hi_.conservativeResize(ncols_);
    x_.conservativeResize(ncols_);
    full_.setZero(m_, ncols_);
    if (m_ > 0) {
      full_.leftCols(n_) = p.constraints;
      full_.middleCols(n_, m_).setIdentity();
    }
    Eigen::Index a = n_ + m_;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double sign = art_sign[static_cast<std::size_t>(i)];
      if (sign == 0.0) continue;
      full_(i, a) = sign;
      lo_[a] = 0.0;
      hi_[a] = kInf;
      x_[a] = std::abs(b_[i] - activity[i] - x_[n_ + i]);
      basis_[static_cast<std::size_t>(i)] = a;
      ++a;
    }

    t_ = full_;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double sign = art_sign[static_cast<std::size_t>(i)];
      if (sign != 0.0) t_.row(i) /= sign;
    }
    row_of_.assign(static_cast<std::size_t>(ncols_), -1);
    for (Eigen::Index i = 0; i < m_; ++i) row_of_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] = i;

    const std::size_t size = static_cast<std::size_t>(m_ + ncols_);
    bland_after_ = opt_.bland_after ? opt_.bland_after : 20 * size;
    max_pivots_ = opt_.max_pivots ? opt_.max_pivots : 200 * size + 1000;
    refactor_every_ = static_cast<std::size_t>(std::max<Eigen::Index>(50, m_));
  }

  void compute_reduced_costs() {
    d_ = cost_;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double cb = cost_[basis_[static_cast<std::size_t>(i)]];
      if (cb != 0.0) d_.noalias() -= cb * t_.row(i).transpose();
    }
  }

  // B^{-1} is the slack block of the tableau, since the original slack columns form I.
  void recompute_basics() {
    if (m_ == 0) return;
    Eigen::VectorXd xn = x_;
    for (Eigen::Index i = 0; i < m_; ++i) xn[basis_[static_cast<std::size_t>(i)]] = 0.0;
    const Eigen::VectorXd r = b_ - full_ * xn;
    const Eigen::VectorXd xb = t_.middleCols(n_, m_) * r;
    for (Eigen::Index i = 0; i < m_; ++i) x_[basis_[static_cast<std::size_t>(i)]] = xb[i];
  }

  // Recomputes basic values; rebuilds the tableau if they have drifted.
  void settle() {
    recompute_basics();
    if (!x_.allFinite() || basic_violation() > opt_.feasibility_tol) refactor();
  }

  [[nodiscard]] double basic_violation() const {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index b = basis_[static_cast<std::size_t>(i)];
      worst = std::max({worst, lo_[b] - x_[b], x_[b] - hi_[b]});
    }
    return worst;
  }

  // Returns false when the objective is unbounded along some ray.
  bool optimize(const std::vector<double>& cost) {
    cost_ = Eigen::Map<const Eigen::VectorXd>(cost.data(), ncols_);
    compute_reduced_costs();
    std::size_t streak = 0;
    std::size_t phase_pivots = 0;
    for (;;) {
      if (pivots_ >= max_pivots_) {
        throw IterationLimitError("simplex pivot limit reached (" + std::to_string(max_pivots_) + ")");
      }
      // Smallest-index pricing only while stalled.
      const bool bland = streak > opt_.degenerate_streak_limit || phase_pivots > bland_after_;

      Eigen::Index enter = -1;
      double dir = 0.0;
      double best = 0.0;
      for (Eigen::Index j = 0; j < ncols_; ++j) {
        if (row_of_[static_cast<std::size_t>(j)] >= 0) continue;
        const double dj = d_[j];
        double dj_dir = 0.0;
        if (dj > opt_.optimality_tol && x_[j] < hi_[j]) {
          dj_dir = 1.0;
        } else if (dj < -opt_.optimality_tol && x_[j] > lo_[j]) {
          dj_dir = -1.0;
        } else {
          continue;
        }
        if (bland) {
          enter = j;
          dir = dj_dir;
          break;
        }
        if (std::abs(dj) > best) {
          best = std::abs(dj);
          enter = j;
          dir = dj_dir;
        }
      }
      if (enter < 0) return true;

      double theta = hi_[enter] - lo_[enter];
      const Eigen::Index leave = ratio_test_harris(enter, dir, theta);
      bool leave_to_lower = false;
      if (leave >= 0) leave_to_lower = -dir * t_(leave, enter) < 0.0;
      if (!std::isfinite(theta)) return false;

      if (theta > 0.0) {
        x_[enter] += dir * theta;
        for (Eigen::Index i = 0; i < m_; ++i) {
          const double a = t_(i, enter);
          if (a != 0.0) x_[basis_[static_cast<std::size_t>(i)]] -= dir * theta * a;
        }
      }
      ++pivots_;
      ++phase_pivots;
      streak = theta <= 1e-12 ? streak + 1 : 0;

      if (leave < 0) {
        x_[enter] = dir > 0 ? hi_[enter] : lo_[enter];  // bound flip
        continue;
      }
      const Eigen::Index out = basis_[static_cast<std::size_t>(leave)];
      x_[out] = leave_to_lower ? lo_[out] : hi_[out];
      const double piv = std::abs(t_(leave, enter));
      pivot(leave, enter);
      if (++since_refactor_ >= refactor_every_ || piv < kRefactorPivot) refactor();
    }
  }

  // Distance basic row i can move before hitting the bound it approaches at
  // unit entering step in direction dir; +inf if unbounded that way.
  [[nodiscard]] double slack_to_bound(Eigen::Index i, Eigen::Index enter, double dir, double relax) const {
    const double a = t_(i, enter);
    const Eigen::Index bvar = basis_[static_cast<std::size_t>(i)];
    const double rate = -dir * a;
    if (rate < 0.0) {
      if (!std::isfinite(lo_[bvar])) return kInf;
      return std::max(0.0, x_[bvar] - lo_[bvar] + relax) / -rate;
    }
    if (!std::isfinite(hi_[bvar])) return kInf;
    return std::max(0.0, hi_[bvar] - x_[bvar] + relax) / rate;
  }

  // Entries below this are treated as zero in the ratio tests. Relative to
  // the column so that tableau growth does not admit noise as a pivot.
  [[nodiscard]] double pivot_floor(Eigen::Index enter) const {
    const double scale = m_ > 0 ? t_.col(enter).cwiseAbs().maxCoeff() : 0.0;
    return std::max(opt_.pivot_tol, kRelativePivot * scale);
  }

  // Two-pass Harris test: bound the step with feasibility-relaxed ratios,
  // then take the largest pivot among rows blocking within that step.
  Eigen::Index ratio_test_harris(Eigen::Index enter, double dir, double& theta) const {
    double relaxed = kInf;
    const double floor = pivot_floor(enter);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (std::abs(t_(i, enter)) <= floor) continue;
      relaxed = std::min(relaxed, slack_to_bound(i, enter, dir, opt_.feasibility_tol));
    }
    if (theta <= relaxed) return -1;  // bound flip (or unbounded when theta is inf)
    Eigen::Index leave = -1;
    double best_pivot = 0.0;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double a = std::abs(t_(i, enter));
      if (a <= floor) continue;
      const double limit = slack_to_bound(i, enter, dir, 0.0);
      if (limit <= relaxed && a > best_pivot) {
        best_pivot = a;
        leave = i;
      }
    }
    theta = slack_to_bound(leave, enter, dir, 0.0);
    return leave;
  }

  // Rebuilds the tableau as B^{-1} [A I art] from the original columns.
  void refactor() {
    since_refactor_ = 0;
    if (m_ == 0) return;
    Eigen::MatrixXd basis(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i) basis.col(i) = full_.col(basis_[static_cast<std::size_t>(i)]);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
    t_ = lu.solve(full_);
    for (Eigen::Index i = 0; i < m_; ++i) t_(i, basis_[static_cast<std::size_t>(i)]) = 1.0;
    recompute_basics();
    compute_reduced_costs();
    for (Eigen::Index i = 0; i < m_; ++i) d_[basis_[static_cast<std::size_t>(i)]] = 0.0;
  }

  void pivot(Eigen::Index r, Eigen::Index j) {
    const double piv = t_(r, j);
    t_.row(r) /= piv;
    t_(r, j) = 1.0;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = t_(i, j);
      if (f == 0.0) continue;
      t_.row(i) -= f * t_.row(r);
      t_(i, j) = 0.0;
    }
    const double fd = d_[j];
    if (fd != 0.0) {
      d_.noalias() -= fd * t_.row(r).transpose();
      d_[j] = 0.0;
    }
    const Eigen::Index out = basis_[static_cast<std::size_t>(r)];
    row_of_[static_cast<std::size_t>(out)] = -1;
    row_of_[static_cast<std::size_t>(j)] = r;
    basis_[static_cast<std::size_t>(r)] = j;
  }

  void expel_artificials() {
    const Eigen::Index first_art = n_ + m_;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < first_art) continue;
      x_[basis_[static_cast<std::size_t>(i)]] = 0.0;
      Eigen::Index best = -1;
      double best_abs = 1e-7;
      for (Eigen::Index j = 0; j < first_art; ++j) {
        if (row_of_[static_cast<std::size_t>(j)] >= 0) continue;
        if (std::abs(t_(i, j)) > best_abs) {
          best_abs = std::abs(t_(i, j));
          best = j;
        }
      }
      if (best >= 0) pivot(i, best);  // degenerate: entering value unchanged
    }
    for (Eigen::Index a = first_art; a < ncols_; ++a) {
      lo_[a] = 0.0;
      hi_[a] = 0.0;
      x_[a] = 0.0;
    }
    recompute_basics();
  }

  static constexpr double kRelativePivot = 1e-7;
  static constexpr double kRefactorPivot = 1e-5;

  LPOptions opt_;
  Eigen::Index m_;
  Eigen::Index n_;
  Eigen::Index ncols_ = 0;
  Eigen::Index num_art_ = 0;
  Tableau t_;
  Eigen::MatrixXd full_;
  Eigen::VectorXd b_;
  Eigen::VectorXd lo_, hi_, x_;
  Eigen::VectorXd cost_, d_;
  std::vector<Eigen::Index> basis_;
  std::vector<Eigen::Index> row_of_;
  std::size_t pivots_ = 0;
  std::size_t bland_after_ = 0;
  std::size_t max_pivots_ = 0;
  std::size_t refactor_every_ = 50;
  std::size_t since_refactor_ = 0;
};

}  // namespace detail

/// Solves the LP to optimality, or reports infeasibility/unboundedness.
/// Throws DimensionError on malformed input and IterationLimitError if the
/// pivot budget runs out.
inline LPSolution solve_lp(const LPProblem& problem, const LPOptions& options = {}) {
  problem.validate();
  detail::BoundedSimplex simplex(problem, options);
  return simplex.run(problem.objective);
}

}  // namespace matchain
