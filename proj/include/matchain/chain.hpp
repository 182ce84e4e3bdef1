#pragma once

// Matrix-chain problem model: a start matrix p evolved through N family
// elements, u_n = u_{n-1} T_n, plus interval outer approximations of the
// reachable sets of u_n.

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "matchain/error.hpp"
#include "matchain/interval.hpp"

namespace matchain {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Finite matrix family {T_1, ..., T_K}; all square and of equal size.
struct FiniteFamily {
  std::vector<Eigen::MatrixXd> matrices;

  FiniteFamily() = default;
  explicit FiniteFamily(std::vector<Eigen::MatrixXd> ms) : matrices(std::move(ms)) { validate(); }

  [[nodiscard]] std::size_t size() const { return matrices.size(); }
  [[nodiscard]] Eigen::Index dim() const { return matrices.empty() ? 0 : matrices.front().rows(); }
  [[nodiscard]] const Eigen::MatrixXd& operator[](std::size_t k) const { return matrices[k]; }

  void validate() const {
    if (matrices.empty()) throw PreconditionError("FiniteFamily: at least one matrix required");
    const Eigen::Index d = matrices.front().rows();
    for (const auto& m : matrices) {
      if (m.rows() != d || m.cols() != d) throw DimensionError("FiniteFamily: matrices must be square and equal-sized");
    }
  }

  [[nodiscard]] bool nonnegative() const {
    for (const auto& m : matrices) {
      if ((m.array() < 0.0).any()) return false;
    }
    return true;
  }
};

/// Linear objective f(w) = sum_ij w_ij q_ij (w q^T for row vectors).
struct LinearObjective {
  Eigen::MatrixXd q;

  [[nodiscard]] double operator()(const Eigen::MatrixXd& w) const { return (w.array() * q.array()).sum(); }
};

/// max f(w) s.t. p T_1 ... T_N = w, T_n in family.
template <typename Family, typename Objective>
struct ChainProblem {
  Eigen::MatrixXd p;
  std::size_t horizon = 1;
  Family family;
  Objective objective;

  void validate() const {
    if (horizon < 1) throw PreconditionError("ChainProblem: horizon must be >= 1");
    family.validate();
    if (p.cols() != family.dim()) throw DimensionError("ChainProblem: p columns must equal family dimension");
  }
};

using FiniteChainProblem = ChainProblem<FiniteFamily, LinearObjective>;

/// States u_0..u_N of a chain; choices holds family indices when known.
template <typename Scalar>
struct ChainTrajectory {
  std::vector<Matrix<Scalar>> states;
  std::vector<std::size_t> choices;

  [[nodiscard]] const Matrix<Scalar>& final_state() const { return states.back(); }
};

/// Largest entrywise |u_n - u_{n-1} T_n| over the trajectory.
template <typename Scalar>
double recursion_residual(const ChainTrajectory<Scalar>& traj, const std::vector<Matrix<Scalar>>& steps) {
  double worst = 0.0;
  for (std::size_t n = 1; n < traj.states.size(); ++n) {
    const Matrix<Scalar> expect = traj.states[n - 1] * steps[n - 1];
    worst = std::max(worst, (traj.states[n] - expect).cwiseAbs().maxCoeff());
  }
  return worst;
}

template <typename Scalar>
ChainTrajectory<Scalar> evolve_chain(const Matrix<Scalar>& p, const std::vector<Matrix<Scalar>>& steps) {
  ChainTrajectory<Scalar> traj;
  traj.states.reserve(steps.size() + 1);
  traj.states.push_back(p);
  for (std::size_t n = 0; n < steps.size(); ++n) {
    const auto& t = steps[n];
    const auto& u = traj.states.back();
    if (u.cols() != t.rows()) {
      throw DimensionError("evolve_chain: step " + std::to_string(n + 1) + " has " + std::to_string(t.rows()) +
                           " rows, state has " + std::to_string(u.cols()) + " columns");
    }
    traj.states.push_back(u * t);
  }
  return traj;
}

inline ChainTrajectory<double> evolve_chain(const Eigen::MatrixXd& p, const FiniteFamily& family,
                                            const std::vector<std::size_t>& choices) {
  std::vector<Eigen::MatrixXd> steps;
  steps.reserve(choices.size());
  for (auto k : choices) {
    if (k >= family.size()) throw PreconditionError("evolve_chain: family index out of range");
    steps.push_back(family[k]);
  }
  auto traj = evolve_chain<double>(p, steps);
  traj.choices = choices;
  return traj;
}

/// Entrywise bounds on a real matrix.
struct IntervalBox {
  Eigen::MatrixXd lower;
  Eigen::MatrixXd upper;

  IntervalBox() = default;
  IntervalBox(Eigen::MatrixXd lo, Eigen::MatrixXd hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.rows() != upper.rows() || lower.cols() != upper.cols()) {
      throw DimensionError("IntervalBox: lower/upper shape mismatch");
    }
    if ((lower.array() > upper.array()).any()) throw PreconditionError("IntervalBox: lower > upper");
  }

  static IntervalBox point(const Eigen::MatrixXd& m) { return {m, m}; }

  [[nodiscard]] Eigen::Index rows() const { return lower.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return lower.cols(); }
  [[nodiscard]] Interval at(Eigen::Index i, Eigen::Index j) const { return {lower(i, j), upper(i, j)}; }

  [[nodiscard]] bool contains(const Eigen::MatrixXd& m, double tol = 0.0) const {
    return m.rows() == rows() && m.cols() == cols() && (m.array() >= lower.array() - tol).all() &&
           (m.array() <= upper.array() + tol).all();
  }

  void merge(const IntervalBox& other) {
    lower = lower.cwiseMin(other.lower);
    upper = upper.cwiseMax(other.upper);
  }
};

/// Entrywise interval product [U] * [T]. Exact per entry when T is a point.
inline IntervalBox interval_product(const IntervalBox& u, const IntervalBox& t) {
  if (u.cols() != t.rows()) throw DimensionError("interval_product: inner dimensions differ");
  Eigen::MatrixXd lo(u.rows(), t.cols()), hi(u.rows(), t.cols());
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    for (Eigen::Index k = 0; k < t.cols(); ++k) {
      Interval acc{0.0};
      for (Eigen::Index j = 0; j < u.cols(); ++j) acc = acc + u.at(i, j) * t.at(j, k);
      lo(i, k) = acc.lo;
      hi(i, k) = acc.hi;
    }
  }
  return {std::move(lo), std::move(hi)};
}

/// Boxes for u_0..u_N when every step draws from the same finite family.
/// Box n is the entrywise hull of the K one-step images of box n-1.
inline std::vector<IntervalBox> propagate_box(const IntervalBox& box0, const FiniteFamily& family, std::size_t steps) {
  family.validate();
  std::vector<IntervalBox> boxes{box0};
  boxes.reserve(steps + 1);
  // With nonnegative data each row's mass grows by at most the largest row
  // sum per step, which caps every entry (keeps stochastic chains in [0,1]).
  const bool mass_cap = family.nonnegative() && (box0.lower.array() >= 0.0).all();
  double growth = 0.0;
  for (const auto& t : family.matrices) growth = std::max(growth, t.rowwise().sum().maxCoeff());
  Eigen::VectorXd mass = box0.upper.rowwise().sum();
  for (std::size_t n = 0; n < steps; ++n) {
    IntervalBox next = interval_product(boxes.back(), IntervalBox::point(family[0]));
    for (std::size_t k = 1; k < family.size(); ++k) next.merge(interval_product(boxes.back(), IntervalBox::point(family[k])));
    if (mass_cap) {
      mass *= growth;
      for (Eigen::Index i = 0; i < next.upper.rows(); ++i) {
        next.upper.row(i) = next.upper.row(i).cwiseMin(mass[i]);
      }
    }
    boxes.push_back(std::move(next));
  }
  return boxes;
}

/// Boxes for u_0..u_N given entrywise bounds on each step's matrix.
inline std::vector<IntervalBox> propagate_box(const IntervalBox& box0, const std::vector<IntervalBox>& step_bounds) {
  std::vector<IntervalBox> boxes{box0};
  boxes.reserve(step_bounds.size() + 1);
  for (const auto& t : step_bounds) boxes.push_back(interval_product(boxes.back(), t));
  return boxes;
}

}  // namespace matchain
