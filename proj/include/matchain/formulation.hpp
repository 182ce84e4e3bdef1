#pragma once

// Solver-neutral algebraic model: named variables, linear and bilinear
// constraint rows, and a linear/quadratic objective. Both the disjunctive
// MILP and the thin-film MIQCQP are emitted in this form; pure-linear
// models convert to an LPProblem relaxation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "matchain/error.hpp"
#include "matchain/lp.hpp"

namespace matchain {

enum class VarKind { Continuous, Binary };
enum class ObjectiveSense { Maximize, Minimize };

struct Variable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = kInf;

  friend bool operator==(const Variable&, const Variable&) = default;
};

struct LinearTerm {
  std::size_t var = 0;
  double coef = 0.0;

  friend bool operator==(const LinearTerm&, const LinearTerm&) = default;
};

struct BilinearTerm {
  std::size_t var1 = 0;
  std::size_t var2 = 0;
  double coef = 0.0;

  friend bool operator==(const BilinearTerm&, const BilinearTerm&) = default;
};

struct Constraint {
  std::string name;
  std::string group;  // family tag, e.g. "link", "bigm", "chain"
  std::vector<LinearTerm> linear;
  std::vector<BilinearTerm> bilinear;
  RowSense sense = RowSense::Equal;
  double rhs = 0.0;

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

struct ModelObjective {
  ObjectiveSense sense = ObjectiveSense::Maximize;
  double constant = 0.0;
  std::vector<LinearTerm> linear;
  std::vector<BilinearTerm> quadratic;

  friend bool operator==(const ModelObjective&, const ModelObjective&) = default;
};

struct Model {
  std::string kind;  // "milp" or "miqcqp"
  std::vector<Variable> variables;
  std::vector<Constraint> constraints;
  ModelObjective objective;

  friend bool operator==(const Model&, const Model&) = default;

  std::size_t add_variable(std::string name, VarKind kind, double lower, double upper) {
    variables.push_back({std::move(name), kind, lower, upper});
    return variables.size() - 1;
  }

  Constraint& add_constraint(std::string name, std::string group, RowSense sense, double rhs) {
    Constraint c;
    c.name = std::move(name);
    c.group = std::move(group);
    c.sense = sense;
    c.rhs = rhs;
    constraints.push_back(std::move(c));
    return constraints.back();
  }

  [[nodiscard]] std::size_t count(VarKind kind) const {
    std::size_t n = 0;
    for (const auto& v : variables) n += v.kind == kind ? 1 : 0;
    return n;
  }

  [[nodiscard]] std::size_t count_group(const std::string& group) const {
    std::size_t n = 0;
    for (const auto& c : constraints) n += c.group == group ? 1 : 0;
    return n;
  }

  [[nodiscard]] bool is_linear() const {
    if (!objective.quadratic.empty()) return false;
    for (const auto& c : constraints) {
      if (!c.bilinear.empty()) return false;
    }
    return true;
  }

  /// Throws if any term references an undeclared variable.
  void validate() const {
    const auto check = [&](std::size_t v, const std::string& where) {
      if (v >= variables.size()) throw PreconditionError(where + ": term references undeclared variable " + std::to_string(v));
    };
    for (const auto& c : constraints) {
      for (const auto& t : c.linear) check(t.var, c.name);
      for (const auto& t : c.bilinear) {
        check(t.var1, c.name);
        check(t.var2, c.name);
      }
    }
    for (const auto& t : objective.linear) check(t.var, "objective");
    for (const auto& t : objective.quadratic) {
      check(t.var1, "objective");
      check(t.var2, "objective");
    }
    for (const auto& v : variables) {
      if (v.lower > v.upper) throw PreconditionError("variable " + v.name + " has lower > upper");
    }
  }

  /// Left-hand side of constraint c at the point x.
  [[nodiscard]] double activity(const Constraint& c, const std::vector<double>& x) const {
    double a = 0.0;
    for (const auto& t : c.linear) a += t.coef * x[t.var];
    for (const auto& t : c.bilinear) a += t.coef * x[t.var1] * x[t.var2];
    return a;
  }

  /// Largest violation over rows and bounds (binaries also checked for integrality).
  [[nodiscard]] double max_violation(const std::vector<double>& x) const {
    if (x.size() != variables.size()) throw DimensionError("max_violation: point has wrong length");
    double worst = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      worst = std::max({worst, variables[j].lower - x[j], x[j] - variables[j].upper});
      if (variables[j].kind == VarKind::Binary) worst = std::max(worst, std::abs(x[j] - std::round(x[j])));
    }
    for (const auto& c : constraints) {
      const double a = activity(c, x);
      switch (c.sense) {
        case RowSense::LessEqual: worst = std::max(worst, a - c.rhs); break;
        case RowSense::GreaterEqual: worst = std::max(worst, c.rhs - a); break;
        case RowSense::Equal: worst = std::max(worst, std::abs(a - c.rhs)); break;
      }
    }
    return worst;
  }

  [[nodiscard]] double objective_value(const std::vector<double>& x) const {
    double v = objective.constant;
    for (const auto& t : objective.linear) v += t.coef * x[t.var];
    for (const auto& t : objective.quadratic) v += t.coef * x[t.var1] * x[t.var2];
    return v;
  }

  /// Continuous relaxation as a maximization LP. `lower`/`upper` override the
  /// declared bounds when non-empty (used to fix binaries at B&B nodes).
  [[nodiscard]] LPProblem lp_relaxation(const std::vector<double>& lower = {}, const std::vector<double>& upper = {}) const {
    if (!is_linear()) throw PreconditionError("lp_relaxation: model has bilinear terms");
    const std::size_t n = variables.size();
    const double sign = objective.sense == ObjectiveSense::Maximize ? 1.0 : -1.0;
    LPProblem lp;
    lp.objective.assign(n, 0.0);
    for (const auto& t : objective.linear) lp.objective[t.var] += sign * t.coef;
    lp.constraints = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(constraints.size()), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      const auto& c = constraints[i];
      for (const auto& t : c.linear) lp.constraints(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t.var)) += t.coef;
      lp.senses.push_back(c.sense);
      lp.rhs.push_back(c.rhs);
    }
    lp.lower.resize(n);
    lp.upper.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      lp.lower[j] = lower.empty() ? variables[j].lower : lower[j];
      lp.upper[j] = upper.empty() ? variables[j].upper : upper[j];
    }
    return lp;
  }
};

}  // namespace matchain
