#include <gtest/gtest.h>

#include <random>

#include "matchain/lp.hpp"
#include "oracles/vertex_lp.hpp"

using namespace matchain;

namespace {

LPProblem random_lp(std::mt19937_64& rng, int n, int m) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> slack(0.0, 0.5);
  LPProblem lp;
  lp.objective.resize(static_cast<std::size_t>(n));
  for (auto& c : lp.objective) c = coef(rng);
  lp.lower.assign(static_cast<std::size_t>(n), 0.0);
  lp.upper.resize(static_cast<std::size_t>(n));
  Eigen::VectorXd x0(n);
  for (int j = 0; j < n; ++j) {
    lp.lower[static_cast<std::size_t>(j)] = coef(rng) - 1.0;
    lp.upper[static_cast<std::size_t>(j)] = lp.lower[static_cast<std::size_t>(j)] + 0.5 + 2.0 * slack(rng);
    x0[j] = lp.lower[static_cast<std::size_t>(j)] + 0.5 * (lp.upper[static_cast<std::size_t>(j)] - lp.lower[static_cast<std::size_t>(j)]);
  }
  lp.constraints.resize(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) lp.constraints(i, j) = coef(rng);
    const double act = lp.constraints.row(i).dot(x0);
    switch (i % 3) {
      case 0:
        lp.senses.push_back(RowSense::LessEqual);
        lp.rhs.push_back(act + slack(rng));
        break;
      case 1:
        lp.senses.push_back(RowSense::GreaterEqual);
        lp.rhs.push_back(act - slack(rng));
        break;
      default:
        lp.senses.push_back(i % 2 == 0 ? RowSense::Equal : RowSense::LessEqual);
        lp.rhs.push_back(act);
    }
  }
  return lp;
}

double max_violation(const LPProblem& lp, const std::vector<double>& x) {
  double worst = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    worst = std::max({worst, lp.lower[j] - x[j], x[j] - lp.upper[j]});
  }
  for (Eigen::Index i = 0; i < lp.constraints.rows(); ++i) {
    double a = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) a += lp.constraints(i, static_cast<Eigen::Index>(j)) * x[j];
    const double b = lp.rhs[static_cast<std::size_t>(i)];
    switch (lp.senses[static_cast<std::size_t>(i)]) {
      case RowSense::LessEqual: worst = std::max(worst, a - b); break;
      case RowSense::GreaterEqual: worst = std::max(worst, b - a); break;
      case RowSense::Equal: worst = std::max(worst, std::abs(a - b)); break;
    }
  }
  return worst;
}

}  // namespace

TEST(SolveLp, SingleBound) {
  LPProblem lp;
  lp.objective = {1.0};
  lp.constraints = Eigen::MatrixXd::Constant(1, 1, 1.0);
  lp.senses = {RowSense::LessEqual};
  lp.rhs = {3.0};
  lp.lower = {0.0};
  lp.upper = {10.0};
  const auto sol = solve_lp(lp);
  ASSERT_EQ(sol.status, LPStatus::Optimal);
  EXPECT_NEAR(sol.objective_value, 3.0, 1e-12);
  EXPECT_NEAR(sol.primal[0], 3.0, 1e-12);
}

TEST(SolveLp, ContradictoryRowsInfeasible) {
  LPProblem lp;
  lp.objective = {1.0, 1.0};
  lp.constraints.resize(2, 2);
  lp.constraints << 1, 1, 1, -1;
  lp.senses = {RowSense::LessEqual, RowSense::GreaterEqual};
  lp.rhs = {1.0, 2.0};
  EXPECT_EQ(solve_lp(lp).status, LPStatus::Infeasible);
}

TEST(SolveLp, Unbounded) {
  LPProblem lp;
  lp.objective = {1.0, 0.0};
  lp.constraints.resize(1, 2);
  lp.constraints << 1, -1;
  lp.senses = {RowSense::LessEqual};
  lp.rhs = {1.0};
  EXPECT_EQ(solve_lp(lp).status, LPStatus::Unbounded);
}

TEST(SolveLp, FreeVariablesAndEquality) {
  // max -x - y  s.t. x + y = 2, x - y >= -4, x,y free
  LPProblem lp;
  lp.objective = {-1.0, -2.0};
  lp.constraints.resize(2, 2);
  lp.constraints << 1, 1, 1, -1;
  lp.senses = {RowSense::Equal, RowSense::GreaterEqual};
  lp.rhs = {2.0, -4.0};
  lp.lower = {-kInf, -kInf};
  lp.upper = {kInf, kInf};
  // y = 2 - x, objective -x - 4 + 2x = x - 4, x - (2 - x) >= -4 -> x >= -1; unbounded above in x.
  EXPECT_EQ(solve_lp(lp).status, LPStatus::Unbounded);
  lp.upper = {5.0, kInf};
  const auto sol = solve_lp(lp);
  ASSERT_EQ(sol.status, LPStatus::Optimal);
  EXPECT_NEAR(sol.objective_value, 1.0, 1e-12);
  EXPECT_NEAR(sol.primal[0], 5.0, 1e-12);
  EXPECT_NEAR(sol.primal[1], -3.0, 1e-12);
}

TEST(SolveLp, MalformedInputThrows) {
  LPProblem lp;
  lp.objective = {1.0, 1.0};
  lp.constraints = Eigen::MatrixXd::Ones(2, 2);
  lp.senses = {RowSense::LessEqual};
  lp.rhs = {1.0, 1.0};
  EXPECT_THROW(solve_lp(lp), DimensionError);
  lp.senses = {RowSense::LessEqual, RowSense::LessEqual};
  lp.lower = {0.0, 2.0};
  lp.upper = {1.0, 1.0};
  EXPECT_THROW(solve_lp(lp), std::invalid_argument);
}

TEST(SolveLp, DegenerateKleeMintyStyleTerminates) {
  // Highly degenerate: many constraints through the origin.
  LPProblem lp;
  const int n = 4;
  const int m = 12;
  lp.objective = {1.0, 1.0, 1.0, 1.0};
  lp.constraints = Eigen::MatrixXd::Zero(m, n);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) lp.constraints(i, j) = u(rng);
    lp.senses.push_back(RowSense::LessEqual);
    lp.rhs.push_back(0.0);
  }
  lp.lower.assign(n, 0.0);
  lp.upper.assign(n, 1.0);
  const auto sol = solve_lp(lp);
  ASSERT_EQ(sol.status, LPStatus::Optimal);
  EXPECT_LE(max_violation(lp, sol.primal), 1e-7);
  const auto ref = oracle::vertex_enumeration(lp);
  ASSERT_TRUE(ref.feasible);
  EXPECT_NEAR(sol.objective_value, ref.value, 1e-8);
}

TEST(SolveLp, RandomSubInstancesMatchVertexEnumeration) {
  std::mt19937_64 rng(20240611);
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    LPProblem full = random_lp(rng, 20, 15);
    const auto sol = solve_lp(full);
    ASSERT_EQ(sol.status, LPStatus::Optimal) << "trial " << trial;
    EXPECT_LE(max_violation(full, sol.primal), 1e-7);
    double obj = 0.0;
    for (std::size_t j = 0; j < sol.primal.size(); ++j) obj += full.objective[j] * sol.primal[j];
    EXPECT_NEAR(obj, sol.objective_value, 1e-9);

    // Freeze 14 variables at their optimal values: the remaining 6-variable
    // LP has the same optimum and is small enough to enumerate.
    LPProblem sub;
    const int keep = 6;
    sub.objective.assign(full.objective.begin(), full.objective.begin() + keep);
    sub.constraints = full.constraints.leftCols(keep);
    sub.senses = full.senses;
    sub.rhs = full.rhs;
    double frozen_obj = 0.0;
    for (int j = keep; j < 20; ++j) {
      const double xj = sol.primal[static_cast<std::size_t>(j)];
      frozen_obj += full.objective[static_cast<std::size_t>(j)] * xj;
      for (int i = 0; i < 15; ++i) sub.rhs[static_cast<std::size_t>(i)] -= full.constraints(i, j) * xj;
    }
    sub.lower.assign(full.lower.begin(), full.lower.begin() + keep);
    sub.upper.assign(full.upper.begin(), full.upper.begin() + keep);
    const auto sub_sol = solve_lp(sub);
    const auto ref = oracle::vertex_enumeration(sub, 1e-9);
    ASSERT_EQ(sub_sol.status, LPStatus::Optimal);
    ASSERT_TRUE(ref.feasible);
    EXPECT_NEAR(sub_sol.objective_value, ref.value, 1e-8);
    EXPECT_NEAR(sub_sol.objective_value + frozen_obj, sol.objective_value, 1e-8);
    ++checked;
  }
  EXPECT_EQ(checked, 20);
}

TEST(SolveLp, SmallRandomMatchesOracleIncludingInfeasible) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int infeasible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    LPProblem lp;
    const int n = 2 + trial % 4;
    const int m = 2 + trial % 5;
    lp.objective.resize(static_cast<std::size_t>(n));
    for (auto& c : lp.objective) c = u(rng);
    lp.constraints.resize(m, n);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) lp.constraints(i, j) = u(rng);
      lp.senses.push_back(static_cast<RowSense>(trial % 7 == 0 ? i % 3 : (i % 2 == 0 ? 0 : 2)));
      lp.rhs.push_back(u(rng));
    }
    lp.lower.assign(static_cast<std::size_t>(n), -1.0);
    lp.upper.assign(static_cast<std::size_t>(n), 1.0);
    const auto sol = solve_lp(lp);
    const auto ref = oracle::vertex_enumeration(lp, 1e-9);
    if (!ref.feasible) {
      EXPECT_EQ(sol.status, LPStatus::Infeasible) << "trial " << trial;
      ++infeasible;
      continue;
    }
    ASSERT_EQ(sol.status, LPStatus::Optimal) << "trial " << trial;
    EXPECT_NEAR(sol.objective_value, ref.value, 1e-8) << "trial " << trial;
    EXPECT_LE(max_violation(lp, sol.primal), 1e-7);
  }
  EXPECT_GT(infeasible, 0);
}

TEST(SolveLp, Deterministic) {
  std::mt19937_64 rng(3);
  const LPProblem lp = random_lp(rng, 20, 15);
  const auto a = solve_lp(lp);
  const auto b = solve_lp(lp);
  EXPECT_EQ(a.primal, b.primal);
  EXPECT_EQ(a.objective_value, b.objective_value);
}
