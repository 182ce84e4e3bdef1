#pragma once

// Antibiotics time machine: genotype lattice, transition matrices from
// growth data, synthetic instances, and the solve path through solve_bb.
//
// Genotype strings are little-endian: character i is bit i of the index.

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "matchain/chain.hpp"
#include "matchain/disjunctive.hpp"
#include "matchain/error.hpp"

namespace matchain {

struct GenotypeSpace {
  unsigned g = 1;

  explicit GenotypeSpace(unsigned alleles) : g(alleles) {
    if (g < 1 || g > 20) throw PreconditionError("GenotypeSpace: allele count must be in 1..20");
  }

  [[nodiscard]] std::size_t d() const { return std::size_t{1} << g; }

  [[nodiscard]] std::size_t index(const std::string& s) const {
    if (s.size() != g) throw PreconditionError("GenotypeSpace: genotype '" + s + "' must have " + std::to_string(g) + " characters");
    std::size_t j = 0;
    for (unsigned i = 0; i < g; ++i) {
      if (s[i] == '1') {
        j |= std::size_t{1} << i;
      } else if (s[i] != '0') {
        throw PreconditionError("GenotypeSpace: genotype '" + s + "' must be a bit string");
      }
    }
    return j;
  }

  [[nodiscard]] std::string name(std::size_t j) const {
    check(j);
    std::string s(g, '0');
    for (unsigned i = 0; i < g; ++i) s[i] = ((j >> i) & 1U) != 0 ? '1' : '0';
    return s;
  }

  [[nodiscard]] std::vector<std::size_t> neighbors(std::size_t j) const {
    check(j);
    std::vector<std::size_t> out;
    for (unsigned i = 0; i < g; ++i) out.push_back(j ^ (std::size_t{1} << i));
    return out;
  }

  [[nodiscard]] static std::size_t hamming(std::size_t a, std::size_t b) {
    return static_cast<std::size_t>(__builtin_popcountll(static_cast<unsigned long long>(a ^ b)));
  }

  [[nodiscard]] bool adjacent(std::size_t a, std::size_t b) const { return hamming(a, b) == 1; }

  /// Unordered neighbor pairs (a < b).
  [[nodiscard]] std::size_t pair_count() const { return g * (d() / 2); }

 private:
  void check(std::size_t j) const {
    if (j >= d()) throw PreconditionError("GenotypeSpace: genotype index " + std::to_string(j) + " out of range");
  }
};

struct GrowthTable {
  unsigned g = 1;
  std::vector<std::string> drugs;
  Eigen::MatrixXd omega;  // K x 2^g

  [[nodiscard]] std::size_t K() const { return drugs.size(); }
  [[nodiscard]] GenotypeSpace space() const { return GenotypeSpace(g); }

  void validate() const {
    const GenotypeSpace sp(g);
    if (drugs.empty()) throw PreconditionError("GrowthTable: no drugs");
    if (omega.rows() != static_cast<Eigen::Index>(drugs.size()) || omega.cols() != static_cast<Eigen::Index>(sp.d())) {
      throw DimensionError("GrowthTable: omega must be K x 2^g");
    }
    if (!omega.allFinite()) throw PreconditionError("GrowthTable: growth rates must be finite");
  }
};

enum class ProbabilityModel { CPM, EPM };

// Strict leaves mass undefined (row sum 0) when a genotype neither improves
// nor strictly dominates; AbsorbResidual puts the missing mass on the diagonal.
enum class TieMode { Strict, AbsorbResidual };

inline const char* to_string(ProbabilityModel m) { return m == ProbabilityModel::CPM ? "cpm" : "epm"; }
inline const char* to_string(TieMode t) { return t == TieMode::Strict ? "strict" : "absorb"; }

inline std::vector<Eigen::MatrixXd> build_transitions(const GrowthTable& growth, ProbabilityModel model,
                                                      TieMode tie = TieMode::Strict) {
  growth.validate();
  const GenotypeSpace sp = growth.space();
  const auto d = static_cast<Eigen::Index>(sp.d());
  std::vector<Eigen::MatrixXd> out;
  for (std::size_t k = 0; k < growth.K(); ++k) {
    const auto w = growth.omega.row(static_cast<Eigen::Index>(k));
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto nb = sp.neighbors(static_cast<std::size_t>(j));
      double total = 0.0;
      bool dominant = true;
      for (auto n : nb) {
        const auto jn = static_cast<Eigen::Index>(n);
        const double gain = w(jn) - w(j);
        if (gain > 0.0) total += model == ProbabilityModel::CPM ? gain : 1.0;
        dominant = dominant && w(j) > w(jn);
      }
      if (dominant) {
        T(j, j) = 1.0;
        continue;
      }
      if (total > 0.0) {
        for (auto n : nb) {
          const auto jn = static_cast<Eigen::Index>(n);
          const double gain = w(jn) - w(j);
          if (gain > 0.0) T(j, jn) = (model == ProbabilityModel::CPM ? gain : 1.0) / total;
        }
      } else if (tie == TieMode::AbsorbResidual) {
        T(j, j) = 1.0;
      }
    }
    out.push_back(std::move(T));
  }
  return out;
}

inline std::vector<Eigen::MatrixXd> build_cpm(const GrowthTable& growth, TieMode tie = TieMode::Strict) {
  return build_transitions(growth, ProbabilityModel::CPM, tie);
}

inline std::vector<Eigen::MatrixXd> build_epm(const GrowthTable& growth, TieMode tie = TieMode::Strict) {
  return build_transitions(growth, ProbabilityModel::EPM, tie);
}

/// omega in {0, 1, 2} with probabilities 1/3, 1/6, 1/2, i.i.d. per cell.
inline GrowthTable gen_synthetic(unsigned g, std::size_t K, std::uint64_t seed) {
  if (g < 1 || g > 12) throw PreconditionError("gen_synthetic: g must be in 1..12");
  if (K < 1) throw PreconditionError("gen_synthetic: K must be positive");
  std::mt19937_64 rng(seed);
  GrowthTable t;
  t.g = g;
  const auto d = static_cast<Eigen::Index>(std::size_t{1} << g);
  t.omega.resize(static_cast<Eigen::Index>(K), d);
  for (std::size_t k = 0; k < K; ++k) {
    t.drugs.push_back("D" + std::to_string(k + 1));
    for (Eigen::Index j = 0; j < d; ++j) {
      // Explicit 53-bit uniform so tables do not depend on the standard library.
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      t.omega(static_cast<Eigen::Index>(k), j) = u < 1.0 / 3.0 ? 0.0 : (u < 0.5 ? 1.0 : 2.0);
    }
  }
  return t;
}

inline FiniteChainProblem make_atm_problem(const std::vector<Eigen::MatrixXd>& matrices, std::size_t initial,
                                           std::size_t target, std::size_t steps) {
  FiniteFamily fam(matrices);
  const Eigen::Index d = fam.dim();
  if (static_cast<Eigen::Index>(initial) >= d || static_cast<Eigen::Index>(target) >= d) {
    throw PreconditionError("make_atm_problem: genotype index out of range");
  }
  for (const auto& T : matrices) {
    if ((T.array() < 0.0).any()) throw PreconditionError("make_atm_problem: transition matrices must be nonnegative");
    if ((T.rowwise().sum().array() > 1.0 + 1e-9).any()) throw PreconditionError("make_atm_problem: row sums must not exceed 1");
  }
  FiniteChainProblem p;
  p.p = Eigen::MatrixXd::Zero(1, d);
  p.p(0, static_cast<Eigen::Index>(initial)) = 1.0;
  p.horizon = steps;
  p.family = std::move(fam);
  p.objective.q = Eigen::MatrixXd::Zero(1, d);
  p.objective.q(0, static_cast<Eigen::Index>(target)) = 1.0;
  return p;
}

/// True when every row of every matrix sums to 1.
inline bool all_stochastic(const std::vector<Eigen::MatrixXd>& matrices, double tol = 1e-12) {
  for (const auto& T : matrices) {
    if (((T.rowwise().sum().array() - 1.0).abs() > tol).any()) return false;
  }
  return true;
}

struct ATMOptions {
  BBOptions bb{.gap = 1e-3, .bound = BoundMode::DP};
};

/// Maximum probability of reaching `target` from `initial` in exactly
/// `steps` drugs. LP relaxations use the probability simplex as Ubar_n,
/// with sum = 1 only when no row can lose mass.
inline SolveReport solve_atm(const std::vector<Eigen::MatrixXd>& matrices, std::size_t initial, std::size_t target,
                             std::size_t steps, const ATMOptions& options = {}) {
  const auto problem = make_atm_problem(matrices, initial, target, steps);
  const OuterApproximation outer = SimplexOuter{all_stochastic(matrices)};
  return solve_bb(problem, options.bb, outer);
}

}  // namespace matchain
