#pragma once

// Finite-family chain problems with a linear objective.
//
// The feasible set of each step (u_{n-1}, T_n, u_n) is a K-way union of
// linear sets; lifting it with copy variables v_{n-1,k} and binaries
// x_{n-1,k} gives the extended formulation
//
//   sum_k v_{n-1,k}       = u_{n-1}
//   sum_k v_{n-1,k} T_k   = u_n
//   sum_k x_{n-1,k}       = 1
//   v_{n-1,k} in Ubar_{n-1} * x_{n-1,k},  x binary
//
// whose continuous relaxation is the convex hull of each step's union.
// solve_bb branches on the steps in order and bounds nodes with that LP
// relaxation, with an adaptive dynamic-programming bound, or with both.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "matchain/chain.hpp"
#include "matchain/error.hpp"
#include "matchain/formulation.hpp"
#include "matchain/lp.hpp"

namespace matchain {

/// Outer approximation {u >= 0, sum_j u_ij (= or <=) 1 for every row i}.
struct SimplexOuter {
  bool equality = true;
};

using OuterApproximation = std::variant<std::vector<IntervalBox>, SimplexOuter>;

struct DisjunctiveFormulation {
  Model model;
  std::size_t steps = 0;
  std::size_t choices = 0;
  Eigen::Index rows = 0;
  Eigen::Index dim = 0;
  // u[n][i*dim + j], n = 0..N
  std::vector<std::vector<std::size_t>> u;
  // v[n][k][i*dim + j], n = 0..N-1 (copy of u_n routed through choice k)
  std::vector<std::vector<std::vector<std::size_t>>> v;
  // x[n][k], n = 0..N-1 (choice k taken at step n+1)
  std::vector<std::vector<std::size_t>> x;
};

namespace detail {

inline std::string cell(Eigen::Index i, Eigen::Index j) { return std::to_string(i) + "_" + std::to_string(j); }

}  // namespace detail

/// Builds the extended MILP. `outer` gives Ubar_n either as per-step boxes
/// (n = 0..N, e.g. from propagate_box) or as the probability simplex.
template <typename Objective>
DisjunctiveFormulation build_extended_formulation(const ChainProblem<FiniteFamily, Objective>& problem,
                                                  const OuterApproximation& outer) {
  if constexpr (!std::is_same_v<Objective, LinearObjective>) {
    throw PreconditionError("build_extended_formulation: objective must be linear");
  } else {
    problem.validate();
    const auto& fam = problem.family;
    const std::size_t N = problem.horizon;
    const std::size_t K = fam.size();
    const Eigen::Index r = problem.p.rows();
    const Eigen::Index d = fam.dim();
    if (problem.objective.q.rows() != r || problem.objective.q.cols() != d) {
      throw DimensionError("build_extended_formulation: objective q must match the shape of p");
    }
    const auto* boxes = std::get_if<std::vector<IntervalBox>>(&outer);
    const auto* simplex = std::get_if<SimplexOuter>(&outer);
    if (boxes != nullptr) {
      if (boxes->size() < N + 1) throw DimensionError("build_extended_formulation: need N+1 outer boxes");
      for (const auto& b : *boxes) {
        if (b.rows() != r || b.cols() != d) throw DimensionError("build_extended_formulation: box shape mismatch");
      }
    }

    DisjunctiveFormulation f;
    f.steps = N;
    f.choices = K;
    f.rows = r;
    f.dim = d;
    Model& m = f.model;
    m.kind = "milp";

    const auto u_bounds = [&](std::size_t n, Eigen::Index i, Eigen::Index j) -> std::pair<double, double> {
      if (n == 0) return {problem.p(i, j), problem.p(i, j)};
      if (boxes != nullptr) return {(*boxes)[n].lower(i, j), (*boxes)[n].upper(i, j)};
      return {0.0, 1.0};
    };

    f.u.resize(N + 1);
    for (std::size_t n = 0; n <= N; ++n) {
      for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
          const auto [lo, hi] = u_bounds(n, i, j);
          f.u[n].push_back(m.add_variable("u_" + std::to_string(n) + "_" + detail::cell(i, j), VarKind::Continuous, lo, hi));
        }
      }
    }
    f.v.assign(N, std::vector<std::vector<std::size_t>>(K));
    f.x.assign(N, std::vector<std::size_t>(K));
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t k = 0; k < K; ++k) {
        f.x[n][k] = m.add_variable("x_" + std::to_string(n) + "_" + std::to_string(k), VarKind::Binary, 0.0, 1.0);
        for (Eigen::Index i = 0; i < r; ++i) {
          for (Eigen::Index j = 0; j < d; ++j) {
            double lo = 0.0;
            double hi = 1.0;
            if (n == 0) {
              lo = std::min(0.0, problem.p(i, j));
              hi = std::max(0.0, problem.p(i, j));
            } else if (boxes != nullptr) {
              lo = std::min(0.0, (*boxes)[n].lower(i, j));
              hi = std::max(0.0, (*boxes)[n].upper(i, j));
            }
            f.v[n][k].push_back(m.add_variable("v_" + std::to_string(n) + "_" + std::to_string(k) + "_" + detail::cell(i, j),
                                               VarKind::Continuous, lo, hi));
          }
        }
      }
    }

    for (std::size_t n = 0; n < N; ++n) {
      const std::string step = std::to_string(n + 1);
      for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
          const auto idx = static_cast<std::size_t>(i * d + j);
          auto& split = m.add_constraint("split_" + step + "_" + detail::cell(i, j), "split", RowSense::Equal, 0.0);
          for (std::size_t k = 0; k < K; ++k) split.linear.push_back({f.v[n][k][idx], 1.0});
          split.linear.push_back({f.u[n][idx], -1.0});
        }
      }
      for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
          auto& image = m.add_constraint("image_" + step + "_" + detail::cell(i, j), "image", RowSense::Equal, 0.0);
          for (std::size_t k = 0; k < K; ++k) {
            for (Eigen::Index l = 0; l < d; ++l) {
              const double t = fam[k](l, j);
              if (t != 0.0) image.linear.push_back({f.v[n][k][static_cast<std::size_t>(i * d + l)], t});
            }
          }
          image.linear.push_back({f.u[n + 1][static_cast<std::size_t>(i * d + j)], -1.0});
        }
      }
      auto& choose = m.add_constraint("choose_" + step, "choose", RowSense::Equal, 1.0);
      for (std::size_t k = 0; k < K; ++k) choose.linear.push_back({f.x[n][k], 1.0});

      for (std::size_t k = 0; k < K; ++k) {
        const std::string tag = step + "_" + std::to_string(k);
        if (simplex != nullptr) {
          for (Eigen::Index i = 0; i < r; ++i) {
            auto& row = m.add_constraint("mass_" + tag + "_" + std::to_string(i), "bigm",
                                         simplex->equality ? RowSense::Equal : RowSense::LessEqual, 0.0);
            for (Eigen::Index j = 0; j < d; ++j) row.linear.push_back({f.v[n][k][static_cast<std::size_t>(i * d + j)], 1.0});
            row.linear.push_back({f.x[n][k], -1.0});
          }
          continue;
        }
        const IntervalBox point_box = IntervalBox::point(problem.p);
        const IntervalBox& box = n == 0 ? point_box : (*boxes)[n];
        for (Eigen::Index i = 0; i < r; ++i) {
          for (Eigen::Index j = 0; j < d; ++j) {
            const auto vid = f.v[n][k][static_cast<std::size_t>(i * d + j)];
            auto& up = m.add_constraint("ub_" + tag + "_" + detail::cell(i, j), "bigm", RowSense::LessEqual, 0.0);
            up.linear = {{vid, 1.0}, {f.x[n][k], -box.upper(i, j)}};
            auto& down = m.add_constraint("lb_" + tag + "_" + detail::cell(i, j), "bigm", RowSense::GreaterEqual, 0.0);
            down.linear = {{vid, 1.0}, {f.x[n][k], -box.lower(i, j)}};
          }
        }
      }
    }

    m.objective.sense = ObjectiveSense::Maximize;
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        const double qij = problem.objective.q(i, j);
        if (qij != 0.0) m.objective.linear.push_back({f.u[N][static_cast<std::size_t>(i * d + j)], qij});
      }
    }
    return f;
  }
}

/// Branch-and-bound node: choices fixed for steps 1..depth.
struct BBNode {
  std::vector<std::size_t> prefix;
  double bound = kInf;

  [[nodiscard]] std::size_t depth() const { return prefix.size(); }
};

/// LP relaxation value with the prefix's binaries fixed. Returns -inf when
/// the restricted relaxation is infeasible.
inline double lp_bound(const DisjunctiveFormulation& f, const BBNode& node, const LPOptions& options = {}) {
  if (node.depth() > f.steps) throw PreconditionError("lp_bound: prefix longer than horizon");
  const auto& vars = f.model.variables;
  std::vector<double> lo(vars.size()), hi(vars.size());
  for (std::size_t j = 0; j < vars.size(); ++j) {
    lo[j] = vars[j].lower;
    hi[j] = vars[j].upper;
  }
  for (std::size_t n = 0; n < node.depth(); ++n) {
    if (node.prefix[n] >= f.choices) throw PreconditionError("lp_bound: choice index out of range");
    for (std::size_t k = 0; k < f.choices; ++k) {
      const double val = k == node.prefix[n] ? 1.0 : 0.0;
      lo[f.x[n][k]] = val;
      hi[f.x[n][k]] = val;
    }
  }
  const LPSolution sol = solve_lp(f.model.lp_relaxation(lo, hi), options);
  if (sol.status == LPStatus::Infeasible) return -kInf;
  if (sol.status == LPStatus::Unbounded) return kInf;
  const double sign = f.model.objective.sense == ObjectiveSense::Maximize ? 1.0 : -1.0;
  return sign * sol.objective_value + f.model.objective.constant;
}

/// Adaptive value-iteration bound for nonnegative families:
/// beta_N = q, beta_{n-1} = max_k T_k beta_n (componentwise, per row of q).
/// u_n . beta_n bounds every static completion of a prefix reaching u_n.
class DPBound {
 public:
  DPBound(const FiniteFamily& family, const Eigen::MatrixXd& q, std::size_t horizon) : horizon_(horizon) {
    family.validate();
    if (!family.nonnegative()) throw PreconditionError("dp_bound: family matrices must be entrywise nonnegative");
    if (q.cols() != family.dim()) throw DimensionError("dp_bound: q columns must equal family dimension");
    // beta_[n] is d x r: column i is the value-to-go vector for state row i.
    beta_.resize(horizon + 1);
    beta_[horizon] = q.transpose();
    for (std::size_t n = horizon; n > 0; --n) {
      Eigen::MatrixXd best = family[0] * beta_[n];
      for (std::size_t k = 1; k < family.size(); ++k) best = best.cwiseMax(family[k] * beta_[n]);
      beta_[n - 1] = std::move(best);
    }
  }

  /// Bound for state u (r x d) reached after `depth` steps.
  [[nodiscard]] double operator()(const Eigen::MatrixXd& u, std::size_t depth) const {
    return (u.array() * beta_[depth].transpose().array()).sum();
  }

  [[nodiscard]] const Eigen::MatrixXd& value_to_go(std::size_t depth) const { return beta_[depth]; }
  [[nodiscard]] std::size_t horizon() const { return horizon_; }

 private:
  std::size_t horizon_;
  std::vector<Eigen::MatrixXd> beta_;
};

/// DP bound for the node's prefix applied to start matrix p.
inline double dp_bound(const FiniteFamily& family, const Eigen::MatrixXd& p, const Eigen::MatrixXd& q, std::size_t horizon,
                       const BBNode& node) {
  if ((p.array() < 0.0).any()) throw PreconditionError("dp_bound: start matrix must be nonnegative");
  const DPBound dp(family, q, horizon);
  Eigen::MatrixXd u = p;
  for (auto k : node.prefix) u = u * family[k];
  return dp(u, node.depth());
}

enum class BoundMode { LP, DP, Best };

inline const char* to_string(BoundMode m) {
  switch (m) {
    case BoundMode::LP: return "lp";
    case BoundMode::DP: return "dp";
    case BoundMode::Best: return "best";
  }
  return "?";
}

enum class SolveStatus { Optimal, NodeLimit, TimeLimit, TargetReached };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::NodeLimit: return "node_limit";
    case SolveStatus::TimeLimit: return "time_limit";
    case SolveStatus::TargetReached: return "target_reached";
  }
  return "?";
}

struct SolveReport {
  SolveStatus status = SolveStatus::Optimal;
  double optimal_value = -kInf;
  std::vector<std::size_t> optimal_sequence;
  double best_bound = -kInf;
  std::size_t node_count = 0;
  std::size_t lp_count = 0;
  double wall_time = 0.0;  // seconds
  double gap = 0.0;
};

/// Worker count: explicit value, else MATCHAIN_THREADS, else 1.
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MATCHAIN_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

struct BBOptions {
  double gap = 1e-3;  // absolute
  BoundMode bound = BoundMode::Best;
  std::size_t node_limit = 0;  // 0: unlimited
  unsigned threads = 0;
  // Called for every bounded node (serialized across workers).
  std::function<void(const BBNode&)> node_logger;
  LPOptions lp;
};

namespace detail {

inline constexpr double kTieTol = 1e-12;

inline bool lex_less(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

/// True when no completion of `prefix` can be lexicographically below `seq`.
inline bool prefix_after(const std::vector<std::size_t>& prefix, const std::vector<std::size_t>& seq) {
  for (std::size_t i = 0; i < prefix.size() && i < seq.size(); ++i) {
    if (prefix[i] != seq[i]) return prefix[i] > seq[i];
  }
  return false;
}

/// Shared incumbent; value readable without locking.
class Incumbent {
 public:
  void offer(double value, const std::vector<std::size_t>& seq) {
    std::lock_guard lock(mutex_);
    const double cur = value_.load(std::memory_order_relaxed);
    const bool better = value > cur + kTieTol || (value >= cur - kTieTol && (seq_.empty() || lex_less(seq, seq_)));
    if (!better) return;
    value_.store(value, std::memory_order_relaxed);
    seq_ = seq;
  }
  [[nodiscard]] double value() const { return value_.load(std::memory_order_relaxed); }
  [[nodiscard]] std::vector<std::size_t> sequence() const {
    std::lock_guard lock(mutex_);
    return seq_;
  }
  [[nodiscard]] bool prunes(double bound, double gap, const std::vector<std::size_t>& prefix) const {
    const double inc = value();
    if (gap > 0.0) return bound <= inc + gap;
    if (bound < inc - kTieTol) return true;
    if (bound > inc + kTieTol) return false;
    std::lock_guard lock(mutex_);
    return !seq_.empty() && prefix_after(prefix, seq_);
  }

 private:
  mutable std::mutex mutex_;
  std::atomic<double> value_{-kInf};
  std::vector<std::size_t> seq_;
};

class FiniteBranchAndBound {
 public:
  FiniteBranchAndBound(const FiniteChainProblem& problem, const BBOptions& options, const OuterApproximation* outer)
      : problem_(problem), opt_(options) {
    problem_.validate();
    const bool dp_ok = problem_.family.nonnegative() && (problem_.p.array() >= 0.0).all();
    use_dp_ = opt_.bound != BoundMode::LP && dp_ok;
    use_lp_ = opt_.bound == BoundMode::LP || (opt_.bound == BoundMode::Best) || !dp_ok;
    if (use_dp_) dp_.emplace(problem_.family, problem_.objective.q, problem_.horizon);
    if (outer != nullptr) {
      build_extended_formulation(problem_, *outer);  // shape checks
      outer_ = *outer;
    }
  }

  SolveReport run() {
    const auto start = std::chrono::steady_clock::now();
    const unsigned threads = resolve_threads(opt_.threads);

    BBNode root;
    Eigen::MatrixXd p = problem_.p;
    dive(p);
    if (threads <= 1) {
      explore(root, p);
    } else {
      std::vector<std::pair<BBNode, Eigen::MatrixXd>> tasks;
      const std::size_t split = split_depth(threads);
      collect_tasks(root, p, split, tasks);
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      pool.reserve(threads);
      for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
          for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) explore(tasks[i].first, tasks[i].second);
        });
      }
      for (auto& th : pool) th.join();
    }

    SolveReport rep;
    rep.optimal_value = incumbent_.value();
    rep.optimal_sequence = incumbent_.sequence();
    rep.node_count = nodes_.load();
    rep.lp_count = lps_.load();
    const double open = open_bound_.load();
    rep.best_bound = std::max(rep.optimal_value, open);
    rep.gap = std::max(0.0, open - rep.optimal_value);
    rep.status = limit_hit_.load() ? SolveStatus::NodeLimit : SolveStatus::Optimal;
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
  }

 private:
  double objective_of(const Eigen::MatrixXd& w) const { return problem_.objective(w); }

  std::size_t split_depth(unsigned threads) const {
    std::size_t depth = 0;
    double leaves = 1.0;
    while (depth + 1 < problem_.horizon && leaves < 8.0 * threads) {
      leaves *= static_cast<double>(problem_.family.size());
      ++depth;
    }
    return depth;
  }

  double bound_of(const BBNode& node, const Eigen::MatrixXd& u) {
    double bound = kInf;
    if (use_dp_) {
      bound = (*dp_)(u, node.depth());
      if (incumbent_.prunes(bound, opt_.gap, node.prefix)) return bound;
    }
    if (use_lp_) {
      ++lps_;
      bound = std::min(bound, suffix_lp_bound(node, u));
    }
    return bound;
  }

  // LP relaxation of the remaining steps started from the node state, so
  // the outer boxes are propagated from u rather than from p.
  double suffix_lp_bound(const BBNode& node, const Eigen::MatrixXd& u) const {
    FiniteChainProblem sub;
    sub.p = u;
    sub.family = problem_.family;
    sub.objective = problem_.objective;
    sub.horizon = problem_.horizon - node.depth();
    OuterApproximation outer;
    if (!outer_) {
      outer = propagate_box(IntervalBox::point(u), problem_.family, sub.horizon);
    } else if (const auto* boxes = std::get_if<std::vector<IntervalBox>>(&*outer_)) {
      std::vector<IntervalBox> tail{IntervalBox::point(u)};
      tail.insert(tail.end(), boxes->begin() + static_cast<std::ptrdiff_t>(node.depth() + 1), boxes->end());
      outer = std::move(tail);
    } else {
      outer = *outer_;
    }
    return lp_bound(build_extended_formulation(sub, outer), BBNode{}, opt_.lp);
  }

  // Greedy descent along the child order, to start with an incumbent.
  void dive(Eigen::MatrixXd u) {
    BBNode node;
    while (node.depth() < problem_.horizon) {
      auto kids = children(node, u);
      node.prefix.push_back(kids.front().first);
      u = std::move(kids.front().second);
    }
    incumbent_.offer(objective_of(u), node.prefix);
  }

  void note_open(double bound) {
    double cur = open_bound_.load();
    while (bound > cur && !open_bound_.compare_exchange_weak(cur, bound)) {
    }
  }

  void log(const BBNode& node) {
    if (!opt_.node_logger) return;
    std::lock_guard lock(log_mutex_);
    opt_.node_logger(node);
  }

  // Returns children (state, index) ordered by descending one-step DP score.
  std::vector<std::pair<std::size_t, Eigen::MatrixXd>> children(const BBNode& node, const Eigen::MatrixXd& u) const {
    const std::size_t K = problem_.family.size();
    std::vector<std::pair<std::size_t, Eigen::MatrixXd>> out;
    out.reserve(K);
    std::vector<double> score(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      out.emplace_back(k, u * problem_.family[k]);
      if (dp_) score[k] = (*dp_)(out.back().second, node.depth() + 1);
    }
    std::stable_sort(out.begin(), out.end(), [&](const auto& a, const auto& b) { return score[a.first] > score[b.first]; });
    return out;
  }

  // Returns false when the node was cut off by the node limit.
  bool admit(BBNode& node, const Eigen::MatrixXd& u) {
    if (node.depth() == problem_.horizon) {
      ++nodes_;
      node.bound = objective_of(u);
      log(node);
      incumbent_.offer(node.bound, node.prefix);
      return false;
    }
    if (opt_.node_limit > 0 && nodes_.load() >= opt_.node_limit) {
      limit_hit_ = true;
      note_open(use_dp_ ? (*dp_)(u, node.depth()) : kInf);
      return false;
    }
    ++nodes_;
    node.bound = bound_of(node, u);
    log(node);
    if (incumbent_.prunes(node.bound, opt_.gap, node.prefix)) {
      if (node.bound > incumbent_.value()) note_open(node.bound);
      return false;
    }
    return true;
  }

  void explore(BBNode node, const Eigen::MatrixXd& u) {
    if (!admit(node, u)) return;
    for (auto& [k, child_state] : children(node, u)) {
      BBNode child{node.prefix, kInf};
      child.prefix.push_back(k);
      explore(std::move(child), child_state);
    }
  }

  void collect_tasks(BBNode node, const Eigen::MatrixXd& u, std::size_t split,
                     std::vector<std::pair<BBNode, Eigen::MatrixXd>>& tasks) {
    if (node.depth() == split) {
      tasks.emplace_back(std::move(node), u);
      return;
    }
    if (!admit(node, u)) return;
    for (auto& [k, child_state] : children(node, u)) {
      BBNode child{node.prefix, kInf};
      child.prefix.push_back(k);
      collect_tasks(std::move(child), child_state, split, tasks);
    }
  }

  FiniteChainProblem problem_;
  BBOptions opt_;
  bool use_dp_ = false;
  bool use_lp_ = false;
  std::optional<DPBound> dp_;
  std::optional<OuterApproximation> outer_;
  Incumbent incumbent_;
  std::atomic<std::size_t> nodes_{0};
  std::atomic<std::size_t> lps_{0};
  std::atomic<double> open_bound_{-kInf};
  std::atomic<bool> limit_hit_{false};
  std::mutex log_mutex_;
};

}  // namespace detail

/// Branch and bound over the step choices. On normal termination the
/// reported value is within `gap` of the optimum; with gap == 0 the result
/// is exact and ties resolve to the lexicographically smallest sequence.
/// `outer` overrides the LP relaxation's Ubar_n (default: propagate_box).
inline SolveReport solve_bb(const FiniteChainProblem& problem, const BBOptions& options = {},
                            const std::optional<OuterApproximation>& outer = std::nullopt) {
  detail::FiniteBranchAndBound bb(problem, options, outer ? &*outer : nullptr);
  return bb.run();
}

/// Number of sequences K^N, saturating at max size_t.
inline std::size_t sequence_count(std::size_t K, std::size_t N) {
  std::size_t total = 1;
  for (std::size_t n = 0; n < N; ++n) {
    if (total > std::numeric_limits<std::size_t>::max() / std::max<std::size_t>(K, 1)) return std::numeric_limits<std::size_t>::max();
    total *= K;
  }
  return total;
}

/// Exhaustive search over all K^N sequences in lexicographic order, reusing
/// prefix products (one matrix product per tree node).
inline SolveReport enumerate_exact(const FiniteChainProblem& problem, std::size_t budget = 100'000'000) {
  problem.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t K = problem.family.size();
  const std::size_t N = problem.horizon;
  const std::size_t total = sequence_count(K, N);
  if (total > budget) {
    throw BudgetExceededError("enumerate_exact: " + std::to_string(K) + "^" + std::to_string(N) +
                              " sequences exceed the budget of " + std::to_string(budget));
  }
  std::vector<Eigen::MatrixXd> state(N + 1);
  state[0] = problem.p;
  std::vector<std::size_t> seq(N, 0);
  SolveReport rep;
  std::size_t depth = 0;  // number of valid prefix states beyond state[0]
  for (;;) {
    for (std::size_t n = depth; n < N; ++n) state[n + 1].noalias() = state[n] * problem.family[seq[n]];
    ++rep.node_count;
    const double value = problem.objective(state[N]);
    if (value > rep.optimal_value + detail::kTieTol) {
      rep.optimal_value = value;
      rep.optimal_sequence = seq;
    }
    // Next sequence in lexicographic order.
    std::size_t pos = N;
    while (pos > 0 && seq[pos - 1] + 1 == K) --pos;
    if (pos == 0) break;
    ++seq[pos - 1];
    for (std::size_t n = pos; n < N; ++n) seq[n] = 0;
    depth = pos - 1;
  }
  rep.best_bound = rep.optimal_value;
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace matchain
