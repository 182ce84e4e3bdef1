#pragma once

// Multi-layer thin-film reflectance maximization.
//
// A design picks a coating material and a phase angle sigma in [0, pi] for
// each of N layers; the stack's cumulative tilde matrix w = T_1 ... T_N
// determines R = 1 - 4 Re(a_s) / D(w). Maximizing R is maximizing the convex
// quadratic D.
//
// solve_thinfilm is a best-first spatial branch and bound: materials are
// fixed layer by layer first (no two consecutive layers share a material),
// then sigma intervals are bisected. Node bounds take the smaller of an
// interval enclosure of D (exact rotation ranges per layer, determinant
// contraction on the final matrix) and, once all materials are fixed, a
// mean-value form built from interval derivatives.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <queue>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "matchain/chain.hpp"
#include "matchain/disjunctive.hpp"
#include "matchain/error.hpp"
#include "matchain/formulation.hpp"
#include "matchain/interval.hpp"
#include "matchain/optics.hpp"

namespace matchain {

struct TransferLayer {
  std::size_t material = 0;
  double C = 1.0;
  double S = 0.0;

  static TransferLayer from_sigma(std::size_t m, double sigma) { return {m, std::cos(sigma), std::sin(sigma)}; }

  static TransferLayer from_thickness(std::size_t m, double t, const MaterialLibrary& lib) {
    if (t < 0.0) throw PreconditionError("TransferLayer: negative thickness");
    return from_sigma(m, phase(lib.index(m), t, lib.wavelength));
  }

  [[nodiscard]] double sigma() const { return std::atan2(S, C); }

  /// Physical thickness in nm; sigma is taken in [0, pi].
  [[nodiscard]] double thickness(const MaterialLibrary& lib) const {
    return lib.wavelength * std::acos(std::clamp(C, -1.0, 1.0)) / (2.0 * std::numbers::pi * lib.index(material));
  }

  [[nodiscard]] TildeMatrix matrix(const MaterialLibrary& lib) const { return TildeMatrix::layer(C, S, lib.index(material)); }

  [[nodiscard]] bool valid(double tol = 1e-10) const { return std::abs(C * C + S * S - 1.0) <= tol && S >= -tol; }
};

enum class DesignProvenance { Heuristic, Optimal, Incumbent };

inline const char* to_string(DesignProvenance p) {
  switch (p) {
    case DesignProvenance::Heuristic: return "heuristic";
    case DesignProvenance::Optimal: return "optimal";
    case DesignProvenance::Incumbent: return "incumbent";
  }
  return "?";
}

inline TildeMatrix cumulative_matrix(const std::vector<TransferLayer>& layers, const MaterialLibrary& lib) {
  TildeMatrix w;
  for (const auto& l : layers) w = w * l.matrix(lib);
  return w;
}

struct StackDesign {
  std::vector<TransferLayer> layers;
  double reflectance = 0.0;
  DesignProvenance provenance = DesignProvenance::Incumbent;

  [[nodiscard]] std::vector<std::size_t> materials() const {
    std::vector<std::size_t> out;
    for (const auto& l : layers) out.push_back(l.material);
    return out;
  }
};

inline StackDesign make_design(std::vector<TransferLayer> layers, const MaterialLibrary& lib, DesignProvenance prov) {
  StackDesign d{std::move(layers), 0.0, prov};
  d.reflectance = reflectance_of(cumulative_matrix(d.layers, lib), lib.substrate);
  return d;
}

/// The thin-film problem in chain form: p = I (embedded), steps drawn from
/// the layer matrices of the library, objective R(w).
struct ThinFilmFamily {
  MaterialLibrary library;

  void validate() const { library.validate(); }
  [[nodiscard]] Eigen::Index dim() const { return 2; }
};

struct ReflectanceObjective {
  std::complex<double> substrate;

  [[nodiscard]] double operator()(const Eigen::MatrixXd& embedded) const {
    return reflectance_of(TildeMatrix::from_embedded(embedded), substrate);
  }
};

using ThinFilmProblem = ChainProblem<ThinFilmFamily, ReflectanceObjective>;

inline ThinFilmProblem make_thinfilm_problem(const MaterialLibrary& lib, std::size_t layers) {
  ThinFilmProblem p;
  p.p = Eigen::MatrixXd::Identity(2, 2);
  p.horizon = layers;
  p.family = ThinFilmFamily{lib};
  p.objective = ReflectanceObjective{lib.substrate};
  return p;
}

/// Alternating quarter-wave layers of the highest and lowest index
/// coatings, highest first.
inline StackDesign quarter_wave_heuristic(const MaterialLibrary& lib, std::size_t layers) {
  lib.validate();
  if (lib.size() < 2) throw PreconditionError("quarter_wave_heuristic: needs at least two coating materials");
  const std::size_t hi = lib.highest();
  const std::size_t lo = lib.lowest();
  std::vector<TransferLayer> out;
  for (std::size_t n = 0; n < layers; ++n) out.push_back({n % 2 == 0 ? hi : lo, 0.0, 1.0});
  return make_design(std::move(out), lib, DesignProvenance::Heuristic);
}

namespace detail {

// phi(w) with D(w) = |phi(w)|^2 + 2 Re(a_s).
inline Eigen::Vector4d phi(const TildeMatrix& w, std::complex<double> as) {
  return {w.w11 - as.imag() * w.w12, as.real() * w.w12, w.w21 + as.imag() * w.w22, as.real() * w.w22};
}

struct PhiBox {
  Interval e[4];
};

inline PhiBox phi(const TildeBox& w, std::complex<double> as) {
  return {{w.w11 - as.imag() * w.w12, as.real() * w.w12, w.w21 + as.imag() * w.w22, as.real() * w.w22}};
}

inline TildeMatrix scaled_swap(double a) { return {0.0, 1.0 / a, a, 0.0}; }

// Best (C, S) with S >= 0 for D = |C f1 + S f2|^2 + const: the top
// eigenvector of the 2x2 Gram matrix.
inline std::pair<double, double> best_rotation(const Eigen::Vector4d& f1, const Eigen::Vector4d& f2) {
  Eigen::Matrix2d g;
  g << f1.dot(f1), f1.dot(f2), f1.dot(f2), f2.dot(f2);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(g);
  Eigen::Vector2d v = es.eigenvectors().col(1);
  if (v[1] < 0.0 || (v[1] == 0.0 && v[0] < 0.0)) v = -v;
  return {v[0], v[1]};
}

}  // namespace detail

/// Cyclic coordinate ascent on the layer angles with materials fixed. Each
/// coordinate step maximizes D exactly: with the other layers fixed, D is a
/// quadratic form in (C_n, S_n) on the unit half circle.
inline StackDesign local_refine(const StackDesign& design, const MaterialLibrary& lib, std::size_t max_sweeps = 200) {
  StackDesign cur = design;
  const std::size_t N = cur.layers.size();
  if (N == 0) return make_design({}, lib, design.provenance);
  double best = denominator_D(cumulative_matrix(cur.layers, lib), lib.substrate);
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    const double before = best;
    for (std::size_t n = 0; n < N; ++n) {
      TildeMatrix left, right;
      for (std::size_t i = 0; i < n; ++i) left = left * cur.layers[i].matrix(lib);
      for (std::size_t i = n + 1; i < N; ++i) right = right * cur.layers[i].matrix(lib);
      const double a = lib.index(cur.layers[n].material);
      const Eigen::Vector4d f1 = detail::phi(left * right, lib.substrate);
      const Eigen::Vector4d f2 = detail::phi(left * detail::scaled_swap(a) * right, lib.substrate);
      const auto [c, s] = detail::best_rotation(f1, f2);
      const Eigen::Vector4d f = c * f1 + s * f2;
      const double d = f.squaredNorm() + 2.0 * lib.substrate.real();
      if (d > best) {
        best = d;
        cur.layers[n].C = c;
        cur.layers[n].S = s;
      }
    }
    if (best - before <= 1e-13 * best) break;
  }
  cur.reflectance = reflectance_of(cumulative_matrix(cur.layers, lib), lib.substrate);
  if (cur.reflectance < design.reflectance) return design;
  return cur;
}

/// Tilde product of enclosures (no dependency tracking).
inline TildeBox operator*(const TildeBox& a, const TildeBox& b) {
  TildeBox o;
  o.w11 = a.w11 * b.w11 - a.w12 * b.w21;
  o.w12 = a.w11 * b.w12 + a.w12 * b.w22;
  o.w21 = a.w21 * b.w11 + a.w22 * b.w21;
  o.w22 = a.w22 * b.w22 - a.w21 * b.w12;
  return o;
}

/// Box for T(a, s) * q with s in `phase_range`.
inline TildeBox propagate_layer_left(const TildeBox& q, double a, Interval phase_range) {
  TildeBox o;
  o.w11 = rotation_range(q.w11, -(1.0 / a) * q.w21, phase_range);
  o.w12 = rotation_range(q.w12, (1.0 / a) * q.w22, phase_range);
  o.w21 = rotation_range(q.w21, a * q.w11, phase_range);
  o.w22 = rotation_range(q.w22, -a * q.w12, phase_range);
  return o;
}

/// Box for T'(a, s) * q, T' the derivative of the layer matrix in s.
inline TildeBox propagate_derivative_left(const TildeBox& q, double a, Interval phase_range) {
  TildeBox o;
  o.w11 = rotation_range(-(1.0 / a) * q.w21, -q.w11, phase_range);
  o.w12 = rotation_range((1.0 / a) * q.w22, -q.w12, phase_range);
  o.w21 = rotation_range(a * q.w11, -q.w21, phase_range);
  o.w22 = rotation_range(-a * q.w12, -q.w22, phase_range);
  return o;
}

namespace detail {

inline Interval divide(Interval num, Interval den) {
  if (den.lo <= 0.0 && den.hi >= 0.0) return {-kInf, kInf};
  return num * Interval{1.0 / den.hi, 1.0 / den.lo};
}

// Narrows x given x * y in target (y bounded away from zero).
inline bool narrow_product(Interval& x, Interval y, Interval target) {
  const Interval q = divide(target, y);
  x = intersect(x, q);
  return x.valid();
}

}  // namespace detail

/// Contracts a final-matrix box with w11 w22 + w12 w21 = 1. Returns false
/// if the box holds no determinant-one matrix.
inline bool contract_det(TildeBox& w, int rounds = 2) {
  for (int r = 0; r < rounds; ++r) {
    const Interval one{1.0};
    if (!detail::narrow_product(w.w11, w.w22, one - w.w12 * w.w21)) return false;
    if (!detail::narrow_product(w.w22, w.w11, one - w.w12 * w.w21)) return false;
    if (!detail::narrow_product(w.w12, w.w21, one - w.w11 * w.w22)) return false;
    if (!detail::narrow_product(w.w21, w.w12, one - w.w11 * w.w22)) return false;
  }
  return true;
}

struct ThinFilmNode {
  std::vector<std::size_t> materials;  // fixed prefix
  std::vector<Interval> sigma;         // one per layer
  double bound = kInf;                 // upper bound on R
};

struct ThinFilmOptions {
  double gap = 1e-3;  // relative, on R
  double target = kInf;  // stop once an incumbent reaches this R
  double time_limit = kInf;  // seconds
  bool symmetry_breaking = true;
  unsigned threads = 0;
  std::size_t node_limit = 0;
  std::function<void(const ThinFilmNode&)> node_logger;
};

struct ThinFilmResult {
  SolveReport report;  // optimal_sequence holds the materials
  StackDesign design;
};

namespace detail {

class ThinFilmSearch {
 public:
  ThinFilmSearch(const MaterialLibrary& lib, std::size_t layers, const ThinFilmOptions& opt)
      : lib_(lib), N_(layers), opt_(opt) {
    lib_.validate();
    if (N_ < 1) throw PreconditionError("solve_thinfilm: at least one layer required");
    symmetry_ = opt_.symmetry_breaking && lib_.size() > 1;
    ar2_ = 2.0 * lib_.substrate.real();
  }

  ThinFilmResult run() {
    start_ = std::chrono::steady_clock::now();
    seed_incumbent();
    ThinFilmNode root;
    root.sigma.assign(N_, Interval{0.0, std::numbers::pi});
    root.bound = bound(root);
    log(root);
    ++nodes_;
    push(std::move(root));

    const unsigned threads = resolve_threads(opt_.threads);
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back([this] { work(); });
    work();
    for (auto& th : pool) th.join();
    return finish();
  }

 private:
  struct Entry {
    ThinFilmNode node;
    bool operator<(const Entry& o) const { return node.bound < o.node.bound; }
  };

  [[nodiscard]] double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  [[nodiscard]] double incumbent_value() const {
    std::lock_guard lock(inc_mutex_);
    return best_.reflectance;
  }

  [[nodiscard]] double prune_level() const {
    const double inc = incumbent_value();
    return inc + opt_.gap * std::max(inc, 0.0);
  }

  void offer(const StackDesign& d) {
    std::lock_guard lock(inc_mutex_);
    if (!have_best_ || d.reflectance > best_.reflectance) {
      best_ = d;
      have_best_ = true;
    }
  }

  void seed_incumbent() {
    if (lib_.size() >= 2) {
      offer(local_refine(quarter_wave_heuristic(lib_, N_), lib_));
    } else {
      std::vector<TransferLayer> layers(N_, TransferLayer{0, 0.0, 1.0});
      offer(local_refine(make_design(layers, lib_, DesignProvenance::Incumbent), lib_));
    }
  }

  void log(const ThinFilmNode& n) {
    if (!opt_.node_logger) return;
    std::lock_guard lock(log_mutex_);
    opt_.node_logger(n);
  }

  void push(ThinFilmNode n) {
    std::lock_guard lock(queue_mutex_);
    queue_.push(Entry{std::move(n)});
    cv_.notify_one();
  }

  void work() {
    for (;;) {
      ThinFilmNode node;
      {
        std::unique_lock lock(queue_mutex_);
        for (;;) {
          if (stop_) return;
          if (!queue_.empty() && queue_.top().node.bound > prune_level()) break;
          if (busy_ == 0) {
            // Best-first: whatever is left lies within the gap.
            if (!queue_.empty()) closed_bound_ = std::max(closed_bound_, queue_.top().node.bound);
            while (!queue_.empty()) queue_.pop();
            stop_ = true;
            cv_.notify_all();
            return;
          }
          cv_.wait(lock);
        }
        if (incumbent_value() >= opt_.target) {
          status_ = SolveStatus::TargetReached;
          halt();
          return;
        }
        if (elapsed() > opt_.time_limit) {
          status_ = SolveStatus::TimeLimit;
          halt();
          return;
        }
        if (opt_.node_limit > 0 && nodes_.load() >= opt_.node_limit) {
          status_ = SolveStatus::NodeLimit;
          halt();
          return;
        }
        node = queue_.top().node;
        queue_.pop();
        ++busy_;
      }
      expand(node);
      {
        std::lock_guard lock(queue_mutex_);
        --busy_;
        cv_.notify_all();
      }
    }
  }

  // Caller holds queue_mutex_; open nodes keep their bounds for the report.
  void halt() {
    while (!queue_.empty()) {
      open_bound_ = std::max(open_bound_, queue_.top().node.bound);
      queue_.pop();
    }
    stop_ = true;
    cv_.notify_all();
  }

  void admit(ThinFilmNode child, double parent_bound) {
    ++nodes_;
    child.bound = std::min(bound(child), parent_bound);
    log(child);
    if (child.bound <= prune_level()) {
      std::lock_guard lock(queue_mutex_);
      closed_bound_ = std::max(closed_bound_, child.bound);
      return;
    }
    push(std::move(child));
  }

  void expand(const ThinFilmNode& node) {
    if (node.materials.size() < N_) {
      for (std::size_t m = 0; m < lib_.size(); ++m) {
        if (symmetry_ && !node.materials.empty() && node.materials.back() == m) continue;
        ThinFilmNode child = node;
        child.materials.push_back(m);
        if (child.materials.size() == N_) refine_from(child);
        admit(std::move(child), node.bound);
      }
      return;
    }
    const std::size_t n = branch_layer(node);
    const double mid = node.sigma[n].mid();
    for (int side = 0; side < 2; ++side) {
      ThinFilmNode child = node;
      child.sigma[n] = side == 0 ? Interval{node.sigma[n].lo, mid} : Interval{mid, node.sigma[n].hi};
      offer(center_design(child));
      admit(std::move(child), node.bound);
    }
  }

  [[nodiscard]] StackDesign center_design(const ThinFilmNode& node) const {
    std::vector<TransferLayer> layers;
    for (std::size_t n = 0; n < N_; ++n) layers.push_back(TransferLayer::from_sigma(node.materials[n], node.sigma[n].mid()));
    return make_design(std::move(layers), lib_, DesignProvenance::Incumbent);
  }

  // Incumbents for a newly completed material assignment.
  void refine_from(const ThinFilmNode& node) {
    for (double start : {std::numbers::pi / 2.0, std::numbers::pi / 4.0, 3.0 * std::numbers::pi / 4.0}) {
      std::vector<TransferLayer> layers;
      for (std::size_t n = 0; n < N_; ++n) layers.push_back(TransferLayer::from_sigma(node.materials[n], start));
      offer(local_refine(make_design(std::move(layers), lib_, DesignProvenance::Incumbent), lib_));
    }
  }

  // Widest sigma interval scaled by the magnitude of its layer's state box.
  [[nodiscard]] std::size_t branch_layer(const ThinFilmNode& node) const {
    std::size_t best = 0;
    double score = -1.0;
    TildeBox u;
    for (std::size_t n = 0; n < N_; ++n) {
      u = propagate_layer(u, {lib_.index(node.materials[n])}, node.sigma[n]);
      const double s = node.sigma[n].width() * u.magnitude();
      if (s > score) {
        score = s;
        best = n;
      }
    }
    return best;
  }

  [[nodiscard]] std::vector<double> free_indices(std::size_t prev, bool has_prev) const {
    std::vector<double> out;
    for (std::size_t m = 0; m < lib_.size(); ++m) {
      if (symmetry_ && has_prev && m == prev && lib_.size() > 1) continue;
      out.push_back(lib_.index(m));
    }
    return out;
  }

  [[nodiscard]] double r_of(double d) const {
    if (!(d > 0.0)) return 1.0;
    return std::clamp(1.0 - 2.0 * ar2_ / d, 0.0, 1.0);
  }

  [[nodiscard]] double bound(const ThinFilmNode& node) const {
    // Interval enclosure.
    TildeBox u;
    std::vector<TildeBox> prefix{u};
    for (std::size_t n = 0; n < N_; ++n) {
      if (n < node.materials.size()) {
        u = propagate_layer(u, {lib_.index(node.materials[n])}, node.sigma[n]);
      } else {
        const bool has_prev = n > 0 && n - 1 < node.materials.size();
        u = propagate_layer(u, free_indices(has_prev ? node.materials[n - 1] : 0, has_prev), node.sigma[n]);
      }
      prefix.push_back(u);
    }
    if (!contract_det(u)) return -kInf;
    prefix.back() = u;
    double d_up = denominator_upper(u, lib_.substrate);
    if (node.materials.size() == N_) d_up = std::min(d_up, mean_value_upper(node, prefix));
    return r_of(d_up);
  }

  // D(center) + sum_n r_n * |dD/dsigma_n| over the box.
  [[nodiscard]] double mean_value_upper(const ThinFilmNode& node, const std::vector<TildeBox>& prefix) const {
    std::vector<TildeBox> suffix(N_ + 1);  // suffix[n] = T_n ... T_N (0-based layers n..N-1)
    for (std::size_t n = N_; n-- > 0;) {
      suffix[n] = propagate_layer_left(suffix[n + 1], lib_.index(node.materials[n]), node.sigma[n]);
    }
    TildeMatrix center;
    for (std::size_t n = 0; n < N_; ++n) {
      const double s = node.sigma[n].mid();
      center = center * TildeMatrix::layer(std::cos(s), std::sin(s), lib_.index(node.materials[n]));
    }
    double d = denominator_D(center, lib_.substrate);
    const detail::PhiBox fw = detail::phi(prefix[N_], lib_.substrate);
    for (std::size_t n = 0; n < N_; ++n) {
      const double r = 0.5 * node.sigma[n].width();
      if (r == 0.0) continue;
      const TildeBox dw = prefix[n] * propagate_derivative_left(suffix[n + 1], lib_.index(node.materials[n]), node.sigma[n]);
      const detail::PhiBox fd = detail::phi(dw, lib_.substrate);
      Interval g{0.0};
      for (int i = 0; i < 4; ++i) g = g + fw.e[i] * fd.e[i];
      d += r * 2.0 * g.mag();
    }
    return d;
  }

  ThinFilmResult finish() {
    ThinFilmResult res;
    res.design = best_;
    const bool done = status_ == SolveStatus::Optimal;
    res.design.provenance = done ? DesignProvenance::Optimal : DesignProvenance::Incumbent;
    auto& rep = res.report;
    rep.status = status_;
    rep.optimal_value = best_.reflectance;
    rep.optimal_sequence = best_.materials();
    rep.best_bound = std::max({best_.reflectance, closed_bound_, open_bound_});
    rep.gap = best_.reflectance > 0.0 ? (rep.best_bound - best_.reflectance) / best_.reflectance : rep.best_bound;
    rep.node_count = nodes_.load();
    rep.wall_time = elapsed();
    return res;
  }

  MaterialLibrary lib_;
  std::size_t N_;
  ThinFilmOptions opt_;
  bool symmetry_ = true;
  double ar2_ = 0.0;
  std::chrono::steady_clock::time_point start_;

  mutable std::mutex inc_mutex_;
  StackDesign best_;
  bool have_best_ = false;

  std::mutex queue_mutex_;
  std::condition_variable cv_;
  std::priority_queue<Entry> queue_;
  unsigned busy_ = 0;
  bool stop_ = false;
  SolveStatus status_ = SolveStatus::Optimal;
  double closed_bound_ = -kInf;
  double open_bound_ = -kInf;

  std::mutex log_mutex_;
  std::atomic<std::size_t> nodes_{0};
};

}  // namespace detail

/// Globally maximizes R over N-layer designs to the relative gap in
/// `options`. With a time, node or target stop the best design found is
/// returned with the bound still open.
inline ThinFilmResult solve_thinfilm(const MaterialLibrary& lib, std::size_t layers, const ThinFilmOptions& options = {}) {
  detail::ThinFilmSearch search(lib, layers, options);
  return search.run();
}

struct ThinFilmFormulationOptions {
  bool det_cut = true;
  bool symmetry_breaking = true;
};

struct ThinFilmFormulation {
  Model model;
  std::size_t layers = 0;
  std::size_t materials = 0;
  std::vector<std::size_t> C, S;
  std::vector<std::vector<std::size_t>> x, v;  // [n][m]
  std::vector<std::array<std::size_t, 4>> u;   // u[n] = (w11, w12, w21, w22), n = 0..N
};

/// Mixed-integer bilinear model of the N-layer problem with the objective D.
inline ThinFilmFormulation build_thinfilm_formulation(const MaterialLibrary& lib, std::size_t layers,
                                                      const ThinFilmFormulationOptions& opt = {}) {
  lib.validate();
  if (layers < 1) throw PreconditionError("build_thinfilm_formulation: at least one layer required");
  const std::size_t K = lib.size();
  ThinFilmFormulation f;
  f.layers = layers;
  f.materials = K;
  Model& m = f.model;
  m.kind = "miqcqp";
  const auto boxes = tighten_chain(lib.indices, layers);
  const auto idx = [](std::size_t n) { return std::to_string(n); };

  const char* entry_names[4] = {"11", "12", "21", "22"};
  f.u.resize(layers + 1);
  for (std::size_t n = 0; n <= layers; ++n) {
    const Interval b[4] = {boxes[n].w11, boxes[n].w12, boxes[n].w21, boxes[n].w22};
    for (int e = 0; e < 4; ++e) {
      f.u[n][e] = m.add_variable("u_" + idx(n) + "_" + entry_names[e], VarKind::Continuous, b[e].lo, b[e].hi);
    }
  }
  std::vector<std::array<std::size_t, 4>> t(layers);
  f.x.assign(layers, std::vector<std::size_t>(K));
  f.v.assign(layers, std::vector<std::size_t>(K));
  double amax = 0.0;
  double amin = kInf;
  for (double a : lib.indices) {
    amax = std::max(amax, a);
    amin = std::min(amin, a);
  }
  for (std::size_t n = 0; n < layers; ++n) {
    const std::string s = idx(n + 1);
    f.C.push_back(m.add_variable("C_" + s, VarKind::Continuous, -1.0, 1.0));
    f.S.push_back(m.add_variable("S_" + s, VarKind::Continuous, 0.0, 1.0));
    t[n][0] = m.add_variable("t11_" + s, VarKind::Continuous, -1.0, 1.0);
    t[n][1] = m.add_variable("t12_" + s, VarKind::Continuous, 0.0, 1.0 / amin);
    t[n][2] = m.add_variable("t21_" + s, VarKind::Continuous, 0.0, amax);
    t[n][3] = m.add_variable("t22_" + s, VarKind::Continuous, -1.0, 1.0);
    for (std::size_t k = 0; k < K; ++k) {
      f.x[n][k] = m.add_variable("x_" + s + "_" + lib.names[k], VarKind::Binary, 0.0, 1.0);
      f.v[n][k] = m.add_variable("v_" + s + "_" + lib.names[k], VarKind::Continuous, 0.0, 1.0);
    }
  }
  for (std::size_t n = 0; n < layers; ++n) {
    const std::string s = idx(n + 1);
    auto& trig = m.add_constraint("trig_" + s, "trig", RowSense::Equal, 1.0);
    trig.bilinear = {{f.C[n], f.C[n], 1.0}, {f.S[n], f.S[n], 1.0}};
    m.add_constraint("cos11_" + s, "cos", RowSense::Equal, 0.0).linear = {{t[n][0], 1.0}, {f.C[n], -1.0}};
    m.add_constraint("cos22_" + s, "cos", RowSense::Equal, 0.0).linear = {{t[n][3], 1.0}, {f.C[n], -1.0}};
    std::vector<LinearTerm> sin_sum_terms{{f.S[n], -1.0}}, sin12_terms{{t[n][1], -1.0}}, sin21_terms{{t[n][2], -1.0}};
    std::vector<LinearTerm> choose_terms;
    for (std::size_t k = 0; k < K; ++k) {
      const double a = lib.indices[k];
      sin_sum_terms.push_back({f.v[n][k], 1.0});
      sin12_terms.push_back({f.v[n][k], 1.0 / a});
      sin21_terms.push_back({f.v[n][k], a});
      choose_terms.push_back({f.x[n][k], 1.0});
    }
    m.add_constraint("sin_" + s, "sin", RowSense::Equal, 0.0).linear = std::move(sin_sum_terms);
    m.add_constraint("sin12_" + s, "sin", RowSense::Equal, 0.0).linear = std::move(sin12_terms);
    m.add_constraint("sin21_" + s, "sin", RowSense::Equal, 0.0).linear = std::move(sin21_terms);
    m.add_constraint("choose_" + s, "choose", RowSense::Equal, 1.0).linear = std::move(choose_terms);
    for (std::size_t k = 0; k < K; ++k) {
      m.add_constraint("bigm_" + s + "_" + lib.names[k], "bigm", RowSense::LessEqual, 0.0).linear = {{f.v[n][k], 1.0},
                                                                                                     {f.x[n][k], -1.0}};
    }
    // u_{n+1} = u_n T_{n+1} in tilde arithmetic.
    const auto& a = f.u[n];
    const auto& b = f.u[n + 1];
    auto& c11 = m.add_constraint("chain11_" + s, "chain", RowSense::Equal, 0.0);
    c11.linear = {{b[0], -1.0}};
    c11.bilinear = {{a[0], t[n][0], 1.0}, {a[1], t[n][2], -1.0}};
    auto& c12 = m.add_constraint("chain12_" + s, "chain", RowSense::Equal, 0.0);
    c12.linear = {{b[1], -1.0}};
    c12.bilinear = {{a[0], t[n][1], 1.0}, {a[1], t[n][3], 1.0}};
    auto& c21 = m.add_constraint("chain21_" + s, "chain", RowSense::Equal, 0.0);
    c21.linear = {{b[2], -1.0}};
    c21.bilinear = {{a[2], t[n][0], 1.0}, {a[3], t[n][2], 1.0}};
    auto& c22 = m.add_constraint("chain22_" + s, "chain", RowSense::Equal, 0.0);
    c22.linear = {{b[3], -1.0}};
    c22.bilinear = {{a[3], t[n][3], 1.0}, {a[2], t[n][1], -1.0}};
  }
  // u_0 = I through its bounds.
  for (int e = 0; e < 4; ++e) {
    const double val = (e == 0 || e == 3) ? 1.0 : 0.0;
    m.variables[f.u[0][e]].lower = val;
    m.variables[f.u[0][e]].upper = val;
  }
  const auto& w = f.u[layers];
  if (opt.det_cut) {
    m.add_constraint("det", "det", RowSense::Equal, 1.0).bilinear = {{w[0], w[3], 1.0}, {w[1], w[2], 1.0}};
  }
  if (opt.symmetry_breaking && K > 1) {
    for (std::size_t n = 0; n + 1 < layers; ++n) {
      for (std::size_t k = 0; k < K; ++k) {
        m.add_constraint("sym_" + idx(n + 1) + "_" + lib.names[k], "symmetry", RowSense::LessEqual, 1.0).linear = {
            {f.x[n][k], 1.0}, {f.x[n + 1][k], 1.0}};
      }
    }
  }
  // D(w) = (w11 - ai w12)^2 + ar^2 w12^2 + (w21 + ai w22)^2 + ar^2 w22^2 + 2 ar.
  const double ar = lib.substrate.real();
  const double ai = lib.substrate.imag();
  auto& obj = m.objective;
  obj.sense = ObjectiveSense::Maximize;
  obj.constant = 2.0 * ar;
  obj.quadratic = {{w[0], w[0], 1.0},           {w[0], w[1], -2.0 * ai}, {w[1], w[1], ai * ai + ar * ar},
                   {w[2], w[2], 1.0},           {w[2], w[3], 2.0 * ai},  {w[3], w[3], ai * ai + ar * ar}};
  m.validate();
  return f;
}

}  // namespace matchain
