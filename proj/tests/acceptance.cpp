// Acceptance checks. Prints one PASS/FAIL line per criterion; exit code 1
// if any selected criterion fails. Usage: acceptance [criterion ...]

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "matchain/io.hpp"
#include "oracles/film_grid.hpp"
#include "oracles/rotation_grid.hpp"

using namespace matchain;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

const std::string kData = MATCHAIN_DATA_DIR;

const RefractiveTable& refractive() {
  static const RefractiveTable t = parse_refractive_csv(kData + "/refractive_index.csv");
  return t;
}

oracle::CMat to_cmat(const TildeMatrix& w) {
  const auto m = w.complex();
  return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)};
}

// ---- thin-film runs shared by criteria 6 and 10 ----

struct FilmRun {
  MaterialLibrary lib;
  std::size_t layers = 0;
  double solved = 0.0;
  double grid = 0.0;
  double seconds = 0.0;
  std::vector<ThinFilmNode> nodes;
};

const std::vector<FilmRun>& film_runs() {
  static const std::vector<FilmRun> runs = [] {
    std::vector<FilmRun> out;
    for (const auto& pair : std::vector<std::vector<std::string>>{{"TiO2", "MgF2"}, {"SiO2", "Al2O3"}}) {
      const auto lib = refractive().library("Tungsten", 450.0, pair);
      for (std::size_t n = 1; n <= 3; ++n) {
        FilmRun r;
        r.lib = lib;
        r.layers = n;
        ThinFilmOptions o;
        o.threads = 1;
        o.node_logger = [&](const ThinFilmNode& node) { r.nodes.push_back(node); };
        const auto t0 = std::chrono::steady_clock::now();
        r.solved = solve_thinfilm(lib, n, o).report.optimal_value;
        r.seconds = seconds_since(t0);
        r.grid = oracle::grid_optimum(lib.indices, lib.substrate, n, 1e-3).value;
        out.push_back(std::move(r));
      }
    }
    return out;
  }();
  return runs;
}

// ---- time-machine runs shared by criteria 8, 9 and 10 ----

struct AtmRun {
  std::vector<Eigen::MatrixXd> T;
  unsigned g = 0;
  std::size_t initial = 0;
  std::size_t steps = 0;
  SolveReport bb;
  SolveReport exact;
  std::vector<BBNode> nodes;
};

struct AtmBatch {
  std::vector<AtmRun> runs;
  double seconds = 0.0;
};

const AtmBatch& atm_runs() {
  static const AtmBatch batch = [] {
    AtmBatch b;
    std::mt19937_64 rng(8);
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < 50; ++i) {
      AtmRun r;
      r.g = 2 + static_cast<unsigned>(rng() % 3);
      const std::size_t K = 2 + rng() % 4;
      r.steps = 1 + rng() % 6;
      r.T = build_epm(gen_synthetic(r.g, K, 500 + static_cast<std::uint64_t>(i)));
      r.initial = rng() % (std::size_t{1} << r.g);
      ATMOptions o;
      o.bb.gap = 0.0;
      o.bb.threads = 1;
      o.bb.bound = BoundMode::Best;
      o.bb.node_logger = [&](const BBNode& n) { r.nodes.push_back(n); };
      r.bb = solve_atm(r.T, r.initial, 0, r.steps, o);
      r.exact = enumerate_exact(make_atm_problem(r.T, r.initial, 0, r.steps));
      b.runs.push_back(std::move(r));
    }
    b.seconds = seconds_since(t0);
    return b;
  }();
  return batch;
}

// ---- criteria ----

Outcome c1() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> a(1.2, 3.5), t(0.0, 500.0), lam(300.0, 2500.0);
  double det_err = 0.0, add_err = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const MaterialLibrary lib{lam(rng), "s", {3.0, 1.0}, {"m"}, {a(rng)}};
    const double t1 = t(rng), t2 = t(rng);
    const auto T1 = transfer_matrix(0, t1, lib);
    det_err = std::max(det_err, std::abs(T1.det() - 1.0));
    add_err = std::max(add_err, (T1 * transfer_matrix(0, t2, lib)).max_abs_diff(transfer_matrix(0, t1 + t2, lib)));
  }
  const double s = seconds_since(t0);
  return {det_err <= 1e-10 && add_err <= 1e-10 && s < 1.0, fmt("max |det-1| %.2e, additivity %.2e, %.3f s", det_err, add_err, s)};
}

Outcome c2() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 3.0), ar(0.1, 5.0), ai(-5.0, 5.0);
  double worst = 0.0;
  bool symmetric = true;
  for (int i = 0; i < 10000; ++i) {
    TildeMatrix w{u(rng), u(rng), u(rng), 0.0};
    if (std::abs(w.w11) < 1e-3) w.w11 = 1e-3;
    w.w22 = (1.0 - w.w12 * w.w21) / w.w11;
    const std::complex<double> as(ar(rng), ai(rng));
    const double r6 = oracle::reflectance(to_cmat(w), as);
    const double rd = reflectance_from_D(denominator_D(w, as), as);
    worst = std::max(worst, std::abs(r6 - rd) / std::max(1.0, std::abs(r6)));
    symmetric = symmetric && reflectance_of(-w, as) == reflectance_of(w, as);
  }
  return {worst <= 1e-10 && symmetric, fmt("max deviation %.2e, R(-w) == R(w): %s", worst, symmetric ? "yes" : "no")};
}

Outcome c3() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ar(1e-3, 10.0), ai(-10.0, 10.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::complex<double> as(ar(rng), ai(rng));
    worst = std::max(worst, std::abs(reflectance_of(TildeMatrix{}, as) - std::norm(1.0 - as) / std::norm(1.0 + as)));
  }
  return {worst <= 1e-12, fmt("max deviation %.2e", worst)};
}

Outcome c4() {
  const double aH = 2.35, aL = 1.38;
  const std::complex<double> as(3.5, 2.7);
  double closed_vs_product = 0.0;
  TildeMatrix w;
  for (std::size_t n = 1; n <= 20; ++n) {
    w = w * TildeMatrix::layer(0.0, 1.0, n % 2 == 1 ? aH : aL);
    closed_vs_product = std::max(closed_vs_product, w.max_abs_diff(quarter_wave_closed_form(aH, aL, n)) /
                                                        std::max(1.0, std::abs(w.w22) + std::abs(w.w21)));
  }
  const double loss = 1.0 - reflectance_of(quarter_wave_closed_form(aH, aL, 20), as);
  std::size_t first = 0;
  for (std::size_t n = 2; n <= 60 && first == 0; n += 2) {
    if (1.0 - reflectance_of(quarter_wave_closed_form(aH, aL, n), as) < 1e-6) first = n;
  }
  return {loss < 1e-6 && closed_vs_product <= 1e-12,
          fmt("1-R(N=20) = %.3e (a_s = 3.5+2.7i); first even N with 1-R < 1e-6: %zu; closed form vs product %.1e", loss,
              first, closed_vs_product)};
}

Outcome c5() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0), g(0.0, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    double a1 = u(rng), a2 = u(rng), b1 = u(rng), b2 = u(rng);
    if (a1 > a2) std::swap(a1, a2);
    if (b1 > b2) std::swap(b1, b2);
    std::vector<double> gammas;
    for (int k = 1 + static_cast<int>(rng() % 3); k > 0; --k) gammas.push_back(g(rng));
    const auto b = tighten_bounds({a1, a2}, {b1, b2}, gammas);
    const auto [lo, hi] = oracle::rotation_extremes(a1, a2, b1, b2, gammas);
    worst = std::max({worst, std::abs(b.lo - lo), std::abs(b.hi - hi)});
  }
  return {worst <= 2e-3, fmt("max deviation from grid oracle %.2e over 1000 cases", worst)};
}

Outcome c6() {
  double worst = 0.0, slowest = 0.0;
  std::string cells;
  for (const auto& r : film_runs()) {
    worst = std::max(worst, std::abs(r.solved - r.grid));
    slowest = std::max(slowest, r.seconds);
    cells += fmt(" %s/%s N=%zu %.4f/%.4f;", r.lib.names[0].c_str(), r.lib.names[1].c_str(), r.layers, r.solved, r.grid);
  }
  return {worst <= 1e-3 && slowest < 120.0, fmt("max |solver-grid| %.2e, slowest %.2f s;", worst, slowest) + cells};
}

Outcome c7() {
  static const double table[9][7] = {
      {0.470, 0.279, 0.865, 0.778, 0.973, 0.953, 0.995}, {0.508, 0.209, 0.857, 0.683, 0.966, 0.917, 0.992},
      {0.500, 0.169, 0.846, 0.633, 0.961, 0.896, 0.990}, {0.521, 0.223, 0.850, 0.661, 0.961, 0.903, 0.990},
      {0.642, 0.283, 0.892, 0.660, 0.972, 0.899, 0.993}, {0.698, 0.384, 0.910, 0.718, 0.976, 0.917, 0.994},
      {0.866, 0.616, 0.962, 0.805, 0.990, 0.942, 0.997}, {0.933, 0.751, 0.981, 0.844, 0.995, 0.951, 0.999},
      {0.951, 0.787, 0.986, 0.831, 0.996, 0.942, 0.999}};
  const double lambdas[9] = {450, 600, 750, 900, 1200, 1500, 1800, 2100, 2400};
  const auto lib = refractive().library("Tungsten", 450.0);
  const double bare = quarter_wave_heuristic(lib, 0).reflectance;
  const double two = quarter_wave_heuristic(refractive().library("Tungsten", 450.0, {"TiO2", "MgF2"}), 2).reflectance;
  double worst = 0.0;
  for (int i = 0; i < 9; ++i) {
    const auto l = refractive().library("Tungsten", lambdas[i]);
    for (std::size_t n = 0; n <= 6; ++n) worst = std::max(worst, std::abs(quarter_wave_heuristic(l, n).reflectance - table[i][n]));
  }
  return {std::abs(bare - 0.47) <= 0.02 && std::abs(two - 0.87) <= 0.02 && worst <= 0.02,
          fmt("bare %.4f, TiO2/MgF2 quarter-wave %.4f, max heuristic-cell deviation %.4f over 63 cells", bare, two, worst)};
}

Outcome c8() {
  const auto& b = atm_runs();
  double worst = 0.0;
  for (const auto& r : b.runs) worst = std::max(worst, std::abs(r.bb.optimal_value - r.exact.optimal_value));
  return {worst <= 1e-9 && b.seconds < 60.0, fmt("50 instances, max |bb-enum| %.2e, %.2f s total", worst, b.seconds)};
}

Outcome c9() {
  std::size_t checked = 0, nonzero = 0;
  for (const auto& r : atm_runs().runs) {
    const GenotypeSpace sp(r.g);
    for (std::size_t init = 0; init < sp.d(); ++init) {
      const std::size_t h = GenotypeSpace::hamming(init, 0);
      for (std::size_t n = 1; n < h; ++n) {
        ++checked;
        nonzero += solve_atm(r.T, init, 0, n).optimal_value == 0.0 ? 0 : 1;
      }
    }
  }
  return {nonzero == 0 && checked > 0, fmt("%zu (instance, initial, N < distance) cases, %zu nonzero", checked, nonzero)};
}

// Best completion of a thin-film node, by sampling each undetermined material
// assignment on a 5-point-per-layer grid plus random points inside the sigma box.
double film_node_sample_max(const FilmRun& r, const ThinFilmNode& node, std::mt19937_64& rng) {
  const std::size_t N = r.layers;
  std::vector<std::size_t> mats(N);
  double best = -1.0;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t free = N - node.materials.size();
  std::size_t combos = 1;
  for (std::size_t i = 0; i < free; ++i) combos *= r.lib.size();
  for (std::size_t c = 0; c < combos; ++c) {
    std::size_t code = c;
    for (std::size_t n = 0; n < N; ++n) {
      if (n < node.materials.size()) {
        mats[n] = node.materials[n];
      } else {
        mats[n] = code % r.lib.size();
        code /= r.lib.size();
      }
    }
    std::vector<double> idx(N), sig(N);
    for (std::size_t n = 0; n < N; ++n) idx[n] = r.lib.indices[mats[n]];
    std::size_t grid = 1;
    for (std::size_t n = 0; n < N; ++n) grid *= 5;
    for (std::size_t gidx = 0; gidx < grid + 20; ++gidx) {
      std::size_t code2 = gidx;
      for (std::size_t n = 0; n < N; ++n) {
        const double f = gidx < grid ? static_cast<double>(code2 % 5) / 4.0 : u(rng);
        code2 /= 5;
        sig[n] = node.sigma[n].lo + f * node.sigma[n].width();
      }
      best = std::max(best, oracle::reflectance(idx, sig, r.lib.substrate));
    }
  }
  return best;
}

// Exact best completion of an ATM node by enumerating its subtree.
double atm_node_exact(const AtmRun& r, const BBNode& node) {
  auto p = make_atm_problem(r.T, r.initial, 0, r.steps);
  Eigen::MatrixXd u = p.p;
  for (auto k : node.prefix) u = u * p.family[k];
  if (node.depth() == r.steps) return p.objective(u);
  p.p = u;
  p.horizon = r.steps - node.depth();
  return enumerate_exact(p).optimal_value;
}

Outcome c10() {
  std::mt19937_64 rng(10);
  std::size_t film_nodes = 0, film_bad = 0, atm_nodes = 0, atm_bad = 0;
  for (const auto& r : film_runs()) {
    for (const auto& node : r.nodes) {
      ++film_nodes;
      film_bad += film_node_sample_max(r, node, rng) > node.bound + 1e-9 ? 1 : 0;
    }
  }
  for (const auto& r : atm_runs().runs) {
    for (const auto& node : r.nodes) {
      ++atm_nodes;
      atm_bad += atm_node_exact(r, node) > node.bound + 1e-9 ? 1 : 0;
    }
  }
  return {film_bad == 0 && atm_bad == 0,
          fmt("thin-film nodes %zu (violations %zu), time-machine nodes %zu (violations %zu)", film_nodes, film_bad, atm_nodes,
              atm_bad)};
}

Outcome c11() {
  const auto t = parse_growth_csv(kData + "/mira2015_growth.csv");
  const GenotypeSpace sp(4);
  const auto cpm = build_cpm(t);
  const auto epm = build_epm(t);
  const double want0001[6] = {0.287, 0.287, 0.592, 0.592, 0.726, 0.726};
  ATMOptions o;
  o.bb.gap = 0.0;
  bool ok = true;
  std::string cells = "CPM 1000:";
  for (std::size_t N = 1; N <= 6; ++N) {
    const double v = solve_atm(cpm, sp.index("1000"), 0, N, o).optimal_value;
    ok = ok && std::abs(v - 1.0) <= 1e-3;
    cells += fmt(" %.3f", v);
  }
  cells += "; CPM 0001:";
  for (std::size_t N = 1; N <= 6; ++N) {
    const double v = solve_atm(cpm, sp.index("0001"), 0, N, o).optimal_value;
    const bool hit = std::abs(v - want0001[N - 1]) <= 1e-3;
    ok = ok && hit;
    cells += fmt(" %.3f%s", v, hit ? "" : fmt("(want %.3f)", want0001[N - 1]).c_str());
  }
  const double e = solve_atm(epm, sp.index("0001"), 0, 3, o).optimal_value;
  ok = ok && std::abs(e - 0.667) <= 1e-3;
  cells += fmt("; EPM 0001 N=3: %.3f", e);
  return {ok, cells};
}

Outcome c12() {
  const auto T = build_epm(gen_synthetic(5, 30, 20240101));
  double worst_gap = 0.0, total = 0.0;
  std::size_t nodes = 0;
  for (std::size_t init = 1; init < 32; ++init) {
    const auto r = solve_atm(T, init, 0, 10);
    worst_gap = std::max(worst_gap, r.best_bound - r.optimal_value);
    total += r.wall_time;
    nodes += r.node_count;
    if (r.status != SolveStatus::Optimal) worst_gap = kInf;
  }
  return {worst_gap <= 1e-3 && total < 1800.0,
          fmt("g=5 K=30 N=10, 31 initial genotypes: max gap %.2e, %zu nodes, %.2f s total", worst_gap, nodes, total)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::function<Outcome()>> criteria = {{1, c1}, {2, c2}, {3, c3},   {4, c4},   {5, c5},   {6, c6},
                                                            {7, c7}, {8, c8}, {9, c9}, {10, c10}, {11, c11}, {12, c12}};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty()) {
    for (const auto& [k, f] : criteria) selected.push_back(k);
  }
  bool all = true;
  for (int k : selected) {
    const auto it = criteria.find(k);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion %d\n", k);
      return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("criterion %2d: %s  %s  [%.2f s]\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
