#include <gtest/gtest.h>

#include <limits>
#include <numbers>
#include <random>

#include "matchain/optics.hpp"
#include "oracles/film_grid.hpp"
#include "oracles/rotation_grid.hpp"

using namespace matchain;

namespace {

MaterialLibrary tungsten_450() {
  return {450.0, "Tungsten", {3.3445, 2.5239}, {"TiO2", "MgF2", "SiO2", "Al2O3"}, {3.1838, 1.3901, 1.4656, 1.7794}};
}

TildeMatrix random_det_one(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (;;) {
    TildeMatrix w{u(rng), u(rng), u(rng), 0.0};
    if (std::abs(w.w11) < 0.1) continue;
    w.w22 = (1.0 - w.w12 * w.w21) / w.w11;
    return w;
  }
}

}  // namespace

TEST(TransferMatrix, ZeroThicknessIsIdentity) {
  const auto lib = tungsten_450();
  EXPECT_LE(transfer_matrix(0, 0.0, lib).max_abs_diff(TildeMatrix::identity()), 0.0);
}

TEST(TransferMatrix, QuarterWave) {
  const auto lib = tungsten_450();
  for (std::size_t m = 0; m < lib.size(); ++m) {
    const double a = lib.indices[m];
    const auto t = transfer_matrix(m, lib.wavelength / (4.0 * a), lib);
    EXPECT_NEAR(t.w11, 0.0, 1e-15);
    EXPECT_NEAR(t.w22, 0.0, 1e-15);
    EXPECT_NEAR(t.w12, 1.0 / a, 1e-15);
    EXPECT_NEAR(t.w21, a, 1e-14);
  }
}

TEST(TransferMatrix, Errors) {
  const auto lib = tungsten_450();
  EXPECT_THROW(transfer_matrix(7, 1.0, lib), PreconditionError);
  EXPECT_THROW(transfer_matrix(0, -1.0, lib), PreconditionError);
}

TEST(TransferMatrix, DeterminantAndAdditivity) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> idx(1.05, 4.0), thick(0.0, 500.0), lam(300.0, 2500.0);
  for (int i = 0; i < 10000; ++i) {
    const MaterialLibrary lib{lam(rng), "s", {2.0, 1.0}, {"m"}, {idx(rng)}};
    const double t1 = thick(rng);
    const double t2 = thick(rng);
    const auto a = transfer_matrix(0, t1, lib);
    ASSERT_LE(std::abs(a.det() - 1.0), 1e-10);
    ASSERT_LE((a * transfer_matrix(0, t2, lib)).max_abs_diff(transfer_matrix(0, t1 + t2, lib)), 1e-10);
  }
}

TEST(TildeMatrix, MatchesComplexProduct) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> s(0.0, std::numbers::pi), a(1.1, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const auto x = TildeMatrix::layer(std::cos(s(rng)), std::sin(s(rng)), a(rng));
    const auto y = TildeMatrix::layer(std::cos(s(rng)), std::sin(s(rng)), a(rng));
    const Eigen::Matrix2cd prod = x.complex() * y.complex();
    EXPECT_LE((x * y).max_abs_diff(TildeMatrix::from_complex(prod)), 1e-14);
    EXPECT_NEAR(prod(0, 0).imag(), 0.0, 1e-14);
    EXPECT_NEAR(prod(0, 1).real(), 0.0, 1e-14);
    EXPECT_LE((TildeMatrix::from_embedded(x.embedded() * y.embedded())).max_abs_diff(x * y), 1e-14);
  }
}

TEST(Reflectance, FresnelBaseCase) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> re(0.01, 6.0), im(-6.0, 6.0);
  for (int i = 0; i < 100; ++i) {
    const std::complex<double> as(re(rng), im(rng));
    EXPECT_NEAR(reflectance_of(TildeMatrix::identity(), as), std::norm(1.0 - as) / std::norm(1.0 + as), 1e-12);
  }
}

TEST(Reflectance, SignSymmetryAndFormulaEquivalence) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> re(0.1, 5.0), im(-5.0, 5.0);
  for (int i = 0; i < 10000; ++i) {
    const auto w = random_det_one(rng);
    const std::complex<double> as(re(rng), im(rng));
    const double r = reflectance_of(w, as);
    EXPECT_EQ(reflectance_of(-w, as), r);
    EXPECT_NEAR(r, reflectance_from_D(denominator_D(w, as), as), 1e-10);
    EXPECT_GE(denominator_D(w, as), 4.0 * as.real() - 1e-9);
    EXPECT_GE(r, -1e-12);
    EXPECT_LE(r, 1.0 + 1e-12);
  }
}

TEST(Reflectance, AgreesWithComplexCharacteristicMatrix) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> s(0.0, std::numbers::pi), a(1.1, 3.0);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> idx{a(rng), a(rng), a(rng)};
    std::vector<double> sig{s(rng), s(rng), s(rng)};
    TildeMatrix w;
    for (int n = 0; n < 3; ++n) w = w * TildeMatrix::layer(std::cos(sig[n]), std::sin(sig[n]), idx[n]);
    const std::complex<double> as(3.3, 2.5);
    EXPECT_NEAR(reflectance_of(w, as), oracle::reflectance(idx, sig, as), 1e-12);
  }
}

TEST(Reflectance, ZeroDenominatorThrows) {
  EXPECT_THROW(reflectance_of({0.0, 0.0, 0.0, 0.0}, {1.0, 0.0}), PreconditionError);
}

TEST(DenominatorD, IdentityExpansion) {
  const std::complex<double> as(3.5, 2.7);
  // (1)^2 + 0 + (ai)^2 + ar^2 + 2 ar = (1 + ar)^2 + ai^2
  EXPECT_NEAR(denominator_D(TildeMatrix::identity(), as), std::norm(1.0 + as), 1e-12);
}

TEST(QuarterWave, ClosedFormMatchesMultiplication) {
  const double aH = 2.35;
  const double aL = 1.38;
  TildeMatrix w;
  for (std::size_t n = 1; n <= 30; ++n) {
    w = w * TildeMatrix::layer(0.0, 1.0, n % 2 == 1 ? aH : aL);
    const auto closed = quarter_wave_closed_form(aH, aL, n);
    EXPECT_LE(closed.max_abs_diff(w), 1e-12 * std::max(1.0, std::abs(w.w11) + std::abs(w.w12) + std::abs(w.w21) + std::abs(w.w22)))
        << "N=" << n;
  }
}

TEST(QuarterWave, EvenStackDFormula) {
  const double aH = 2.35;
  const double aL = 1.38;
  const std::complex<double> as(3.5, 2.7);
  // Even N = 2m: w = diag(+-rho^-m, +-rho^m), rho = aH/aL, so
  // D = rho^-2m + |a_s|^2 rho^2m + 2 Re(a_s).
  for (std::size_t m = 1; m <= 10; ++m) {
    const double rho = aH / aL;
    const double d = std::pow(rho, -2.0 * m) + std::norm(as) * std::pow(rho, 2.0 * m) + 2.0 * as.real();
    const auto w = quarter_wave_closed_form(aH, aL, 2 * m);
    EXPECT_NEAR(denominator_D(w, as) / d, 1.0, 1e-12);
    EXPECT_NEAR(reflectance_of(w, as), 1.0 - 4.0 * as.real() / d, 1e-10);
  }
}

TEST(TightenBounds, PureCosine) {
  const auto b = tighten_bounds({1.0, 1.0}, {0.0, 0.0}, {1.0});
  EXPECT_DOUBLE_EQ(b.hi, 1.0);
  EXPECT_DOUBLE_EQ(b.lo, -1.0);
}

TEST(TightenBounds, WorkedExample) {
  const auto b = tighten_bounds({-1.0, 2.0}, {-1.0, 3.0}, {2.0});
  EXPECT_NEAR(b.hi, std::sqrt(40.0), 1e-12);
  EXPECT_NEAR(b.lo, -std::sqrt(8.0), 1e-12);
  const auto [lo, hi] = oracle::rotation_extremes(-1.0, 2.0, -1.0, 3.0, {2.0});
  EXPECT_NEAR(b.hi, hi, 1e-3);
  EXPECT_NEAR(b.lo, lo, 1e-3);
}

TEST(TightenBounds, MatchesGridOracle) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-3.0, 3.0), g(0.0, 3.0);
  std::uniform_int_distribution<int> count(1, 3);
  for (int i = 0; i < 1000; ++i) {
    double a1 = u(rng), a2 = u(rng), b1 = u(rng), b2 = u(rng);
    if (a1 > a2) std::swap(a1, a2);
    if (b1 > b2) std::swap(b1, b2);
    std::vector<double> gammas;
    for (int k = count(rng); k > 0; --k) gammas.push_back(g(rng));
    const auto b = tighten_bounds({a1, a2}, {b1, b2}, gammas);
    const auto [lo, hi] = oracle::rotation_extremes(a1, a2, b1, b2, gammas);
    ASSERT_NEAR(b.hi, hi, 2e-3) << i;
    ASSERT_NEAR(b.lo, lo, 2e-3) << i;
  }
}

TEST(TightenBounds, RejectsNegativeGamma) {
  EXPECT_THROW(tighten_bounds({0.0, 1.0}, {0.0, 1.0}, {-1.0}), PreconditionError);
  EXPECT_THROW(tighten_bounds({0.0, 1.0}, {0.0, 1.0}, {}), PreconditionError);
}

TEST(TightenChain, ContainsRandomThreeLayerStates) {
  const auto lib = tungsten_450();
  const auto boxes = tighten_chain(lib.indices, 3);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> s(0.0, std::numbers::pi);
  std::uniform_int_distribution<std::size_t> m(0, lib.size() - 1);
  for (int i = 0; i < 100000; ++i) {
    TildeMatrix u;
    for (std::size_t n = 1; n <= 3; ++n) {
      const double sig = s(rng);
      u = u * TildeMatrix::layer(std::cos(sig), std::sin(sig), lib.indices[m(rng)]);
      ASSERT_TRUE(boxes[n].contains(u, 1e-12)) << "sample " << i << " layer " << n;
    }
  }
}

TEST(RotationRange, EnclosesAndIsTight) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-2.0, 2.0), s(0.0, std::numbers::pi);
  for (int i = 0; i < 300; ++i) {
    double a1 = u(rng), a2 = u(rng), b1 = u(rng), b2 = u(rng), s1 = s(rng), s2 = s(rng);
    if (a1 > a2) std::swap(a1, a2);
    if (b1 > b2) std::swap(b1, b2);
    if (s1 > s2) std::swap(s1, s2);
    const auto r = rotation_range({a1, a2}, {b1, b2}, {s1, s2});
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int k = 0; k <= 2000; ++k) {
      const double t = s1 + (s2 - s1) * k / 2000.0;
      for (double a : {a1, a2}) {
        for (double b : {b1, b2}) {
          const double v = a * std::cos(t) + b * std::sin(t);
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
    }
    EXPECT_LE(r.lo, lo + 1e-12);
    EXPECT_GE(r.hi, hi - 1e-12);
    EXPECT_NEAR(r.lo, lo, 1e-5);
    EXPECT_NEAR(r.hi, hi, 1e-5);
  }
}

TEST(PropagateLayer, ContainsSampledProducts) {
  const auto lib = tungsten_450();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> s(0.0, std::numbers::pi);
  const std::vector<Interval> ranges = {{0.2, 0.9}, {1.0, 2.5}, {0.0, std::numbers::pi}};
  std::vector<TildeBox> boxes{TildeBox{}};
  for (const auto& r : ranges) boxes.push_back(propagate_layer(boxes.back(), {lib.indices[0], lib.indices[1]}, r));
  for (int i = 0; i < 20000; ++i) {
    TildeMatrix u;
    for (std::size_t n = 0; n < ranges.size(); ++n) {
      const double sig = ranges[n].lo + (ranges[n].hi - ranges[n].lo) * s(rng) / std::numbers::pi;
      u = u * TildeMatrix::layer(std::cos(sig), std::sin(sig), lib.indices[i % 2]);
      ASSERT_TRUE(boxes[n + 1].contains(u, 1e-12));
    }
    EXPECT_LE(denominator_D(u, lib.substrate), denominator_upper(boxes.back(), lib.substrate) + 1e-9);
  }
}

TEST(MaterialLibraryTest, Validation) {
  auto lib = tungsten_450();
  EXPECT_NO_THROW(lib.validate());
  EXPECT_EQ(lib.highest(), 0u);
  EXPECT_EQ(lib.lowest(), 1u);
  EXPECT_EQ(lib.find("SiO2"), 2u);
  EXPECT_THROW(lib.find("Gold"), PreconditionError);
  const auto sub = lib.subset({"MgF2", "TiO2"});
  EXPECT_EQ(sub.size(), 2u);
  EXPECT_DOUBLE_EQ(sub.indices[1], 3.1838);
  lib.indices[1] = 0.9;
  EXPECT_THROW(lib.validate(), PreconditionError);
  lib = tungsten_450();
  lib.wavelength = 0.0;
  EXPECT_THROW(lib.validate(), PreconditionError);
  lib = tungsten_450();
  lib.substrate = {-1.0, 0.0};
  EXPECT_THROW(lib.validate(), PreconditionError);
}
