#pragma once

// Normal-incidence thin-film optics on the real "tilde" representation.
//
// Transfer matrices and their products have real diagonal and imaginary
// off-diagonal entries; TildeMatrix keeps the real parts of the diagonal and
// the imaginary parts of the off-diagonal:
//
//   T = [ cos s      i sin s / a ]      ~T = [ C    S/a ]
//       [ i a sin s  cos s       ]           [ aS   C   ]
//
// so det(T) = w11 w22 + w12 w21 on the tilde entries.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "matchain/error.hpp"
#include "matchain/interval.hpp"

namespace matchain {

/// Refractive indices at a single wavelength.
struct MaterialLibrary {
  double wavelength = 0.0;  // nm
  std::string substrate_name;
  std::complex<double> substrate;
  std::vector<std::string> names;  // coating materials
  std::vector<double> indices;

  void validate() const {
    if (!(wavelength > 0.0)) throw PreconditionError("MaterialLibrary: wavelength must be positive");
    if (!(substrate.real() > 0.0)) throw PreconditionError("MaterialLibrary: substrate index needs a positive real part");
    if (names.size() != indices.size()) throw DimensionError("MaterialLibrary: names/indices length mismatch");
    if (indices.empty()) throw PreconditionError("MaterialLibrary: no coating materials");
    for (std::size_t m = 0; m < indices.size(); ++m) {
      if (!(indices[m] > 1.0)) throw PreconditionError("MaterialLibrary: coating index of " + names[m] + " must exceed 1");
    }
  }

  [[nodiscard]] std::size_t size() const { return indices.size(); }

  [[nodiscard]] double index(std::size_t m) const {
    if (m >= indices.size()) throw PreconditionError("MaterialLibrary: unknown material " + std::to_string(m));
    return indices[m];
  }

  [[nodiscard]] std::size_t find(const std::string& name) const {
    for (std::size_t m = 0; m < names.size(); ++m) {
      if (names[m] == name) return m;
    }
    throw PreconditionError("MaterialLibrary: unknown material " + name);
  }

  [[nodiscard]] std::size_t highest() const {
    std::size_t best = 0;
    for (std::size_t m = 1; m < indices.size(); ++m) best = indices[m] > indices[best] ? m : best;
    return best;
  }

  [[nodiscard]] std::size_t lowest() const {
    std::size_t best = 0;
    for (std::size_t m = 1; m < indices.size(); ++m) best = indices[m] < indices[best] ? m : best;
    return best;
  }

  /// Copy restricted to the listed coatings, in the given order.
  [[nodiscard]] MaterialLibrary subset(const std::vector<std::string>& keep) const {
    MaterialLibrary out{wavelength, substrate_name, substrate, {}, {}};
    for (const auto& name : keep) {
      out.names.push_back(name);
      out.indices.push_back(indices[find(name)]);
    }
    return out;
  }
};

struct TildeMatrix {
  double w11 = 1.0;
  double w12 = 0.0;
  double w21 = 0.0;
  double w22 = 1.0;

  static TildeMatrix identity() { return {}; }

  /// Layer with cosine C, sine S and index a.
  static TildeMatrix layer(double c, double s, double a) { return {c, s / a, a * s, c}; }

  [[nodiscard]] double det() const { return w11 * w22 + w12 * w21; }

  [[nodiscard]] TildeMatrix operator-() const { return {-w11, -w12, -w21, -w22}; }

  friend TildeMatrix operator*(const TildeMatrix& a, const TildeMatrix& b) {
    return {a.w11 * b.w11 - a.w12 * b.w21, a.w11 * b.w12 + a.w12 * b.w22, a.w21 * b.w11 + a.w22 * b.w21,
            a.w22 * b.w22 - a.w21 * b.w12};
  }

  /// The complex matrix this encodes.
  [[nodiscard]] Eigen::Matrix2cd complex() const {
    using C = std::complex<double>;
    Eigen::Matrix2cd m;
    m << C(w11, 0.0), C(0.0, w12), C(0.0, w21), C(w22, 0.0);
    return m;
  }

  static TildeMatrix from_complex(const Eigen::Matrix2cd& m) { return {m(0, 0).real(), m(0, 1).imag(), m(1, 0).imag(), m(1, 1).real()}; }

  /// Real 2x2 image under M -> [[M11, M12], [-M21, M22]]; multiplicative, so
  /// tilde chains can go through the generic real chain machinery.
  [[nodiscard]] Eigen::Matrix2d embedded() const {
    Eigen::Matrix2d m;
    m << w11, w12, -w21, w22;
    return m;
  }

  static TildeMatrix from_embedded(const Eigen::Matrix2d& m) { return {m(0, 0), m(0, 1), -m(1, 0), m(1, 1)}; }

  [[nodiscard]] double max_abs_diff(const TildeMatrix& o) const {
    return std::max({std::abs(w11 - o.w11), std::abs(w12 - o.w12), std::abs(w21 - o.w21), std::abs(w22 - o.w22)});
  }
};

/// Phase thickness 2 pi a t / lambda.
inline double phase(double index, double thickness, double wavelength) {
  return 2.0 * std::numbers::pi * index * thickness / wavelength;
}

/// Transfer matrix of coating m with physical thickness t (nm).
inline TildeMatrix transfer_matrix(std::size_t m, double t, const MaterialLibrary& lib) {
  if (t < 0.0) throw PreconditionError("transfer_matrix: negative thickness");
  const double a = lib.index(m);
  const double s = phase(a, t, lib.wavelength);
  return TildeMatrix::layer(std::cos(s), std::sin(s), a);
}

/// Denominator D with R = 1 - 4 Re(a_s) / D on determinant-one inputs.
inline double denominator_D(const TildeMatrix& w, std::complex<double> as) {
  const double ar = as.real();
  const double ai = as.imag();
  const double a = w.w11 - ai * w.w12;
  const double b = ar * w.w12;
  const double c = w.w21 + ai * w.w22;
  const double d = ar * w.w22;
  return a * a + b * b + c * c + d * d + 2.0 * ar;
}

/// Reflectance of substrate a_s under a coating with cumulative matrix w.
inline double reflectance_of(const TildeMatrix& w, std::complex<double> as) {
  const double ar = as.real();
  const double ai = as.imag();
  const double x = w.w11 - ai * w.w12;
  const double y = w.w21 + ai * w.w22;
  const double num = (x - ar * w.w22) * (x - ar * w.w22) + (y - ar * w.w12) * (y - ar * w.w12);
  const double den = (x + ar * w.w22) * (x + ar * w.w22) + (y + ar * w.w12) * (y + ar * w.w12);
  if (den == 0.0) throw PreconditionError("reflectance_of: zero denominator (nonphysical input)");
  return num / den;
}

/// Reflectance from D on determinant-one inputs.
inline double reflectance_from_D(double d, std::complex<double> as) { return 1.0 - 4.0 * as.real() / d; }

/// D giving reflectance r (inverse of reflectance_from_D).
inline double D_from_reflectance(double r, std::complex<double> as) { return 4.0 * as.real() / (1.0 - r); }

/// Cumulative matrix of N alternating quarter-wave layers, high index first,
/// in closed form. With rho = aH / aL and N = 2m:
///   diag((-1/rho)^m, (-rho)^m)
/// and N = 2m + 1 appends one high layer:
///   [[0, (-1)^m aL^m / aH^(m+1)], [(-1)^m aH^(m+1) / aL^m, 0]].
inline TildeMatrix quarter_wave_closed_form(double aH, double aL, std::size_t n) {
  const auto m = static_cast<double>(n / 2);
  const double sign = (n / 2) % 2 == 0 ? 1.0 : -1.0;
  if (n % 2 == 0) return {sign * std::pow(aL / aH, m), 0.0, 0.0, sign * std::pow(aH / aL, m)};
  return {0.0, sign * std::pow(aL, m) / std::pow(aH, m + 1.0), sign * std::pow(aH, m + 1.0) / std::pow(aL, m), 0.0};
}

/// Range of alpha cos(s) + b sin(s) over alpha, b in boxes and s in an
/// interval of length at most 2 pi. Exact: the extreme over (alpha, b) sits
/// at a box corner, and each corner is a sinusoid in s.
inline Interval rotation_range(Interval alpha, Interval b, Interval s) {
  const auto corner_max = [&](double al, double bl) {
    const double at_lo = al * std::cos(s.lo) + bl * std::sin(s.lo);
    const double at_hi = al * std::cos(s.hi) + bl * std::sin(s.hi);
    double best = std::max(at_lo, at_hi);
    const double rho = std::hypot(al, bl);
    if (rho == 0.0) return 0.0;
    double phi = std::atan2(bl, al);
    for (int wrap = -1; wrap <= 1; ++wrap) {
      const double p = phi + 2.0 * std::numbers::pi * wrap;
      if (p >= s.lo && p <= s.hi) best = rho;
    }
    return best;
  };
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (double al : {alpha.lo, alpha.hi}) {
    for (double bl : {b.lo, b.hi}) {
      hi = std::max(hi, corner_max(al, bl));
      lo = std::min(lo, -corner_max(-al, -bl));
    }
  }
  return {lo, hi};
}

/// Bounds on alpha C + gamma beta S over alpha, beta in intervals, gamma in a
/// finite nonnegative set and (C, S) on the upper half circle.
inline Interval tighten_bounds(Interval alpha, Interval beta, const std::vector<double>& gammas) {
  if (gammas.empty()) throw PreconditionError("tighten_bounds: empty gamma set");
  double g2 = 0.0;
  for (double g : gammas) {
    if (g < 0.0) throw PreconditionError("tighten_bounds: gamma values must be nonnegative");
    g2 = std::max(g2, g * g);
  }
  const double a2 = alpha.square_max();
  const double up = std::max(0.0, beta.hi);
  const double down = std::max(0.0, -beta.lo);
  return {-std::sqrt(a2 + g2 * down * down), std::sqrt(a2 + g2 * up * up)};
}

/// Interval enclosure of a tilde matrix.
struct TildeBox {
  Interval w11{1.0}, w12{0.0}, w21{0.0}, w22{1.0};

  [[nodiscard]] bool contains(const TildeMatrix& w, double tol = 0.0) const {
    return w11.contains(w.w11, tol) && w12.contains(w.w12, tol) && w21.contains(w.w21, tol) && w22.contains(w.w22, tol);
  }

  [[nodiscard]] double magnitude() const { return std::max({w11.mag(), w12.mag(), w21.mag(), w22.mag()}); }

  void merge(const TildeBox& o) {
    w11 = hull(w11, o.w11);
    w12 = hull(w12, o.w12);
    w21 = hull(w21, o.w21);
    w22 = hull(w22, o.w22);
  }
};

/// Box for u * T(a, s) with s in `phase` and a in `indices`; per entry the
/// hull over indices of rotation_range.
inline TildeBox propagate_layer(const TildeBox& u, const std::vector<double>& indices, Interval phase_range) {
  TildeBox out;
  bool first = true;
  for (double a : indices) {
    TildeBox b;
    b.w11 = rotation_range(u.w11, -a * u.w12, phase_range);
    b.w12 = rotation_range(u.w12, (1.0 / a) * u.w11, phase_range);
    b.w21 = rotation_range(u.w21, a * u.w22, phase_range);
    b.w22 = rotation_range(u.w22, -(1.0 / a) * u.w21, phase_range);
    if (first) {
      out = b;
      first = false;
    } else {
      out.merge(b);
    }
  }
  return out;
}

/// Boxes for u_0 = I, ..., u_N over all designs, one tighten_bounds call per
/// entry and layer.
inline std::vector<TildeBox> tighten_chain(const std::vector<double>& indices, std::size_t layers) {
  std::vector<double> inverse;
  for (double a : indices) inverse.push_back(1.0 / a);
  std::vector<TildeBox> boxes(1);
  for (std::size_t n = 0; n < layers; ++n) {
    const TildeBox& u = boxes.back();
    TildeBox b;
    b.w11 = tighten_bounds(u.w11, -u.w12, indices);
    b.w12 = tighten_bounds(u.w12, u.w11, inverse);
    b.w21 = tighten_bounds(u.w21, u.w22, indices);
    b.w22 = tighten_bounds(u.w22, -u.w21, inverse);
    boxes.push_back(b);
  }
  return boxes;
}

/// Upper bound on D over a box: each square bounded at its endpoints.
inline double denominator_upper(const TildeBox& w, std::complex<double> as) {
  const double ar = as.real();
  const double ai = as.imag();
  return (w.w11 - ai * w.w12).square_max() + (ar * w.w12).square_max() + (w.w21 + ai * w.w22).square_max() +
         (ar * w.w22).square_max() + 2.0 * ar;
}

}  // namespace matchain
