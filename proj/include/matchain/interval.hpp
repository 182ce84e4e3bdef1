#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <ostream>

namespace matchain {

/// Closed real interval [lo, hi]. Arithmetic is outward-exact for the
/// operations below (no directed rounding; callers add slack where needed).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  constexpr Interval() = default;
  constexpr Interval(double point) : lo(point), hi(point) {}  // NOLINT(google-explicit-constructor)
  constexpr Interval(double l, double h) : lo(l), hi(h) {}

  [[nodiscard]] constexpr double width() const { return hi - lo; }
  [[nodiscard]] constexpr double mid() const { return 0.5 * (lo + hi); }
  [[nodiscard]] double mag() const { return std::max(std::abs(lo), std::abs(hi)); }
  [[nodiscard]] constexpr bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= hi + tol; }
  [[nodiscard]] constexpr bool valid() const { return lo <= hi; }

  /// Upper bound of x^2 over the interval.
  [[nodiscard]] double square_max() const { return std::max(lo * lo, hi * hi); }

  friend constexpr bool operator==(const Interval&, const Interval&) = default;
};

inline Interval operator+(Interval a, Interval b) { return {a.lo + b.lo, a.hi + b.hi}; }
inline Interval operator-(Interval a, Interval b) { return {a.lo - b.hi, a.hi - b.lo}; }
inline Interval operator-(Interval a) { return {-a.hi, -a.lo}; }

inline Interval operator*(Interval a, Interval b) {
  const double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
  return {std::min({p1, p2, p3, p4}), std::max({p1, p2, p3, p4})};
}

inline Interval operator*(double s, Interval a) {
  return s >= 0 ? Interval{s * a.lo, s * a.hi} : Interval{s * a.hi, s * a.lo};
}

inline Interval hull(Interval a, Interval b) { return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)}; }

/// Intersection; may produce an invalid (empty) interval.
inline Interval intersect(Interval a, Interval b) { return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)}; }

inline std::ostream& operator<<(std::ostream& os, const Interval& x) { return os << '[' << x.lo << ", " << x.hi << ']'; }

}  // namespace matchain
