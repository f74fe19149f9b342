#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace multiwell {

/// A point of the target space R^N.
using Point = std::vector<double>;

/// Sentinel returned by energies for infeasible arguments (mask violation,
/// broken affine constraint).
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Rejected input: dimension mismatch, violated precondition, bad config.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A solver could not produce a usable result (NaN energy, step underflow,
/// no feasible iterate).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Axis-aligned box [lo, hi] in R^N.
struct Box {
  Point lo;
  Point hi;

  std::size_t dimension() const { return lo.size(); }

  bool contains(std::span<const double> z, double slack = 0.0) const {
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (z[i] < lo[i] - slack || z[i] > hi[i] + slack) return false;
    }
    return true;
  }

  static Box cube(std::size_t n, double lo, double hi) {
    return Box{Point(n, lo), Point(n, hi)};
  }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace multiwell
