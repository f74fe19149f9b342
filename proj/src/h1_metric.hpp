#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace multiwell::detail {

// Discrete H^1 metric on a clamped polyline with `segments` segments in R^n:
// P = stiffness * tridiag(-1, 2, -1) + mass * I acting on each component of
// the interior nodes. apply() writes d = P^{-1} g (Thomas algorithm) and
// leaves the two endpoint blocks at zero.
class H1Metric {
 public:
  H1Metric(std::size_t segments, std::size_t n, double stiffness, double mass)
      : interior_(segments - 1),
        n_(n),
        diag_(2.0 * stiffness + mass),
        off_(-stiffness),
        cprime_(interior_),
        dprime_(interior_) {}

  void apply(std::span<const double> g, std::span<double> d) {
    std::fill(d.begin(), d.end(), 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t k = 0; k < interior_; ++k) {
        const double rhs = g[(k + 1) * n_ + i];
        const double denom = diag_ - (k > 0 ? off_ * cprime_[k - 1] : 0.0);
        cprime_[k] = off_ / denom;
        dprime_[k] = (rhs - (k > 0 ? off_ * dprime_[k - 1] : 0.0)) / denom;
      }
      for (std::size_t k = interior_; k-- > 0;) {
        const double next = k + 1 < interior_ ? d[(k + 2) * n_ + i] : 0.0;
        d[(k + 1) * n_ + i] = dprime_[k] - cprime_[k] * next;
      }
    }
  }

 private:
  std::size_t interior_;
  std::size_t n_;
  double diag_;
  double off_;
  std::vector<double> cprime_;
  std::vector<double> dprime_;
};

}  // namespace multiwell::detail
