#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace multiwell {

enum class DescentMethod {
  /// Barzilai-Borwein (short) step, backtracked until the objective drops.
  barzilai_borwein,
  /// Armijo backtracking from a growing trial step.
  backtracking,
};

std::string to_string(DescentMethod m);
DescentMethod descent_method_from_string(const std::string& s);

struct DescentOptions {
  DescentMethod method = DescentMethod::barzilai_borwein;
  /// Converged once max |admissible gradient| < tol.
  double tol = 1e-8;
  std::size_t max_iter = 200000;
  double initial_step = 1e-3;
  double armijo = 1e-4;
  double max_step = 1e6;
  /// Stop as stalled when the objective drops by less than
  /// stall_rel * (1 + |f|) over stall_window iterations (0 disables). This
  /// catches the roundoff floor where tol is no longer reachable.
  double stall_rel = 0.0;
  std::size_t stall_window = 50;
  bool record_history = false;
};

struct DescentResult {
  double value = 0.0;
  double grad_max = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool stalled = false;
  /// Objective after every accepted step (when record_history is set).
  std::vector<double> history;
};

/// f(x, grad) returns the objective and writes its gradient.
using Objective = std::function<double(std::span<const double>, std::span<double>)>;
/// Maps a gradient onto the admissible directions (clamped entries, affine
/// constraints). Must be a linear projection.
using GradientProjector = std::function<void(std::span<double>)>;
/// Writes d = P^{-1} g for an SPD preconditioner P.
using Preconditioner = std::function<void(std::span<const double>, std::span<double>)>;

/// Monotone first-order descent. Every accepted iterate lowers the objective,
/// so `history` is nonincreasing.
DescentResult minimize(std::vector<double>& x, const Objective& f,
                       const DescentOptions& opts,
                       const GradientProjector& project = {},
                       const Preconditioner& precondition = {});

}  // namespace multiwell
