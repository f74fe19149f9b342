#include "multiwell/descent.hpp"

#include <algorithm>
#include <cmath>

#include "multiwell/common.hpp"

namespace multiwell {

std::string to_string(DescentMethod m) {
  switch (m) {
    case DescentMethod::barzilai_borwein:
      return "barzilai_borwein";
    case DescentMethod::backtracking:
      return "backtracking";
  }
  return "unknown";
}

DescentMethod descent_method_from_string(const std::string& s) {
  if (s == "barzilai_borwein" || s == "bb") return DescentMethod::barzilai_borwein;
  if (s == "backtracking") return DescentMethod::backtracking;
  throw InvalidArgument("unknown descent method '" + s + "'");
}

DescentResult minimize(std::vector<double>& x, const Objective& f,
                       const DescentOptions& opts,
                       const GradientProjector& project,
                       const Preconditioner& precondition) {
  const std::size_t n = x.size();
  std::vector<double> g(n), d(n), x_trial(n), g_trial(n), pd(n);
  DescentResult res;

  auto direction = [&](std::span<const double> grad, std::span<double> out) {
    if (precondition) {
      precondition(grad, out);
      if (project) project(out);
    } else {
      std::copy(grad.begin(), grad.end(), out.begin());
    }
  };

  double fx = f(x, g);
  if (project) project(g);
  if (!std::isfinite(fx)) throw NumericalError("descent: non-finite initial objective");
  if (opts.record_history) res.history.push_back(fx);

  double step = opts.initial_step;
  double window_start = fx;
  for (std::size_t it = 0; it < opts.max_iter; ++it) {
    res.grad_max = max_abs(g);
    if (res.grad_max < opts.tol) {
      res.converged = true;
      break;
    }
    direction(g, d);
    const double slope = dot(g, d);
    if (!(slope > 0.0)) break;

    bool accepted = false;
    double f_trial = fx;
    for (int bt = 0; bt < 80; ++bt) {
      for (std::size_t i = 0; i < n; ++i) x_trial[i] = x[i] - step * d[i];
      f_trial = f(x_trial, g_trial);
      if (std::isfinite(f_trial) && f_trial <= fx - opts.armijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No decrease is representable at this point; treat as stalled.
      break;
    }
    if (project) project(g_trial);
    ++res.iterations;

    double next = step;
    if (opts.method == DescentMethod::barzilai_borwein) {
      // s = -step d, y = g_trial - g; short BB step  s.y / y.(P^-1 y).
      double sy = 0.0;
      for (std::size_t i = 0; i < n; ++i) sy += -step * d[i] * (g_trial[i] - g[i]);
      for (std::size_t i = 0; i < n; ++i) g[i] = g_trial[i] - g[i];
      direction(g, pd);
      const double ypy = dot(g, pd);
      if (sy > 0.0 && ypy > 0.0) next = sy / ypy;
      else next = step * 2.0;
    } else {
      next = step * 2.0;
    }
    step = std::clamp(next, 1e-300, opts.max_step);

    x.swap(x_trial);
    g.swap(g_trial);
    fx = f_trial;
    if (opts.record_history) res.history.push_back(fx);
    if (opts.stall_rel > 0.0 && opts.stall_window > 0 && res.iterations % opts.stall_window == 0) {
      if (window_start - fx <= opts.stall_rel * (1.0 + std::abs(fx))) {
        res.stalled = true;
        break;
      }
      window_start = fx;
    }
  }
  res.value = fx;
  res.grad_max = max_abs(g);
  if (res.grad_max < opts.tol) res.converged = true;
  return res;
}

}  // namespace multiwell
