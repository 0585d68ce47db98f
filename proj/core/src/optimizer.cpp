#include "tailsim/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "tailsim/errors.hpp"

namespace tailsim {

namespace {

void project(std::vector<double>& x, std::span<const double> lower, std::span<const double> upper) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
}

// Variables pinned at a bound with the gradient pushing outward are fixed.
std::vector<int> free_set(const std::vector<double>& x, const std::vector<double>& g,
                          std::span<const double> lower, std::span<const double> upper) {
  std::vector<int> free;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool at_lower = x[i] <= lower[i] && g[i] > 0.0;
    const bool at_upper = x[i] >= upper[i] && g[i] < 0.0;
    if (!at_lower && !at_upper) free.push_back(static_cast<int>(i));
  }
  return free;
}

double norm_over(const std::vector<double>& g, const std::vector<int>& idx) {
  double s = 0.0;
  for (int i : idx) s += g[i] * g[i];
  return std::sqrt(s);
}

}  // namespace

MinimizeResult minimize_box(const Objective& objective, std::vector<double> x0,
                            std::span<const double> lower, std::span<const double> upper,
                            const MinimizeOptions& options) {
  const int n = objective.dimension();
  if (static_cast<int>(x0.size()) != n || static_cast<int>(lower.size()) != n ||
      static_cast<int>(upper.size()) != n) {
    throw DimensionError("minimize_box: dimension mismatch");
  }

  MinimizeResult result;
  std::vector<double> x = std::move(x0);
  project(x, lower, upper);
  std::vector<double> g(n), g_trial(n), x_trial(n);
  double f = objective.evaluate(x, g);

  Eigen::MatrixXd hessian(n, n);
  double damping = 0.0;
  auto free = free_set(x, g, lower, upper);
  double pg_norm = norm_over(g, free);

  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if (pg_norm <= options.gradient_tolerance) {
      result.converged = true;
      break;
    }
    if (options.deadline && std::chrono::steady_clock::now() >= *options.deadline) {
      result.deadline_hit = true;
      break;
    }

    objective.model_hessian(x, hessian);
    const int m = static_cast<int>(free.size());
    Eigen::MatrixXd reduced(m, m);
    Eigen::VectorXd rhs(m);
    double diag_scale = 0.0;
    for (int a = 0; a < m; ++a) {
      rhs[a] = -g[free[a]];
      for (int b = 0; b < m; ++b) reduced(a, b) = hessian(free[a], free[b]);
      diag_scale = std::max(diag_scale, std::abs(reduced(a, a)));
    }
    if (diag_scale == 0.0) diag_scale = 1.0;

    Eigen::VectorXd step_free;
    for (int attempt = 0; attempt < 30; ++attempt) {
      Eigen::MatrixXd damped = reduced;
      damped.diagonal().array() += (damping + 1e-14) * diag_scale;
      Eigen::LLT<Eigen::MatrixXd> llt(damped);
      if (llt.info() == Eigen::Success) {
        step_free = llt.solve(rhs);
        if (step_free.allFinite() && step_free.dot(rhs) > 0.0) break;
      }
      damping = damping == 0.0 ? 1e-8 : damping * 10.0;
      step_free.resize(0);
    }
    if (step_free.size() == 0) step_free = rhs / diag_scale;

    std::vector<double> direction(n, 0.0);
    for (int a = 0; a < m; ++a) direction[free[a]] = step_free[a];

    double alpha = options.initial_step;
    bool accepted = false;
    double f_trial = f;
    bool secant_tried = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (int i = 0; i < n; ++i) x_trial[i] = x[i] + alpha * direction[i];
      project(x_trial, lower, upper);
      double slope = 0.0;
      bool moved = false;
      for (int i = 0; i < n; ++i) {
        const double d = x_trial[i] - x[i];
        slope += g[i] * d;
        moved = moved || d != 0.0;
      }
      if (!moved) break;
      f_trial = objective.evaluate(x_trial, g_trial);
      if (f_trial <= f + options.armijo * slope) {
        accepted = true;
        break;
      }
      // Near a minimum the Armijo margin drops below the round-off in f; a step
      // that keeps f within that noise and shrinks the projected gradient is
      // still progress.
      if (f_trial <= f + options.value_noise * std::max(1.0, std::abs(f))) {
        const auto trial_free = free_set(x_trial, g_trial, lower, upper);
        if (norm_over(g_trial, trial_free) < pg_norm) {
          accepted = true;
          break;
        }
        // f carries no information here; place the step where the directional
        // derivative vanishes (secant on g·d), once per iteration.
        double end_slope = 0.0;
        for (int i = 0; i < n; ++i) end_slope += g_trial[i] * (x_trial[i] - x[i]);
        if (!secant_tried && slope < 0.0 && end_slope > 0.0) {
          secant_tried = true;
          alpha *= slope / (slope - end_slope);
          continue;
        }
      }
      alpha *= 0.5;
    }

    if (!accepted) {
      damping = damping == 0.0 ? 1e-6 : damping * 100.0;
      if (damping > 1e12) break;
      continue;
    }

    if (alpha == options.initial_step) {
      damping = damping < 1e-10 ? 0.0 : damping / 10.0;
    } else if (alpha < 0.25 * options.initial_step) {
      damping = damping == 0.0 ? 1e-8 : damping * 4.0;
    }
    x.swap(x_trial);
    g.swap(g_trial);
    f = f_trial;
    free = free_set(x, g, lower, upper);
    pg_norm = norm_over(g, free);
    if (options.record_trace) result.value_trace.push_back(f);
  }
  if (!result.converged && pg_norm <= options.gradient_tolerance) result.converged = true;

  result.x = std::move(x);
  result.value = f;
  result.gradient_norm = pg_norm;
  result.iterations = it;
  return result;
}

}  // namespace tailsim
