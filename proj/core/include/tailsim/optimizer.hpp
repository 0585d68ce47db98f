#pragma once

#include <chrono>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace tailsim {

// Smooth objective with an analytic gradient and a positive semi-definite
// model Hessian (exact where cheap, Gauss-Newton elsewhere).
class Objective {
 public:
  virtual ~Objective() = default;
  virtual int dimension() const = 0;
  // Returns f(x); fills `gradient` when it is non-empty.
  virtual double evaluate(std::span<const double> x, std::span<double> gradient) const = 0;
  virtual void model_hessian(std::span<const double> x, Eigen::MatrixXd& hessian) const = 0;
};

struct MinimizeOptions {
  double gradient_tolerance = 1e-8;
  int max_iterations = 500;
  double armijo = 1e-4;
  double initial_step = 1.0;
  // Relative round-off allowance on f for steps accepted on gradient progress.
  double value_noise = 1e-12;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  bool record_trace = false;
};

struct MinimizeResult {
  std::vector<double> x;
  double value = 0.0;
  double gradient_norm = 0.0;  // projected onto the feasible box
  int iterations = 0;
  bool converged = false;
  bool deadline_hit = false;
  std::vector<double> value_trace;  // f after every accepted step, if recorded
};

// Projected damped Newton-type descent on a box. Each iteration solves the
// model Hessian restricted to the free variables with Levenberg damping, then
// backtracks (halving from `initial_step`) until the Armijo condition holds on
// the projected step. Accepted values never rise by more than the round-off
// allowance.
MinimizeResult minimize_box(const Objective& objective, std::vector<double> x0,
                            std::span<const double> lower, std::span<const double> upper,
                            const MinimizeOptions& options = {});

}  // namespace tailsim
