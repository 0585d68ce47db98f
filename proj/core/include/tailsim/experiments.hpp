#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tailsim/fit.hpp"
#include "tailsim/grasp.hpp"
#include "tailsim/scene_io.hpp"

namespace tailsim {

// Cup diameters of the pull-out study, cm.
inline constexpr std::array<double, 6> kCupDiametersCm{4.9, 5.4, 5.8, 6.2, 6.6, 7.0};

// Empirical pull-out line, F in N for d in cm.
inline constexpr double kPulloutSlope = 0.461;
inline constexpr double kPulloutIntercept = -2.057;
constexpr double pullout_line_force(double d_cm) { return kPulloutSlope * d_cm + kPulloutIntercept; }

// 0 stands for the circle in side-count lists.
inline constexpr std::array<int, 4> kShapeSides{3, 4, 5, 0};
inline constexpr double kShapeCircumdiameterCm = 9.0;

struct SweepRow {
  std::string shape;        // "circle", "triangle", ...
  double diameter_cm = 0.0;
  int sides = 0;            // 0 for circles
  double force = 0.0;       // N, peak pull-out force
  bool failed = false;
  std::string error;
  int contacts = 0;         // object contacts at the end of the grasp
  int unconverged_steps = 0;
  // Polygon rows averaged over several rotations: one entry per rotation, a
  // grasp that never held the object counts as 0 N.
  std::vector<double> orientation_forces;
};

struct SweepMetadata {
  std::string model_hash;
  Friction friction;
  double kappa = 0.0;
  std::string pull_direction;
  std::vector<WireInput> grasp_wires;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  SweepMetadata metadata;
};

struct SweepOptions {
  int jobs = 1;
  GraspOptions grasp;
};

// Template scenes carry pose, friction, grasp wires and pull protocol; the
// sweep swaps in the object under test at the template pose.
SceneFile default_sweep_scene();
SceneFile default_shape_scene();

SweepResult sweep_diameter(const TailModel& model, std::span<const double> diameters_cm,
                           const SceneFile& scene_template, const SweepOptions& options = {});

SweepResult sweep_shape(const TailModel& model, std::span<const int> side_counts,
                        double circumdiameter_cm, const SceneFile& scene_template,
                        const SweepOptions& options = {});

// Fit over the rows that did not fail, x = diameter_cm.
LinearFit fit_rows(const SweepResult& result);

std::string shape_label(int sides);

struct CalibrationTarget {
  double diameter_cm = 0.0;
  double force = 0.0;  // N
};

std::vector<CalibrationTarget> pullout_line_targets();

// {"targets": [{"d_cm", "F_N"}]}; throws ParseError on non-positive forces.
std::vector<CalibrationTarget> parse_targets(std::string_view json_text);

struct CalibrationOptions {
  double kappa_min = 0.2;
  double kappa_max = 5.0;
  double mu_min = 0.2;
  double mu_max = 1.5;
  int kappa_points = 5;   // coarse grid, log spaced
  int mu_points = 27;     // μ scan per κ; cheap, the trajectories are reused
  int max_iterations = 4; // 1 = coarse grid only
  double flag_threshold = 0.15;
  SweepOptions sweep;
};

struct CalibrationResult {
  double kappa = 0.0;
  double mu_pad = 0.0;
  double residual = 0.0;  // Σ (F_sim - F_target)², N²
  double max_relative_error = 0.0;
  bool flagged = false;   // max relative error above the threshold
  std::vector<double> residual_history;  // best residual after each iteration
  std::vector<CalibrationTarget> targets;
  std::vector<double> simulated;  // N, per target at the best pair
  int evaluations = 0;            // κ values solved
};

CalibrationResult calibrate(const TailModel& model, std::span<const CalibrationTarget> targets,
                            const SceneFile& scene_template, const CalibrationOptions& options = {});

// File writers. `timestamp` empty omits the field.
std::string diameter_sweep_csv(const SweepResult& result);
std::string shape_sweep_csv(const SweepResult& result);
std::string sweep_json(const SweepResult& result, const std::string& timestamp = {});
std::string fit_json(const LinearFit& fit, const SweepResult& result, const std::string& timestamp = {});
std::string calibration_json(const CalibrationResult& result, const std::string& timestamp = {});

}  // namespace tailsim
