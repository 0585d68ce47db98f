#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tailsim/contact.hpp"
#include "tailsim/statics.hpp"

namespace tailsim {

struct GraspOptions {
  double ramp_increment = 2e-3;  // m of wire per continuation step
  // When set, the ramp stops where the largest commanded-wire tension reaches
  // this value (N) and the wires are clamped there.
  std::optional<double> tension_limit;
  // A continuation step whose largest joint change exceeds this (rad) is
  // split in half, down to max_subdivisions levels.
  double max_joint_step = 0.02;
  int max_subdivisions = 8;
  StaticsOptions statics;
};

struct GraspResult {
  EquilibriumResult equilibrium;
  ContactSet contacts;
  std::vector<WireInput> clamped_inputs;  // the commanded wires, now clamped
  double ramp_fraction = 1.0;             // share of the commanded δ actually applied
};

// Ramps every displacement-mode input from zero to its commanded value and
// returns the final wrapped equilibrium. Throws NoContact if the object is
// never touched, InvalidArgument for a non-positive tension limit.
GraspResult solve_grasp(const TailModel& model, std::span<const WireInput> wire_inputs,
                        const GraspScene& scene, std::span<const double> q0,
                        const GraspOptions& options = {});

enum class PullDirectionMode {
  OutOfWrap,  // from the centroid of the object contacts through the centre
  FromBase,   // from the tail base through the object centre
  Fixed,
};

std::string_view to_string(PullDirectionMode mode);
std::optional<PullDirectionMode> pull_mode_from_string(std::string_view text);

struct PullDirection {
  PullDirectionMode mode = PullDirectionMode::OutOfWrap;
  double angle = 0.0;  // rad, used when mode == Fixed
};

Vec2 resolve_pull_direction(const TailModel& model, std::span<const double> q,
                            const GraspScene& scene, const PullDirection& direction);

struct PullStep;

struct PullOptions {
  double step = 5e-4;  // m of object travel per quasi-static step
  int max_steps = 400;
  StaticsOptions statics;
  std::function<void(const PullStep&)> on_step;  // called after each solved step
};

// Per-step resistance split so that friction can be rescored without
// re-solving (the tail equilibrium does not depend on μ).
struct PullStep {
  double displacement = 0.0;         // m
  double normal_resistance = 0.0;    // Σ N (n̂·d̂), N
  double pad_slip_capacity = 0.0;    // Σ N |n̂ × d̂| over pad contacts, N
  double plain_slip_capacity = 0.0;  // same over uncovered links, N
  int contact_count = 0;
  bool converged = true;
};

struct PullKinematics {
  std::vector<PullStep> steps;
  Vec2 direction = Vec2::UnitX();
};

struct PullSample {
  double displacement = 0.0;  // m
  double force = 0.0;         // N, resistance along -d̂ seen by the gauge
  int contact_count = 0;
};

struct PullOutTrace {
  std::vector<PullSample> samples;
  double peak_force = 0.0;
  Vec2 pull_direction = Vec2::UnitX();
  int unconverged_steps = 0;
};

// Translates the object in `step` increments along the resolved direction,
// re-solving the clamped tail each time, until the object is free or
// max_steps is reached. Throws EmptyGrasp without initial object contact.
PullKinematics track_pull(const TailModel& model, std::span<const WireInput> clamped_inputs,
                          const GraspScene& scene, std::span<const double> q_grasped,
                          const PullDirection& direction, const PullOptions& options = {});

// Gauge force of one step at the slipping limit, clipped at zero.
double gauge_force(const PullStep& step, const Friction& friction);

// Gauge force per step at the slipping limit. The trace stops once contact
// is lost or the force falls under 1% of the running peak.
PullOutTrace score_pull(const PullKinematics& kinematics, const Friction& friction);

PullOutTrace pull_out_force(const TailModel& model, std::span<const WireInput> clamped_inputs,
                            const GraspScene& scene, std::span<const double> q_grasped,
                            const PullDirection& direction, const PullOptions& options = {});

}  // namespace tailsim
