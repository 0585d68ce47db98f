#include "tailsim/grasp.hpp"

#include <algorithm>
#include <cmath>

#include "tailsim/errors.hpp"

namespace tailsim {

namespace {

double commanded_tension(const EquilibriumResult& eq, std::span<const WireInput> inputs) {
  double t = 0.0;
  for (const auto& input : inputs) {
    if (input.mode != WireMode::Displacement) continue;
    for (std::size_t a = 0; a < eq.wire_ids.size(); ++a) {
      if (eq.wire_ids[a] == input.wire_id) t = std::max(t, eq.wire_tensions[a]);
    }
  }
  return t;
}

std::vector<WireInput> scaled(std::span<const WireInput> inputs, double fraction) {
  std::vector<WireInput> out(inputs.begin(), inputs.end());
  for (auto& input : out) {
    if (input.mode == WireMode::Displacement) input.displacement *= fraction;
  }
  return out;
}

double max_change(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Advances the solution from fraction `from` (configuration q) to `to`,
// halving the increment while the joints move too far in one solve.
EquilibriumResult advance(const TailModel& model, std::span<const WireInput> inputs,
                          const GraspScene& scene, const std::vector<double>& q, double from,
                          double to, const GraspOptions& options, int depth) {
  auto eq = solve_equilibrium(model, scaled(inputs, to), &scene, q, options.statics);
  if (depth >= options.max_subdivisions || max_change(eq.q_star, q) <= options.max_joint_step) {
    return eq;
  }
  const double mid = 0.5 * (from + to);
  const auto half = advance(model, inputs, scene, q, from, mid, options, depth + 1);
  return advance(model, inputs, scene, half.q_star, mid, to, options, depth + 1);
}

}  // namespace

GraspResult solve_grasp(const TailModel& model, std::span<const WireInput> wire_inputs,
                        const GraspScene& scene, std::span<const double> q0,
                        const GraspOptions& options) {
  if (!scene.object) throw InvalidArgument("solve_grasp: scene has no object");
  if (options.tension_limit && !(*options.tension_limit > 0.0)) {
    throw InvalidArgument("solve_grasp: tension limit must be positive");
  }
  double largest = 0.0;
  for (const auto& input : wire_inputs) {
    if (input.mode == WireMode::Displacement) largest = std::max(largest, std::abs(input.displacement));
  }
  const int ramp_steps =
      std::max(1, static_cast<int>(std::ceil(largest / options.ramp_increment - 1e-9)));

  std::vector<double> q(q0.begin(), q0.end());
  EquilibriumResult eq;
  double fraction = 1.0;
  for (int step = 1; step <= ramp_steps; ++step) {
    const double f = static_cast<double>(step) / ramp_steps;
    auto next = advance(model, wire_inputs, scene, q, static_cast<double>(step - 1) / ramp_steps, f,
                        options, 0);
    if (options.tension_limit && commanded_tension(next, wire_inputs) > *options.tension_limit) {
      // Bisect back to the limit from the last accepted fraction.
      double lo = static_cast<double>(step - 1) / ramp_steps;
      double hi = f;
      std::vector<double> q_lo = q;
      EquilibriumResult at_lo = step > 1 ? eq
                                         : solve_equilibrium(model, scaled(wire_inputs, 0.0), &scene,
                                                             q, options.statics);
      for (int b = 0; b < 30 && hi - lo > 1e-6; ++b) {
        const double mid = 0.5 * (lo + hi);
        auto trial = advance(model, wire_inputs, scene, q_lo, lo, mid, options, 0);
        if (commanded_tension(trial, wire_inputs) > *options.tension_limit) {
          hi = mid;
        } else {
          lo = mid;
          q_lo = trial.q_star;
          at_lo = std::move(trial);
        }
      }
      eq = std::move(at_lo);
      fraction = lo;
      break;
    }
    eq = std::move(next);
    q = eq.q_star;
  }

  GraspResult result;
  result.contacts = contact_forces(model, eq.q_star, scene);
  result.equilibrium = std::move(eq);
  result.ramp_fraction = fraction;
  if (result.contacts.object_contact_count() == 0) {
    throw NoContact("grasp ramp finished without touching the object");
  }
  result.clamped_inputs = scaled(wire_inputs, fraction);
  for (auto& input : result.clamped_inputs) {
    if (input.mode == WireMode::Displacement) input.clamped = true;
  }
  return result;
}

std::string_view to_string(PullDirectionMode mode) {
  switch (mode) {
    case PullDirectionMode::OutOfWrap: return "out_of_wrap";
    case PullDirectionMode::FromBase: return "from_base";
    case PullDirectionMode::Fixed: return "fixed";
  }
  return "out_of_wrap";
}

std::optional<PullDirectionMode> pull_mode_from_string(std::string_view text) {
  if (text == "out_of_wrap") return PullDirectionMode::OutOfWrap;
  if (text == "from_base") return PullDirectionMode::FromBase;
  if (text == "fixed") return PullDirectionMode::Fixed;
  return std::nullopt;
}

Vec2 resolve_pull_direction(const TailModel& model, std::span<const double> q,
                            const GraspScene& scene, const PullDirection& direction) {
  if (!scene.object) throw InvalidArgument("pull direction needs an object");
  const Vec2 center = scene.object->pose.position;
  const Vec2 from_base = center.norm() > 0.0 ? Vec2(center.normalized()) : Vec2(Vec2::UnitX());
  switch (direction.mode) {
    case PullDirectionMode::Fixed:
      return unit_from_angle(direction.angle);
    case PullDirectionMode::FromBase:
      return from_base;
    case PullDirectionMode::OutOfWrap: {
      const auto contacts = contact_forces(model, q, scene);
      Vec2 sum = Vec2::Zero();
      int count = 0;
      for (const auto& c : contacts.contacts) {
        if (c.body != ContactBody::Object) continue;
        sum += c.normal;
        ++count;
      }
      // The contacts surround the centre; their mean normal points at the
      // closed side, so the way out is opposite.
      if (count == 0 || sum.norm() < 1e-9 * count) return from_base;
      return -sum.normalized();
    }
  }
  return from_base;
}

namespace {

PullStep measure(const TailModel& model, std::span<const double> q, const GraspScene& scene,
                 const Vec2& d) {
  PullStep step;
  const JointRange pad = pad_range(scene, model);
  for (const auto& c : contact_forces(model, q, scene).contacts) {
    if (c.body != ContactBody::Object) continue;
    ++step.contact_count;
    const double along = c.normal.dot(d);
    const double across = std::abs(cross(c.normal, d));
    step.normal_resistance += c.normal_force * along;
    if (pad.contains(c.link + 1)) {
      step.pad_slip_capacity += c.normal_force * across;
    } else {
      step.plain_slip_capacity += c.normal_force * across;
    }
  }
  return step;
}

}  // namespace

PullKinematics track_pull(const TailModel& model, std::span<const WireInput> clamped_inputs,
                          const GraspScene& scene, std::span<const double> q_grasped,
                          const PullDirection& direction, const PullOptions& options) {
  if (!scene.object) throw EmptyGrasp("pull test without an object");
  if (contact_forces(model, q_grasped, scene).object_contact_count() == 0) {
    throw EmptyGrasp("the tail does not touch the object");
  }
  if (!(options.step > 0.0) || options.max_steps < 1) {
    throw InvalidArgument("pull step and step count must be positive");
  }

  PullKinematics out;
  out.direction = resolve_pull_direction(model, q_grasped, scene, direction);
  GraspScene moving = scene;
  const Vec2 start = scene.object->pose.position;
  std::vector<double> q(q_grasped.begin(), q_grasped.end());
  for (int k = 1; k <= options.max_steps; ++k) {
    const double s = k * options.step;
    moving.object->pose.position = start + s * out.direction;
    const auto eq = solve_equilibrium(model, clamped_inputs, &moving, q, options.statics);
    q = eq.q_star;
    PullStep step = measure(model, q, moving, out.direction);
    step.displacement = s;
    step.converged = eq.converged;
    out.steps.push_back(step);
    if (options.on_step) options.on_step(step);
    if (step.contact_count == 0) break;
  }
  return out;
}

double gauge_force(const PullStep& step, const Friction& friction) {
  const double resistance = step.normal_resistance + friction.mu_pad * step.pad_slip_capacity +
                            friction.mu_plastic * step.plain_slip_capacity;
  // The gauge hook can only pull.
  return std::max(0.0, resistance);
}

PullOutTrace score_pull(const PullKinematics& kinematics, const Friction& friction) {
  PullOutTrace trace;
  trace.pull_direction = kinematics.direction;
  for (const auto& step : kinematics.steps) {
    const double force = gauge_force(step, friction);
    trace.samples.push_back({step.displacement, force, step.contact_count});
    if (!step.converged) ++trace.unconverged_steps;
    trace.peak_force = std::max(trace.peak_force, force);
    if (step.contact_count == 0) break;
    if (trace.peak_force > 0.0 && force < 0.01 * trace.peak_force) break;
  }
  return trace;
}

PullOutTrace pull_out_force(const TailModel& model, std::span<const WireInput> clamped_inputs,
                            const GraspScene& scene, std::span<const double> q_grasped,
                            const PullDirection& direction, const PullOptions& options) {
  return score_pull(track_pull(model, clamped_inputs, scene, q_grasped, direction, options),
                    scene.friction);
}

}  // namespace tailsim
