#include "tailsim/statics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "tailsim/errors.hpp"

namespace tailsim {

namespace {

struct Kinematics {
  std::vector<Vec2> joints;
  std::vector<Vec2> dirs;
};

Kinematics chain(const TailModel& model, std::span<const double> x) {
  const int n = model.joint_count();
  Kinematics k;
  k.joints.resize(n + 1);
  k.dirs.resize(n);
  k.joints[0] = Vec2::Zero();
  double phi = model.base_angle;
  for (int i = 0; i < n; ++i) {
    phi += x[i];
    k.dirs[i] = unit_from_angle(phi);
    k.joints[i + 1] = k.joints[i] + model.link_lengths[i] * k.dirs[i];
  }
  return k;
}

// Routing points R_0..R_T; R_i (i >= 1) rides on link i-1.
void route_points(const TailModel& model, const WireSpec& wire, const Kinematics& k,
                  std::vector<Vec2>& out) {
  const double s = side_sign(wire.side);
  const int last = wire.termination_joint;
  out.resize(static_cast<std::size_t>(last) + 1);
  const Vec2 base_dir = unit_from_angle(model.base_angle);
  out[0] = k.joints[0] - model.base_anchor_setback * base_dir +
           s * wire.routing_offsets[0] * perp(base_dir);
  for (int i = 1; i <= last; ++i) {
    out[i] = k.joints[i - 1] + s * wire.routing_offsets[i - 1] * perp(k.dirs[i - 1]);
  }
}

// Segment unit vectors and total length of a route.
double route_units(const std::vector<Vec2>& route, std::vector<Vec2>& units) {
  units.resize(route.size() - 1);
  double length = 0.0;
  for (std::size_t i = 0; i + 1 < route.size(); ++i) {
    const Vec2 d = route[i + 1] - route[i];
    const double len = d.norm();
    length += len;
    units[i] = len > 0.0 ? Vec2(d / len) : Vec2(Vec2::Zero());
  }
  return length;
}

// d(length)/d(R_i) = u_{i-1} - u_i for the interior of the route.
Vec2 route_point_gradient(const std::vector<Vec2>& units, int i) {
  Vec2 g = units[i - 1];
  if (i < static_cast<int>(units.size())) g -= units[i];
  return g;
}

}  // namespace

StaticsEnergy::StaticsEnergy(const TailModel& model, std::span<const WireInput> inputs,
                             const GraspScene* scene, const CableParams& cable,
                             std::optional<ObjectMobility> mobility)
    : model_(model),
      inputs_(inputs.begin(), inputs.end()),
      scene_(scene),
      cable_(cable),
      mobility_(mobility) {
  if (mobility_ && (!scene_ || !scene_->object)) {
    throw InvalidArgument("a mobile object requires a scene with an object");
  }
  std::set<int> seen;
  const std::vector<double> straight(model.joint_count(), 0.0);
  const auto pose = forward_kinematics(model, straight);
  for (const auto& wire : model.wires) rest_lengths_.push_back(wire_length(model, pose, wire.id));
  for (const auto& input : inputs_) {
    if (!seen.insert(input.wire_id).second) {
      throw InvalidArgument("duplicate input for wire " + std::to_string(input.wire_id));
    }
    int slot = -1;
    for (std::size_t w = 0; w < model.wires.size(); ++w) {
      if (model.wires[w].id == input.wire_id) slot = static_cast<int>(w);
    }
    if (slot < 0) throw InvalidArgument("unknown wire " + std::to_string(input.wire_id));
    if (input.mode == WireMode::Tension && !(input.tension >= 0.0)) {
      throw InvalidArgument("wire tension must be non-negative");
    }
    input_slot_.push_back(slot);
  }
  if (scene_) {
    check_scene(*scene_, model);
    pad_ = pad_range(*scene_, model);
  }
}

int StaticsEnergy::dimension() const { return model_.joint_count() + (mobility_ ? 2 : 0); }

double StaticsEnergy::rest_length(int wire_id) const {
  for (std::size_t w = 0; w < model_.wires.size(); ++w) {
    if (model_.wires[w].id == wire_id) return rest_lengths_[w];
  }
  throw InvalidArgument("unknown wire " + std::to_string(wire_id));
}

double StaticsEnergy::target_length(const WireInput& input) const {
  return rest_length(input.wire_id) - input.displacement;
}

Vec2 StaticsEnergy::object_shift(std::span<const double> x) const {
  if (!mobility_) return Vec2::Zero();
  const int n = model_.joint_count();
  return {x[n], x[n + 1]};
}

double StaticsEnergy::evaluate(std::span<const double> x, std::span<double> gradient) const {
  const int n = model_.joint_count();
  if (static_cast<int>(x.size()) != dimension()) {
    throw DimensionError("energy: expected " + std::to_string(dimension()) + " variables, got " +
                         std::to_string(x.size()));
  }
  const bool want_grad = !gradient.empty();
  if (want_grad && static_cast<int>(gradient.size()) != dimension()) {
    throw DimensionError("energy: gradient buffer has the wrong size");
  }

  const Kinematics k = chain(model_, x);
  double energy = 0.0;
  std::vector<Vec2> link_force(want_grad ? n : 0, Vec2::Zero());
  std::vector<double> link_moment(want_grad ? n : 0, 0.0);
  Vec2 object_grad = Vec2::Zero();

  for (int j = 0; j < n; ++j) energy += 0.5 * model_.joint_stiffness[j] * x[j] * x[j];

  std::vector<Vec2> route, units;
  for (std::size_t a = 0; a < inputs_.size(); ++a) {
    const auto& input = inputs_[a];
    const auto& wire = model_.wires[input_slot_[a]];
    route_points(model_, wire, k, route);
    const double length = route_units(route, units);
    double dE_dL = 0.0;
    if (input.mode == WireMode::Displacement) {
      const double stretch = length - (rest_lengths_[input_slot_[a]] - input.displacement);
      const double kc = cable_.stiffness * (stretch < 0.0 ? cable_.push_factor : 1.0);
      energy += 0.5 * kc * stretch * stretch;
      dE_dL = kc * stretch;
    } else {
      energy += input.tension * length;
      dE_dL = input.tension;
    }
    if (!want_grad) continue;
    for (int i = 1; i <= wire.termination_joint; ++i) {
      const Vec2 g = dE_dL * route_point_gradient(units, i);
      link_force[i - 1] += g;
      link_moment[i - 1] += cross(route[i], g);
    }
  }

  if (scene_) {
    const double kc = scene_->contact_stiffness;
    std::optional<ShapeSpec> object = scene_->object;
    if (object) object->pose.position += object_shift(x);
    for (int link = 0; link < n; ++link) {
      for (double station : kLinkSampleStations) {
        const Vec2 point = k.joints[link] + station * model_.link_lengths[link] * k.dirs[link];
        auto add = [&](const SignedDistance& sd, bool is_object) {
          if (sd.distance >= 0.0) return;
          energy += 0.5 * kc * sd.distance * sd.distance;
          if (!want_grad) return;
          const Vec2 g = kc * sd.distance * sd.normal;
          link_force[link] += g;
          link_moment[link] += cross(point, g);
          if (is_object) object_grad -= g;
        };
        if (object) add(signed_distance(*object, point), true);
        for (const auto& wall : scene_->obstacles) add(signed_distance(wall, point), false);
      }
    }
  }

  if (mobility_) {
    const Vec2 d = object_shift(x) - mobility_->anchor;
    const double eps = mobility_->smoothing;
    const double s = std::sqrt(d.squaredNorm() + eps * eps);
    energy += mobility_->table_drag * (s - eps);
    if (want_grad) {
      const Vec2 g = object_grad + mobility_->table_drag * d / s;
      gradient[n] = g.x();
      gradient[n + 1] = g.y();
    }
  }

  if (want_grad) {
    Vec2 suffix_force = Vec2::Zero();
    double suffix_moment = 0.0;
    for (int j = n - 1; j >= 0; --j) {
      suffix_force += link_force[j];
      suffix_moment += link_moment[j];
      gradient[j] = model_.joint_stiffness[j] * x[j] + suffix_moment -
                    cross(k.joints[j], suffix_force);
    }
  }
  return energy;
}

void StaticsEnergy::model_hessian(std::span<const double> x, Eigen::MatrixXd& hessian) const {
  const int n = model_.joint_count();
  const int dim = dimension();
  hessian.setZero(dim, dim);
  for (int j = 0; j < n; ++j) hessian(j, j) = model_.joint_stiffness[j];

  const Kinematics k = chain(model_, x);
  Eigen::VectorXd jac(dim);

  std::vector<Vec2> route, units;
  for (std::size_t a = 0; a < inputs_.size(); ++a) {
    const auto& input = inputs_[a];
    if (input.mode != WireMode::Displacement) continue;
    const auto& wire = model_.wires[input_slot_[a]];
    route_points(model_, wire, k, route);
    const double length = route_units(route, units);
    const double stretch = length - (rest_lengths_[input_slot_[a]] - input.displacement);
    const double kc = cable_.stiffness * (stretch < 0.0 ? cable_.push_factor : 1.0);
    jac.setZero();
    Vec2 suffix_force = Vec2::Zero();
    double suffix_moment = 0.0;
    for (int j = wire.termination_joint - 1; j >= 0; --j) {
      const Vec2 g = route_point_gradient(units, j + 1);
      suffix_force += g;
      suffix_moment += cross(route[j + 1], g);
      jac[j] = suffix_moment - cross(k.joints[j], suffix_force);
    }
    const int m = wire.termination_joint;
    hessian.topLeftCorner(m, m).noalias() += kc * jac.head(m) * jac.head(m).transpose();
  }

  if (scene_) {
    const double kc = scene_->contact_stiffness;
    std::optional<ShapeSpec> object = scene_->object;
    if (object) object->pose.position += object_shift(x);
    for (int link = 0; link < n; ++link) {
      for (double station : kLinkSampleStations) {
        const Vec2 point = k.joints[link] + station * model_.link_lengths[link] * k.dirs[link];
        auto add = [&](const SignedDistance& sd, bool is_object) {
          if (sd.distance >= 0.0) return;
          jac.setZero();
          for (int j = 0; j <= link; ++j) jac[j] = cross(point - k.joints[j], sd.normal);
          if (is_object && mobility_) {
            jac[n] = -sd.normal.x();
            jac[n + 1] = -sd.normal.y();
          }
          if (is_object && mobility_) {
            hessian.noalias() += kc * jac * jac.transpose();
          } else {
            const int m = link + 1;
            hessian.topLeftCorner(m, m).noalias() += kc * jac.head(m) * jac.head(m).transpose();
          }
        };
        if (object) add(signed_distance(*object, point), true);
        for (const auto& wall : scene_->obstacles) add(signed_distance(wall, point), false);
      }
    }
  }

  if (mobility_) {
    const Vec2 d = object_shift(x) - mobility_->anchor;
    const double eps = mobility_->smoothing;
    const double s = std::sqrt(d.squaredNorm() + eps * eps);
    const Eigen::Matrix2d drag =
        mobility_->table_drag * (Eigen::Matrix2d::Identity() / s - d * d.transpose() / (s * s * s));
    hessian.bottomRightCorner(2, 2) += drag;
  }
}

double StaticsEnergy::wire_tension(std::span<const double> x, int wire_id) const {
  for (std::size_t a = 0; a < inputs_.size(); ++a) {
    const auto& input = inputs_[a];
    if (input.wire_id != wire_id) continue;
    if (input.mode == WireMode::Tension) return input.tension;
    const double length = wire_length(model_, x.first(model_.joint_count()), wire_id);
    const double stretch = length - (rest_lengths_[input_slot_[a]] - input.displacement);
    return cable_.stiffness * (stretch < 0.0 ? cable_.push_factor : 1.0) * stretch;
  }
  return 0.0;
}

double elastic_energy(const TailModel& model, std::span<const double> q) {
  if (static_cast<int>(q.size()) != model.joint_count()) {
    throw DimensionError("elastic_energy: configuration size mismatch");
  }
  double energy = 0.0;
  for (int j = 0; j < model.joint_count(); ++j) {
    energy += 0.5 * model.joint_stiffness[j] * q[j] * q[j];
  }
  return energy;
}

double total_energy(const TailModel& model, std::span<const double> q,
                    std::span<const WireInput> inputs, const GraspScene* scene,
                    const CableParams& cable) {
  const StaticsEnergy energy(model, inputs, scene, cable);
  return energy.evaluate(q, {});
}

std::vector<double> energy_gradient(const TailModel& model, std::span<const double> q,
                                    std::span<const WireInput> inputs, const GraspScene* scene,
                                    const CableParams& cable) {
  const StaticsEnergy energy(model, inputs, scene, cable);
  std::vector<double> grad(model.joint_count());
  energy.evaluate(q, grad);
  return grad;
}

namespace {

EquilibriumResult finish(const TailModel& model, const StaticsEnergy& energy,
                         MinimizeResult&& min) {
  const int n = model.joint_count();
  EquilibriumResult result;
  result.energy = min.value;
  result.gradient_norm = min.gradient_norm;
  result.iterations = min.iterations;
  result.converged = min.converged;
  result.deadline_hit = min.deadline_hit;
  result.energy_trace = std::move(min.value_trace);
  if (static_cast<int>(min.x.size()) > n) result.object_offset = {min.x[n], min.x[n + 1]};
  result.q_star.assign(min.x.begin(), min.x.begin() + n);
  for (int j = 0; j < n; ++j) {
    if (std::abs(result.q_star[j]) >= model.joint_angle_limit) result.saturated_joints.push_back(j);
  }
  const auto pose = forward_kinematics(model, result.q_star);
  for (const auto& wire : model.wires) {
    result.wire_ids.push_back(wire.id);
    result.wire_lengths.push_back(wire_length(model, pose, wire.id));
    result.wire_tensions.push_back(energy.wire_tension(min.x, wire.id));
  }
  return result;
}

void check_start(const TailModel& model, std::span<const double> q0) {
  if (static_cast<int>(q0.size()) != model.joint_count()) {
    throw DimensionError("initial configuration size mismatch");
  }
  for (std::size_t j = 0; j < q0.size(); ++j) {
    if (std::abs(q0[j]) > model.joint_angle_limit * (1.0 + 1e-12)) {
      throw InvalidArgument("initial configuration exceeds the joint angle limit at joint " +
                            std::to_string(j + 1));
    }
  }
}

}  // namespace

EquilibriumResult solve_equilibrium(const TailModel& model, std::span<const WireInput> inputs,
                                    const GraspScene* scene, std::span<const double> q0,
                                    const StaticsOptions& options) {
  check_start(model, q0);
  const StaticsEnergy energy(model, inputs, scene, options.cable);
  const int n = model.joint_count();
  const std::vector<double> lower(n, -model.joint_angle_limit);
  const std::vector<double> upper(n, model.joint_angle_limit);
  auto min = minimize_box(energy, std::vector<double>(q0.begin(), q0.end()), lower, upper,
                          options.solver);
  return finish(model, energy, std::move(min));
}

EquilibriumResult solve_equilibrium_mobile(const TailModel& model,
                                           std::span<const WireInput> inputs,
                                           const GraspScene& scene, std::span<const double> q0,
                                           const ObjectMobility& mobility, Vec2 start_offset,
                                           const StaticsOptions& options) {
  check_start(model, q0);
  const StaticsEnergy energy(model, inputs, &scene, options.cable, mobility);
  const int n = model.joint_count();
  std::vector<double> lower(n + 2, -model.joint_angle_limit);
  std::vector<double> upper(n + 2, model.joint_angle_limit);
  constexpr double inf = std::numeric_limits<double>::infinity();
  lower[n] = lower[n + 1] = -inf;
  upper[n] = upper[n + 1] = inf;
  std::vector<double> x0(q0.begin(), q0.end());
  x0.push_back(start_offset.x());
  x0.push_back(start_offset.y());
  auto min = minimize_box(energy, std::move(x0), lower, upper, options.solver);
  return finish(model, energy, std::move(min));
}

std::vector<double> motion_signature(const TailModel& model, const EquilibriumResult& result) {
  std::vector<double> mean(model.regions.size(), 0.0);
  std::vector<int> count(model.regions.size(), 0);
  for (int j = 0; j < model.joint_count(); ++j) {
    const int r = model.joint_region[j];
    if (r < 0) continue;
    mean[r] += result.q_star[j];
    ++count[r];
  }
  for (std::size_t r = 0; r < mean.size(); ++r) {
    if (count[r] > 0) mean[r] /= count[r];
  }
  return mean;
}

}  // namespace tailsim
