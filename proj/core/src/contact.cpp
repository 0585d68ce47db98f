#include "tailsim/contact.hpp"

#include <algorithm>

#include "tailsim/errors.hpp"

namespace tailsim {

JointRange pad_range(const GraspScene& scene, const TailModel& model) {
  if (scene.pad_joints) return *scene.pad_joints;
  int first = 0;
  for (int j = 0; j < model.joint_count(); ++j) {
    const int r = model.joint_region[j];
    if (r >= 0 && (model.regions[r].name == RegionName::DistalPinned ||
                   model.regions[r].name == RegionName::DistalTip)) {
      first = j + 1;
      break;
    }
  }
  if (first == 0) return JointRange{};  // no pad on region-less chains
  return JointRange{first, model.joint_count()};
}

void check_scene(const GraspScene& scene, const TailModel& model) {
  auto in_range = [](double mu) { return mu >= 0.0 && mu <= 2.0; };
  if (!in_range(scene.friction.mu_pad) || !in_range(scene.friction.mu_plastic)) {
    throw InvalidArgument("friction coefficients must lie in [0, 2]");
  }
  if (!(scene.contact_stiffness > 0.0)) throw InvalidArgument("contact stiffness must be positive");
  if (scene.pad_joints) {
    const auto& range = *scene.pad_joints;
    if (range.first < 1 || range.last > model.joint_count() || range.first > range.last) {
      throw InvalidArgument("pad joint range out of bounds");
    }
    for (int j = range.first; j <= range.last; ++j) {
      const int r = model.joint_region[j - 1];
      if (r >= 0 && model.regions[r].name != RegionName::DistalPinned &&
          model.regions[r].name != RegionName::DistalTip) {
        throw InvalidArgument("pad joints must lie in the distal regions");
      }
    }
  }
  if (scene.object && !(scene.object->diameter > 0.0)) {
    throw InvalidArgument("object diameter must be positive");
  }
}

int ContactSet::object_contact_count() const {
  return static_cast<int>(std::count_if(contacts.begin(), contacts.end(), [](const Contact& c) {
    return c.body == ContactBody::Object;
  }));
}

double ContactSet::max_penetration() const {
  double m = 0.0;
  for (const auto& c : contacts) m = std::max(m, c.penetration);
  return m;
}

double ContactSet::max_normal_force() const {
  double m = 0.0;
  for (const auto& c : contacts) m = std::max(m, c.normal_force);
  return m;
}

ContactSet contact_forces(const TailModel& model, const ChainPose& pose, const GraspScene& scene) {
  ContactSet set;
  const JointRange pad = pad_range(scene, model);
  for (int link = 0; link < model.joint_count(); ++link) {
    const Vec2 dir = pose.direction(link);
    const double mu = pad.contains(link + 1) ? scene.friction.mu_pad : scene.friction.mu_plastic;
    for (double station : kLinkSampleStations) {
      const Vec2 point = pose.joints[link] + station * model.link_lengths[link] * dir;
      auto emit = [&](const SignedDistance& sd, ContactBody body, int obstacle) {
        if (sd.distance >= 0.0) return;
        Contact c;
        c.link = link;
        c.point = point;
        c.normal = sd.normal;
        c.penetration = -sd.distance;
        c.normal_force = scene.contact_stiffness * c.penetration;
        c.friction_coefficient = mu;
        c.body = body;
        c.obstacle = obstacle;
        set.contacts.push_back(c);
      };
      if (scene.object) emit(signed_distance(*scene.object, point), ContactBody::Object, -1);
      for (std::size_t k = 0; k < scene.obstacles.size(); ++k) {
        emit(signed_distance(scene.obstacles[k], point), ContactBody::Obstacle,
             static_cast<int>(k));
      }
    }
  }
  return set;
}

ContactSet contact_forces(const TailModel& model, std::span<const double> q,
                          const GraspScene& scene) {
  return contact_forces(model, forward_kinematics(model, q), scene);
}

double contact_energy(const TailModel& model, std::span<const double> q, const GraspScene& scene) {
  double energy = 0.0;
  for (const auto& c : contact_forces(model, q, scene).contacts) {
    energy += 0.5 * scene.contact_stiffness * c.penetration * c.penetration;
  }
  return energy;
}

}  // namespace tailsim
