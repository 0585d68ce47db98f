#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "tailsim/model.hpp"
#include "tailsim/shapes.hpp"

namespace tailsim {

struct Friction {
  double mu_pad = 0.8;
  double mu_plastic = 0.3;

  friend bool operator==(const Friction&, const Friction&) = default;
};

// 1-based inclusive joint interval.
struct JointRange {
  int first = 0;
  int last = 0;

  bool contains(int joint) const { return joint >= first && joint <= last; }
  friend bool operator==(const JointRange&, const JointRange&) = default;
};

struct GraspScene {
  std::optional<ShapeSpec> object;
  std::vector<Segment> obstacles;
  double contact_stiffness = 5e3;  // N/m
  Friction friction;
  std::optional<JointRange> pad_joints;  // unset: every distal joint

  friend bool operator==(const GraspScene&, const GraspScene&) = default;
};

// Pad coverage resolved against a model (defaults to DistalPinned ∪ DistalTip).
JointRange pad_range(const GraspScene& scene, const TailModel& model);

// Throws InvalidArgument on μ outside [0, 2], non-positive stiffness or a pad
// range reaching outside the distal regions.
void check_scene(const GraspScene& scene, const TailModel& model);

// Each link is probed at its proximal end, midpoint and distal end.
inline constexpr std::array<double, 3> kLinkSampleStations{0.0, 0.5, 1.0};

enum class ContactBody { Object, Obstacle };

struct Contact {
  int link = 0;  // 0-based
  Vec2 point = Vec2::Zero();
  Vec2 normal = Vec2::UnitX();  // outward normal of the body, toward the tail
  double penetration = 0.0;
  double normal_force = 0.0;
  double friction_coefficient = 0.0;
  ContactBody body = ContactBody::Object;
  int obstacle = -1;
};

struct ContactSet {
  std::vector<Contact> contacts;

  int object_contact_count() const;
  double max_penetration() const;
  double max_normal_force() const;
  bool empty() const { return contacts.empty(); }
};

ContactSet contact_forces(const TailModel& model, std::span<const double> q,
                          const GraspScene& scene);
ContactSet contact_forces(const TailModel& model, const ChainPose& pose, const GraspScene& scene);

// Σ ½ k_contact · penetration² over every sample point and body.
double contact_energy(const TailModel& model, std::span<const double> q, const GraspScene& scene);

}  // namespace tailsim
