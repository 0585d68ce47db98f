#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tailsim/geometry.hpp"

namespace tailsim {

enum class RegionName { Proximal, Middle, DistalPinned, DistalTip };

std::string_view to_string(RegionName name);
std::optional<RegionName> region_from_string(std::string_view text);

// One stiffness/geometry zone of the vertebral column. Lengths in metres.
struct Region {
  RegionName name = RegionName::Proximal;
  int vertebra_count = 0;
  double total_length = 0.0;
  double process_offset = 0.0;
  double rubber_thickness = 0.0;
  double tape_multiplier = 1.0;

  friend bool operator==(const Region&, const Region&) = default;
};

enum class Side { Ventral, Dorsal };

std::string_view to_string(Side side);
std::optional<Side> side_from_string(std::string_view text);

// +1 for ventral (positive joint angles bend toward it), -1 for dorsal.
constexpr double side_sign(Side side) { return side == Side::Ventral ? 1.0 : -1.0; }

struct WireSpec {
  int id = 0;
  Side side = Side::Ventral;
  int termination_joint = 0;            // 1-based, last joint the wire passes
  std::vector<double> routing_offsets;  // one per traversed joint, metres

  friend bool operator==(const WireSpec&, const WireSpec&) = default;
};

// Geometry, stiffness and routing of the chain. Joint i (0-based here) sits at
// the proximal end of link i; joint 0 is fixed at the origin.
//
// Plain data so that tests can build deliberately broken models and feed them
// to validate(). Treat instances as immutable once built.
struct TailModel {
  std::vector<Region> regions;
  std::vector<int> joint_region;  // index into regions per joint, -1 if none
  std::vector<double> link_lengths;
  std::vector<double> joint_stiffness;   // N·m/rad
  double stiffness_coefficient = 0.0;    // κ, N·m/(rad·mm of rubber)
  std::vector<WireSpec> wires;
  double joint_angle_limit = 0.0;        // rad, symmetric
  double base_anchor_setback = 0.0;      // m, wire anchor behind joint 0
  double base_angle = 0.0;               // rad, direction of the base link

  int joint_count() const { return static_cast<int>(link_lengths.size()); }
  double total_length() const;
  const WireSpec& wire(int id) const;
  bool has_wire(int id) const;

  friend bool operator==(const TailModel&, const TailModel&) = default;
};

// Human-facing description used by the JSON model file. Lengths in the units
// named by the field suffix; build_model converts to SI.
struct RegionConfig {
  RegionName name = RegionName::Proximal;
  int vertebrae = 0;
  double length_cm = 0.0;
  double rubber_mm = 0.0;
  bool taped = false;

  friend bool operator==(const RegionConfig&, const RegionConfig&) = default;
};

struct WireConfig {
  int id = 0;
  Side side = Side::Ventral;
  int termination_joint = 0;

  friend bool operator==(const WireConfig&, const WireConfig&) = default;
};

struct ModelConfig {
  std::vector<RegionConfig> regions;
  double kappa = 1.0;            // N·m/(rad·mm)
  double tape_multiplier = 1.5;
  std::array<double, 4> offsets_mm{15.0, 10.0, 10.0, 3.2};  // by RegionName
  double angle_limit_deg = 60.0;
  std::vector<WireConfig> wires;
  std::optional<double> base_anchor_mm;  // defaults to the first link length
  double base_angle_deg = 0.0;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

ModelConfig default_config();
TailModel build_model(const ModelConfig& config);

// The 38-joint tail: regions of 6/10/13/9 vertebrae over 19/42/21/11 cm.
TailModel default_tail();

// Uniform chain without regions, mostly for tests and toy problems. Every
// wire passes all joints with the same offset.
TailModel uniform_chain(std::span<const double> link_lengths, std::span<const double> stiffness,
                        std::span<const WireConfig> wires, double offset, double angle_limit);

// Copy of `model` with joint stiffness rebuilt from a new κ.
TailModel with_kappa(const TailModel& model, double kappa);

struct ChainPose {
  std::vector<Vec2> joints;         // joint_count + 1 points, last is the tip
  std::vector<double> link_angles;  // absolute direction of each link

  const Vec2& tip() const { return joints.back(); }
  Vec2 direction(int link) const { return unit_from_angle(link_angles[link]); }
};

ChainPose forward_kinematics(const TailModel& model, std::span<const double> q);

// Routing points of a wire in order from the base anchor to its termination
// joint; size = termination_joint + 1.
std::vector<Vec2> wire_route(const TailModel& model, const ChainPose& pose, int wire_id);

double wire_length(const TailModel& model, std::span<const double> q, int wire_id);
double wire_length(const TailModel& model, const ChainPose& pose, int wire_id);

struct Violation {
  std::string rule;
  std::string detail;
  int index = -1;
};

// First broken invariant, or nullopt when the model is consistent.
std::optional<Violation> validate(const TailModel& model);

// Stable FNV-1a fingerprint over every numeric field; used in sweep metadata.
std::string model_hash(const TailModel& model);

}  // namespace tailsim
