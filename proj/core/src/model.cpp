#include "tailsim/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <set>

#include "tailsim/errors.hpp"

namespace tailsim {

namespace {

constexpr std::array<std::string_view, 4> kRegionNames{"proximal", "middle", "distal_pinned",
                                                       "distal_tip"};

std::string describe(const char* fmt, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

}  // namespace

std::string_view to_string(RegionName name) { return kRegionNames[static_cast<int>(name)]; }

std::optional<RegionName> region_from_string(std::string_view text) {
  for (std::size_t i = 0; i < kRegionNames.size(); ++i) {
    if (kRegionNames[i] == text) return static_cast<RegionName>(i);
  }
  return std::nullopt;
}

std::string_view to_string(Side side) { return side == Side::Ventral ? "ventral" : "dorsal"; }

std::optional<Side> side_from_string(std::string_view text) {
  if (text == "ventral") return Side::Ventral;
  if (text == "dorsal") return Side::Dorsal;
  return std::nullopt;
}

double TailModel::total_length() const {
  return std::accumulate(link_lengths.begin(), link_lengths.end(), 0.0);
}

const WireSpec& TailModel::wire(int id) const {
  for (const auto& w : wires) {
    if (w.id == id) return w;
  }
  throw InvalidArgument("unknown wire id " + std::to_string(id));
}

bool TailModel::has_wire(int id) const {
  return std::any_of(wires.begin(), wires.end(), [id](const WireSpec& w) { return w.id == id; });
}

ModelConfig default_config() {
  ModelConfig config;
  config.regions = {
      {RegionName::Proximal, 6, 19.0, 0.76, true},
      {RegionName::Middle, 10, 42.0, 0.51, false},
      {RegionName::DistalPinned, 13, 21.0, 0.36, false},
      {RegionName::DistalTip, 9, 11.0, 0.30, false},
  };
  config.kappa = 1.0;
  config.tape_multiplier = 1.5;
  config.offsets_mm = {15.0, 10.0, 10.0, 3.2};
  config.angle_limit_deg = 60.0;
  config.wires = {
      {1, Side::Ventral, 6},  {2, Side::Ventral, 16}, {3, Side::Ventral, 38},
      {4, Side::Dorsal, 38},  {5, Side::Dorsal, 6},
  };
  return config;
}

TailModel build_model(const ModelConfig& config) {
  TailModel model;
  model.stiffness_coefficient = config.kappa;
  model.joint_angle_limit = deg_to_rad(config.angle_limit_deg);
  model.base_angle = deg_to_rad(config.base_angle_deg);

  std::vector<double> rubber_mm_per_joint;
  std::vector<double> tape_per_joint;
  for (std::size_t r = 0; r < config.regions.size(); ++r) {
    const auto& rc = config.regions[r];
    Region region;
    region.name = rc.name;
    region.vertebra_count = rc.vertebrae;
    region.total_length = rc.length_cm / 100.0;
    region.process_offset = config.offsets_mm[static_cast<int>(rc.name)] / 1000.0;
    region.rubber_thickness = rc.rubber_mm / 1000.0;
    region.tape_multiplier = rc.taped ? config.tape_multiplier : 1.0;
    model.regions.push_back(region);
    for (int v = 0; v < rc.vertebrae; ++v) {
      model.link_lengths.push_back(region.total_length / rc.vertebrae);
      model.joint_region.push_back(static_cast<int>(r));
      rubber_mm_per_joint.push_back(rc.rubber_mm);
      tape_per_joint.push_back(region.tape_multiplier);
    }
  }
  for (std::size_t i = 0; i < rubber_mm_per_joint.size(); ++i) {
    model.joint_stiffness.push_back(config.kappa * rubber_mm_per_joint[i] * tape_per_joint[i]);
  }

  for (const auto& wc : config.wires) {
    WireSpec wire{wc.id, wc.side, wc.termination_joint, {}};
    const int traversed = std::min(wc.termination_joint, model.joint_count());
    for (int j = 0; j < traversed; ++j) {
      wire.routing_offsets.push_back(model.regions[model.joint_region[j]].process_offset);
    }
    model.wires.push_back(std::move(wire));
  }

  if (config.base_anchor_mm) {
    model.base_anchor_setback = *config.base_anchor_mm / 1000.0;
  } else if (!model.link_lengths.empty()) {
    model.base_anchor_setback = model.link_lengths.front();
  }
  return model;
}

TailModel default_tail() { return build_model(default_config()); }

TailModel uniform_chain(std::span<const double> link_lengths, std::span<const double> stiffness,
                        std::span<const WireConfig> wires, double offset, double angle_limit) {
  if (link_lengths.size() != stiffness.size() || link_lengths.empty()) {
    throw DimensionError("uniform_chain: link and stiffness lists must be non-empty and equal");
  }
  TailModel model;
  model.link_lengths.assign(link_lengths.begin(), link_lengths.end());
  model.joint_stiffness.assign(stiffness.begin(), stiffness.end());
  model.joint_region.assign(link_lengths.size(), -1);
  model.joint_angle_limit = angle_limit;
  model.base_anchor_setback = link_lengths.front();
  for (const auto& wc : wires) {
    WireSpec wire{wc.id, wc.side, wc.termination_joint, {}};
    wire.routing_offsets.assign(static_cast<std::size_t>(wc.termination_joint), offset);
    model.wires.push_back(std::move(wire));
  }
  return model;
}

TailModel with_kappa(const TailModel& model, double kappa) {
  TailModel out = model;
  out.stiffness_coefficient = kappa;
  for (int j = 0; j < out.joint_count(); ++j) {
    const int r = out.joint_region[j];
    if (r < 0) {
      out.joint_stiffness[j] = model.joint_stiffness[j] * kappa / model.stiffness_coefficient;
    } else {
      const auto& region = out.regions[r];
      out.joint_stiffness[j] = kappa * (region.rubber_thickness * 1000.0) * region.tape_multiplier;
    }
  }
  return out;
}

ChainPose forward_kinematics(const TailModel& model, std::span<const double> q) {
  const int n = model.joint_count();
  if (static_cast<int>(q.size()) != n) {
    throw DimensionError("configuration has " + std::to_string(q.size()) + " angles, model has " +
                         std::to_string(n) + " joints");
  }
  ChainPose pose;
  pose.joints.resize(n + 1);
  pose.link_angles.resize(n);
  pose.joints[0] = Vec2::Zero();
  double phi = model.base_angle;
  for (int i = 0; i < n; ++i) {
    phi += q[i];
    pose.link_angles[i] = phi;
    pose.joints[i + 1] = pose.joints[i] + model.link_lengths[i] * unit_from_angle(phi);
  }
  return pose;
}

std::vector<Vec2> wire_route(const TailModel& model, const ChainPose& pose, int wire_id) {
  const WireSpec& wire = model.wire(wire_id);
  const double s = side_sign(wire.side);
  const int last = wire.termination_joint;
  std::vector<Vec2> route(static_cast<std::size_t>(last) + 1);
  const Vec2 base_dir = unit_from_angle(model.base_angle);
  route[0] = pose.joints[0] - model.base_anchor_setback * base_dir +
             s * wire.routing_offsets[0] * perp(base_dir);
  for (int i = 1; i <= last; ++i) {
    const int j = i - 1;
    route[i] = pose.joints[j] + s * wire.routing_offsets[j] * perp(pose.direction(j));
  }
  return route;
}

double wire_length(const TailModel& model, const ChainPose& pose, int wire_id) {
  const auto route = wire_route(model, pose, wire_id);
  double length = 0.0;
  for (std::size_t i = 1; i < route.size(); ++i) length += (route[i] - route[i - 1]).norm();
  return length;
}

double wire_length(const TailModel& model, std::span<const double> q, int wire_id) {
  return wire_length(model, forward_kinematics(model, q), wire_id);
}

std::optional<Violation> validate(const TailModel& model) {
  if (model.regions.size() != 4) {
    return Violation{"regions", "expected 4 regions, found " + std::to_string(model.regions.size())};
  }
  for (int r = 0; r < 4; ++r) {
    const auto& region = model.regions[r];
    if (region.name != static_cast<RegionName>(r)) {
      return Violation{"region order", "region " + std::to_string(r) + " is " +
                                           std::string(to_string(region.name)), r};
    }
    if (region.vertebra_count <= 0 || region.total_length <= 0.0 || region.process_offset <= 0.0) {
      return Violation{"region positivity", "region " + std::string(to_string(region.name)) +
                                                " has a non-positive count, length or offset", r};
    }
    if (region.tape_multiplier < 1.0) {
      return Violation{"tape multiplier", "tape multiplier below 1", r};
    }
    if (r > 0 && !(region.rubber_thickness < model.regions[r - 1].rubber_thickness)) {
      return Violation{"stiffness ordering",
                       describe("rubber thickness %.4g m does not decrease from %.4g m",
                                region.rubber_thickness, model.regions[r - 1].rubber_thickness),
                       r};
    }
  }

  const int n = model.joint_count();
  int expected = 0;
  for (const auto& region : model.regions) expected += region.vertebra_count;
  if (n != expected || static_cast<int>(model.joint_region.size()) != n ||
      static_cast<int>(model.joint_stiffness.size()) != n) {
    return Violation{"joint count", "region counts sum to " + std::to_string(expected) +
                                        " but the chain has " + std::to_string(n) + " links"};
  }

  int joint = 0;
  for (int r = 0; r < 4; ++r) {
    double sum = 0.0;
    for (int v = 0; v < model.regions[r].vertebra_count; ++v, ++joint) {
      if (model.joint_region[joint] != r) {
        return Violation{"joint region", "joint assigned to wrong region", joint};
      }
      sum += model.link_lengths[joint];
    }
    if (std::abs(sum - model.regions[r].total_length) > 1e-9) {
      return Violation{"link lengths",
                       describe("links sum to %.9g m, region claims %.9g m", sum,
                                model.regions[r].total_length),
                       r};
    }
  }

  for (int j = 0; j < n; ++j) {
    const auto& region = model.regions[model.joint_region[j]];
    const double law =
        model.stiffness_coefficient * region.rubber_thickness * 1000.0 * region.tape_multiplier;
    if (!(model.joint_stiffness[j] > 0.0)) {
      return Violation{"stiffness positivity", "joint stiffness must be positive", j};
    }
    if (std::abs(model.joint_stiffness[j] - law) > 1e-12 * std::max(1.0, std::abs(law))) {
      return Violation{"stiffness law", describe("stiffness %.6g differs from kappa*t*m = %.6g",
                                                 model.joint_stiffness[j], law),
                       j};
    }
    if (j > 0 && model.joint_stiffness[j] > model.joint_stiffness[j - 1]) {
      return Violation{"stiffness ordering", "stiffness increases toward the tip", j};
    }
  }

  std::set<int> ids;
  for (const auto& wire : model.wires) {
    if (!ids.insert(wire.id).second) {
      return Violation{"wire ids", "duplicate wire id " + std::to_string(wire.id), wire.id};
    }
    if (wire.termination_joint < 1 || wire.termination_joint > n) {
      return Violation{"wire termination", "termination joint out of range", wire.id};
    }
    if (static_cast<int>(wire.routing_offsets.size()) != wire.termination_joint) {
      return Violation{"wire offsets", "one routing offset per traversed joint required", wire.id};
    }
    for (double offset : wire.routing_offsets) {
      if (!(offset > 0.0)) return Violation{"wire offsets", "offsets must be positive", wire.id};
    }
  }
  for (auto [a, b] : {std::pair{1, 5}, std::pair{3, 4}}) {
    if (model.has_wire(a) && model.has_wire(b)) {
      const auto& wa = model.wire(a);
      const auto& wb = model.wire(b);
      if (wa.routing_offsets != wb.routing_offsets || wa.side == wb.side) {
        return Violation{"antagonistic symmetry",
                         "wires " + std::to_string(a) + " and " + std::to_string(b) +
                             " must mirror each other",
                         a};
      }
    }
  }
  if (!(model.joint_angle_limit > 0.0)) {
    return Violation{"angle limit", "joint angle limit must be positive"};
  }
  return std::nullopt;
}

namespace {

struct Fnv1a {
  std::uint64_t state = 0xcbf29ce484222325ULL;
  void bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      state ^= p[i];
      state *= 0x100000001b3ULL;
    }
  }
  void add(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    bytes(&bits, sizeof bits);
  }
  void add(std::int64_t v) { bytes(&v, sizeof v); }
};

}  // namespace

std::string model_hash(const TailModel& model) {
  Fnv1a h;
  for (const auto& r : model.regions) {
    h.add(static_cast<std::int64_t>(r.name));
    h.add(static_cast<std::int64_t>(r.vertebra_count));
    h.add(r.total_length);
    h.add(r.process_offset);
    h.add(r.rubber_thickness);
    h.add(r.tape_multiplier);
  }
  for (double v : model.link_lengths) h.add(v);
  for (double v : model.joint_stiffness) h.add(v);
  for (int v : model.joint_region) h.add(static_cast<std::int64_t>(v));
  h.add(model.stiffness_coefficient);
  for (const auto& w : model.wires) {
    h.add(static_cast<std::int64_t>(w.id));
    h.add(static_cast<std::int64_t>(w.side));
    h.add(static_cast<std::int64_t>(w.termination_joint));
    for (double v : w.routing_offsets) h.add(v);
  }
  h.add(model.joint_angle_limit);
  h.add(model.base_anchor_setback);
  h.add(model.base_angle);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.state));
  return buf;
}

}  // namespace tailsim
