#include "tailsim/records.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace tailsim {

using nlohmann::ordered_json;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

ordered_json contacts_json(const ContactSet& contacts) {
  ordered_json out = ordered_json::array();
  for (const auto& c : contacts.contacts) {
    out.push_back({{"link", c.link},
                   {"body", c.body == ContactBody::Object ? "object" : "obstacle"},
                   {"point_m", {c.point.x(), c.point.y()}},
                   {"normal", {c.normal.x(), c.normal.y()}},
                   {"penetration_m", c.penetration},
                   {"normal_force_N", c.normal_force},
                   {"friction_coefficient", c.friction_coefficient}});
  }
  return out;
}

}  // namespace

std::string equilibrium_json(const TailModel& model, const EquilibriumResult& result,
                             const ContactSet* contacts) {
  const auto pose = forward_kinematics(model, result.q_star);
  ordered_json doc;
  doc["model_hash"] = model_hash(model);
  doc["converged"] = result.converged;
  doc["iterations"] = result.iterations;
  doc["energy_J"] = result.energy;
  doc["gradient_norm"] = result.gradient_norm;
  doc["deadline_hit"] = result.deadline_hit;
  doc["saturated_joints"] = result.saturated_joints;
  doc["tip_m"] = {pose.tip().x(), pose.tip().y()};
  doc["joint_angles_rad"] = result.q_star;
  ordered_json wires = ordered_json::array();
  for (std::size_t w = 0; w < result.wire_ids.size(); ++w) {
    wires.push_back({{"id", result.wire_ids[w]},
                     {"length_m", result.wire_lengths[w]},
                     {"tension_N", result.wire_tensions[w]}});
  }
  doc["wires"] = wires;
  if (result.object_offset != Vec2::Zero()) {
    doc["object_offset_m"] = {result.object_offset.x(), result.object_offset.y()};
  }
  if (contacts) doc["contacts"] = contacts_json(*contacts);
  doc["energy_trace_J"] = result.energy_trace;
  return doc.dump(2) + "\n";
}

std::string configuration_csv(const TailModel& model, std::span<const double> q) {
  const auto pose = forward_kinematics(model, q);
  std::ostringstream out;
  out << "joint,angle_rad,angle_deg,x_m,y_m\n";
  for (int j = 0; j < model.joint_count(); ++j) {
    out << j + 1 << ',' << format_double(q[j]) << ',' << format_double(rad_to_deg(q[j])) << ','
        << format_double(pose.joints[j].x()) << ',' << format_double(pose.joints[j].y()) << '\n';
  }
  out << "tip,,," << format_double(pose.tip().x()) << ',' << format_double(pose.tip().y()) << '\n';
  return out.str();
}

std::string pull_trace_csv(const PullOutTrace& trace) {
  std::ostringstream out;
  out << "s_mm,force_N\n";
  for (const auto& s : trace.samples) {
    out << format_double(s.displacement * 1e3) << ',' << format_double(s.force) << '\n';
  }
  return out.str();
}

}  // namespace tailsim
