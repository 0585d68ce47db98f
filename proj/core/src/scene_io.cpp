#include "tailsim/scene_io.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "tailsim/errors.hpp"
#include "tailsim/model_io.hpp"
#include "tailsim/units.hpp"

namespace tailsim {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json parse_doc(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

template <typename T>
T field(const json& obj, const char* key, const char* what) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError(std::string(what) + ": missing field '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string(what) + ": field '" + key + "': " + e.what());
  }
}

template <typename T>
T field_or(const json& obj, const char* key, T fallback, const char* what) {
  if (!obj.contains(key)) return fallback;
  return field<T>(obj, key, what);
}

Vec2 point_cm(const json& obj, const char* key) {
  const auto v = field<std::vector<double>>(obj, key, "obstacle");
  if (v.size() != 2) throw ParseError(std::string("obstacle: '") + key + "' needs two numbers");
  return Vec2(v[0], v[1]) / 100.0;
}

ShapeSpec shape_from(const json& obj) {
  const auto kind_text = field<std::string>(obj, "kind", "object");
  const auto kind = shape_kind_from_string(kind_text);
  if (!kind) throw ParseError("object: unknown kind '" + kind_text + "'");
  const double diameter = field<double>(obj, "diameter_cm", "object") / 100.0;
  Vec2 center = Vec2::Zero();
  double rotation = 0.0;
  if (obj.contains("pose")) {
    const auto& pose = obj.at("pose");
    center = Vec2(field<double>(pose, "x_cm", "object pose"), field<double>(pose, "y_cm", "object pose")) /
             100.0;
    rotation = deg_to_rad(field_or<double>(pose, "rot_deg", 0.0, "object pose"));
  }
  try {
    if (*kind == ShapeKind::Circle) {
      auto s = make_circle(diameter, center);
      s.pose.rotation = rotation;
      return s;
    }
    return make_polygon(field<int>(obj, "sides", "object"), diameter, center, rotation);
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("object: ") + e.what());
  }
}

ordered_json shape_to(const ShapeSpec& s) {
  ordered_json obj;
  obj["kind"] = std::string(to_string(s.kind));
  obj["diameter_cm"] = s.diameter * 100.0;
  if (s.kind == ShapeKind::RegularPolygon) obj["sides"] = s.side_count;
  obj["pose"] = {{"x_cm", s.pose.position.x() * 100.0},
                 {"y_cm", s.pose.position.y() * 100.0},
                 {"rot_deg", rad_to_deg(s.pose.rotation)}};
  return obj;
}

}  // namespace

ShapeSpec parse_shape(std::string_view json_text) {
  return shape_from(parse_doc(json_text, "object"));
}

std::string dump_shape(const ShapeSpec& shape) { return shape_to(shape).dump(); }

std::vector<WireInput> parse_wire_list(std::string_view text) {
  std::vector<WireInput> out;
  if (text.find_first_not_of(" \t") == std::string_view::npos) return out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string_view token =
        text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    const std::size_t colon = token.find(':');
    const auto bad = [&](const std::string& why) {
      return ParseError("wire token '" + std::string(token) + "': " + why);
    };
    if (colon == std::string_view::npos) throw bad("expected <id>:<value><unit>");
    const std::string id_text(token.substr(0, colon));
    int id = 0;
    try {
      std::size_t used = 0;
      id = std::stoi(id_text, &used);
      if (used != id_text.size()) throw bad("wire id must be an integer");
    } catch (const std::logic_error&) {
      throw bad("wire id must be an integer");
    }
    const std::string_view value = token.substr(colon + 1);
    try {
      if (!value.empty() && value.back() == 'N') {
        const double t = parse_force(value);
        if (t < 0.0) throw bad("tension must be non-negative");
        out.push_back(WireInput::with_tension(id, t));
      } else {
        out.push_back(WireInput::pull(id, parse_length(value)));
      }
    } catch (const ParseError& e) {
      if (std::string_view(e.what()).starts_with("wire token")) throw;
      throw bad(e.what());
    }
    for (std::size_t i = 0; i + 1 < out.size(); ++i) {
      if (out[i].wire_id == id) throw bad("wire listed twice");
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

ShapeSpec place_object(const SceneFile& file, ShapeSpec shape) {
  if (file.placement == ObjectPlacement::Tangent) {
    double below = shape.radius();
    if (shape.kind == ShapeKind::RegularPolygon) {
      below = 0.0;
      for (int k = 0; k < shape.side_count; ++k) {
        const double angle = shape.pose.rotation + 2.0 * std::numbers::pi * k / shape.side_count;
        below = std::max(below, -shape.radius() * std::sin(angle));
      }
    }
    shape.pose.position = Vec2(file.anchor.x(), file.anchor.y() + below);
  } else {
    shape.pose.position = file.scene.object ? file.scene.object->pose.position : file.anchor;
  }
  return shape;
}

SceneFile parse_scene(std::string_view json_text) {
  const json doc = parse_doc(json_text, "scene");
  if (!doc.is_object()) throw ParseError("scene: top level must be an object");
  SceneFile out;
  if (doc.contains("object") && !doc.at("object").is_null()) {
    const auto& obj = doc.at("object");
    const auto rule = field_or<std::string>(obj, "placement", "center", "object");
    if (rule == "tangent") {
      out.placement = ObjectPlacement::Tangent;
    } else if (rule != "center") {
      throw ParseError("object: unknown placement '" + rule + "'");
    }
    auto shape = shape_from(obj);
    out.anchor = shape.pose.position;
    out.scene.object = place_object(out, shape);
  }

  for (const auto& o : field_or<json>(doc, "obstacles", json::array(), "scene")) {
    Segment seg;
    seg.a = point_cm(o, "a_cm");
    seg.b = point_cm(o, "b_cm");
    seg.thickness = field_or<double>(o, "thickness_cm", 1.0, "obstacle") / 100.0;
    if (!(seg.thickness > 0.0)) throw ParseError("obstacle: thickness must be positive");
    out.scene.obstacles.push_back(seg);
  }
  if (doc.contains("friction")) {
    const auto& f = doc.at("friction");
    out.scene.friction.mu_pad = field_or<double>(f, "mu_pad", out.scene.friction.mu_pad, "friction");
    out.scene.friction.mu_plastic =
        field_or<double>(f, "mu_plastic", out.scene.friction.mu_plastic, "friction");
  }
  out.scene.contact_stiffness =
      field_or<double>(doc, "contact_stiffness_N_per_m", out.scene.contact_stiffness, "scene");
  if (doc.contains("pad_joints")) {
    const auto v = field<std::vector<int>>(doc, "pad_joints", "scene");
    if (v.size() != 2) throw ParseError("scene: pad_joints needs [first, last]");
    out.scene.pad_joints = JointRange{v[0], v[1]};
  }

  if (doc.contains("grasp")) {
    const auto& g = doc.at("grasp");
    for (const auto& w : field_or<json>(g, "wires", json::array(), "grasp")) {
      out.grasp_wires.push_back(
          WireInput::pull(field<int>(w, "id", "grasp wire"), field<double>(w, "delta_mm", "grasp wire") / 1000.0));
    }
    if (g.contains("tension_limit_N")) {
      out.grasp_tension_limit = field<double>(g, "tension_limit_N", "grasp");
      if (!(*out.grasp_tension_limit > 0.0)) throw ParseError("grasp: tension_limit_N must be positive");
    }
  }
  if (doc.contains("pull")) {
    const auto& p = doc.at("pull");
    const auto mode_text = field_or<std::string>(p, "direction", "out_of_wrap", "pull");
    const auto mode = pull_mode_from_string(mode_text);
    if (!mode) throw ParseError("pull: unknown direction '" + mode_text + "'");
    out.direction.mode = *mode;
    if (*mode == PullDirectionMode::Fixed) {
      out.direction.angle = deg_to_rad(field<double>(p, "angle_deg", "pull"));
    }
    out.pull.step = field_or<double>(p, "step_mm", out.pull.step * 1000.0, "pull") / 1000.0;
    out.pull.max_steps = field_or<int>(p, "max_steps", out.pull.max_steps, "pull");
    if (!(out.pull.step > 0.0) || out.pull.max_steps < 1) {
      throw ParseError("pull: step_mm and max_steps must be positive");
    }
  }
  if (doc.contains("mass_g")) out.mass_g = field<double>(doc, "mass_g", "scene");
  out.orientations = field_or<int>(doc, "orientations", 1, "scene");
  if (out.orientations < 1) throw ParseError("scene: orientations must be at least 1");
  out.note = field_or<std::string>(doc, "note", "", "scene");
  return out;
}

SceneFile load_scene(const std::filesystem::path& path) {
  return parse_scene(read_text_file(path));
}

std::string dump_scene(const SceneFile& s) {
  ordered_json doc;
  if (s.scene.object) {
    doc["object"] = shape_to(*s.scene.object);
    if (s.placement == ObjectPlacement::Tangent) {
      doc["object"]["pose"]["x_cm"] = s.anchor.x() * 100.0;
      doc["object"]["pose"]["y_cm"] = s.anchor.y() * 100.0;
      doc["object"]["placement"] = "tangent";
    }
  }
  doc["obstacles"] = ordered_json::array();
  for (const auto& o : s.scene.obstacles) {
    doc["obstacles"].push_back({{"a_cm", {o.a.x() * 100.0, o.a.y() * 100.0}},
                                {"b_cm", {o.b.x() * 100.0, o.b.y() * 100.0}},
                                {"thickness_cm", o.thickness * 100.0}});
  }
  doc["friction"] = {{"mu_pad", s.scene.friction.mu_pad}, {"mu_plastic", s.scene.friction.mu_plastic}};
  doc["contact_stiffness_N_per_m"] = s.scene.contact_stiffness;
  if (s.scene.pad_joints) doc["pad_joints"] = {s.scene.pad_joints->first, s.scene.pad_joints->last};
  ordered_json wires = ordered_json::array();
  for (const auto& w : s.grasp_wires) wires.push_back({{"id", w.wire_id}, {"delta_mm", w.displacement * 1000.0}});
  doc["grasp"] = {{"wires", wires}};
  if (s.grasp_tension_limit) doc["grasp"]["tension_limit_N"] = *s.grasp_tension_limit;
  ordered_json pull;
  pull["direction"] = std::string(to_string(s.direction.mode));
  if (s.direction.mode == PullDirectionMode::Fixed) pull["angle_deg"] = rad_to_deg(s.direction.angle);
  pull["step_mm"] = s.pull.step * 1000.0;
  pull["max_steps"] = s.pull.max_steps;
  doc["pull"] = pull;
  if (s.mass_g) doc["mass_g"] = *s.mass_g;
  if (s.orientations != 1) doc["orientations"] = s.orientations;
  if (!s.note.empty()) doc["note"] = s.note;
  return doc.dump(2) + "\n";
}

}  // namespace tailsim
