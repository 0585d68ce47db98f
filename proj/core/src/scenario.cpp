#include "tailsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "tailsim/errors.hpp"
#include "tailsim/model_io.hpp"

namespace tailsim {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json parse_doc(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
}

double number(const json& obj, const char* key, const char* what) {
  if (!obj.contains(key) || !obj.at(key).is_number()) {
    throw ParseError(std::string(what) + ": '" + key + "' must be a number");
  }
  return obj.at(key).get<double>();
}

Keyframe keyframe_from(const json& k) {
  if (!k.is_object()) throw ParseError("keyframe: expected an object");
  Keyframe out;
  const double t = number(k, "t", "keyframe");
  if (t < 0 || t != std::floor(t)) throw ParseError("keyframe: 't' must be a non-negative integer");
  out.t = static_cast<int>(t);
  out.wire_id = static_cast<int>(number(k, "wire", "keyframe"));
  const int actions = static_cast<int>(k.contains("delta_mm")) + static_cast<int>(k.contains("clamp")) +
                      static_cast<int>(k.contains("release"));
  if (actions != 1) throw ParseError("keyframe: exactly one of delta_mm, clamp, release is required");
  if (k.contains("delta_mm")) {
    out.action = KeyframeAction::Set;
    out.displacement = number(k, "delta_mm", "keyframe") / 1000.0;
  } else if (k.contains("clamp")) {
    if (!k.at("clamp").is_boolean() || !k.at("clamp").get<bool>()) {
      throw ParseError("keyframe: 'clamp' must be true");
    }
    out.action = KeyframeAction::Clamp;
  } else {
    if (!k.at("release").is_boolean() || !k.at("release").get<bool>()) {
      throw ParseError("keyframe: 'release' must be true");
    }
    out.action = KeyframeAction::Release;
  }
  return out;
}

class Runner {
 public:
  Runner(const TailModel& model, const ScenarioScript& script, const StaticsOptions& options)
      : model_(model), script_(script), options_(options), q_(model.joint_count(), 0.0) {
    for (const auto& w : model.wires) wires_.push_back({w.id, 0.0, false, false});
    if (script.scene) scene_ = script.scene->scene;
  }

  const std::vector<double>& q() const { return q_; }
  const GraspScene& scene() const { return scene_; }
  int unconverged() const { return unconverged_; }

  WireState& wire(int id) {
    for (auto& w : wires_) {
      if (w.wire_id == id) return w;
    }
    throw InvalidArgument("scenario: model has no wire " + std::to_string(id));
  }

  // Ramps every wire from its current δ to `targets` in continuation steps;
  // wires listed in `dropping` go slack once they reach zero.
  void move_to(const std::map<int, double>& targets, const std::vector<int>& dropping) {
    std::map<int, double> start;
    double largest = 0.0;
    for (const auto& [id, target] : targets) {
      start[id] = wire(id).displacement;
      largest = std::max(largest, std::abs(target - start[id]));
      wire(id).active = true;
    }
    const int steps =
        std::max(1, static_cast<int>(std::ceil(largest / script_.ramp_increment - 1e-9)));
    for (int s = 1; s <= steps; ++s) {
      advance(start, targets, static_cast<double>(s - 1) / steps, static_cast<double>(s) / steps, 0);
    }
    for (int id : dropping) {
      wire(id).active = false;
      wire(id).clamped = false;
      wire(id).displacement = 0.0;
    }
    if (!dropping.empty()) commit(solve());
  }

  std::vector<WireState> wires() const { return wires_; }

 private:
  static constexpr double kMaxJointStep = 0.02;  // rad per accepted solve
  static constexpr int kMaxSubdivisions = 8;

  void set_fraction(const std::map<int, double>& start, const std::map<int, double>& targets,
                    double f) {
    for (const auto& [id, target] : targets) {
      wire(id).displacement = start.at(id) + (target - start.at(id)) * f;
    }
  }

  // Halves the step while the tail would jump further than kMaxJointStep.
  void advance(const std::map<int, double>& start, const std::map<int, double>& targets, double f0,
               double f1, int depth) {
    set_fraction(start, targets, f1);
    EquilibriumResult eq = solve();
    double change = 0.0;
    for (std::size_t j = 0; j < q_.size(); ++j) change = std::max(change, std::abs(eq.q_star[j] - q_[j]));
    if (change > kMaxJointStep && depth < kMaxSubdivisions) {
      const double mid = 0.5 * (f0 + f1);
      advance(start, targets, f0, mid, depth + 1);
      advance(start, targets, mid, f1, depth + 1);
      return;
    }
    commit(std::move(eq));
  }

  EquilibriumResult solve() const {
    std::vector<WireInput> inputs;
    for (const auto& w : wires_) {
      if (w.active) inputs.push_back(WireInput::pull(w.wire_id, w.displacement, w.clamped));
    }
    if (script_.mobility && scene_.object) {
      return solve_equilibrium_mobile(model_, inputs, scene_, q_, *script_.mobility, Vec2::Zero(),
                                      options_);
    }
    return solve_equilibrium(model_, inputs, &scene_, q_, options_);
  }

  void commit(EquilibriumResult eq) {
    if (script_.mobility && scene_.object) scene_.object->pose.position += eq.object_offset;
    if (!eq.converged) ++unconverged_;
    q_ = std::move(eq.q_star);
  }

  const TailModel& model_;
  const ScenarioScript& script_;
  const StaticsOptions& options_;
  std::vector<double> q_;
  std::vector<WireState> wires_;
  GraspScene scene_;
  int unconverged_ = 0;
};

}  // namespace

ScenarioScript parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir) {
  const json doc = parse_doc(json_text);
  if (!doc.is_object()) throw ParseError("scenario: top level must be an object");
  ScenarioScript out;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw ParseError("scenario: 'name' must be a string");
    out.name = doc["name"].get<std::string>();
  }
  if (doc.contains("scene") && doc.contains("scene_file")) {
    throw ParseError("scenario: give either 'scene' or 'scene_file'");
  }
  if (doc.contains("scene")) out.scene = parse_scene(doc["scene"].dump());
  if (doc.contains("scene_file")) {
    if (!doc["scene_file"].is_string()) throw ParseError("scenario: 'scene_file' must be a string");
    std::filesystem::path path = doc["scene_file"].get<std::string>();
    if (path.is_relative()) path = base_dir / path;
    try {
      out.scene = load_scene(path);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(std::string("scenario: ") + e.what());
    }
  }
  if (doc.contains("mobility")) {
    const auto& m = doc["mobility"];
    ObjectMobility mobility;
    mobility.table_drag = number(m, "table_drag_N", "mobility");
    if (m.contains("smoothing_mm")) mobility.smoothing = number(m, "smoothing_mm", "mobility") / 1000.0;
    if (mobility.table_drag < 0.0 || !(mobility.smoothing > 0.0)) {
      throw ParseError("mobility: drag must be non-negative and smoothing positive");
    }
    out.mobility = mobility;
  }
  if (doc.contains("thresholds")) {
    const auto& t = doc["thresholds"];
    if (t.contains("grasp_min_contacts")) {
      out.thresholds.grasp_min_contacts = static_cast<int>(number(t, "grasp_min_contacts", "thresholds"));
    }
    if (t.contains("grasp_min_keyframes")) {
      out.thresholds.grasp_min_keyframes =
          static_cast<int>(number(t, "grasp_min_keyframes", "thresholds"));
    }
    if (t.contains("retrieve_cm")) {
      out.thresholds.retrieve_distance = number(t, "retrieve_cm", "thresholds") / 100.0;
    }
    if (out.thresholds.grasp_min_contacts < 1 || out.thresholds.grasp_min_keyframes < 1) {
      throw ParseError("thresholds: grasp counts must be at least 1");
    }
  }
  if (doc.contains("ramp_mm")) {
    out.ramp_increment = number(doc, "ramp_mm", "scenario") / 1000.0;
    if (!(out.ramp_increment > 0.0)) throw ParseError("scenario: 'ramp_mm' must be positive");
  }
  if (doc.contains("keyframes")) {
    if (!doc["keyframes"].is_array()) throw ParseError("scenario: 'keyframes' must be an array");
    for (const auto& k : doc["keyframes"]) out.keyframes.push_back(keyframe_from(k));
  }
  std::stable_sort(out.keyframes.begin(), out.keyframes.end(),
                   [](const Keyframe& a, const Keyframe& b) { return a.t < b.t; });
  return out;
}

ScenarioScript load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_text_file(path), path.parent_path());
}

ScenarioReport run_scenario(const TailModel& model, const ScenarioScript& script,
                            const StaticsOptions& options, const ScenarioCallbacks& callbacks) {
  ScenarioReport report;
  report.name = script.name;
  for (const auto& k : script.keyframes) {
    if (!model.has_wire(k.wire_id)) {
      throw InvalidArgument("scenario: model has no wire " + std::to_string(k.wire_id));
    }
  }

  Runner runner(model, script, options);
  const std::optional<Vec2> start =
      runner.scene().object ? std::optional<Vec2>(runner.scene().object->pose.position) : std::nullopt;

  std::size_t i = 0;
  while (i < script.keyframes.size()) {
    const int t = script.keyframes[i].t;
    std::map<int, double> targets;
    std::vector<int> dropping;
    for (; i < script.keyframes.size() && script.keyframes[i].t == t; ++i) {
      const auto& k = script.keyframes[i];
      auto& w = runner.wire(k.wire_id);
      switch (k.action) {
        case KeyframeAction::Set:
          targets[k.wire_id] = k.displacement;
          break;
        case KeyframeAction::Clamp:
          w.clamped = true;
          break;
        case KeyframeAction::Release:
          if (w.active) {
            targets[k.wire_id] = 0.0;
            dropping.push_back(k.wire_id);
          }
          break;
      }
    }
    runner.move_to(targets, dropping);

    KeyframeRecord record;
    record.t = t;
    record.wires = runner.wires();
    const auto contacts = contact_forces(model, runner.q(), runner.scene());
    record.object_contacts = contacts.object_contact_count();
    for (const auto& c : contacts.contacts) {
      if (c.body == ContactBody::Obstacle) {
        record.obstacle_penetration = std::max(record.obstacle_penetration, c.penetration);
      }
    }
    if (runner.scene().object) record.object_position = runner.scene().object->pose.position;
    record.tip = forward_kinematics(model, runner.q()).tip();
    record.converged = runner.unconverged() == report.unconverged_solves;
    report.unconverged_solves = runner.unconverged();
    report.max_obstacle_penetration =
        std::max(report.max_obstacle_penetration, record.obstacle_penetration);
    if (callbacks.on_keyframe) callbacks.on_keyframe(record);
    report.history.push_back(std::move(record));
  }
  report.keyframe_count = static_cast<int>(report.history.size());
  report.final_q = runner.q();

  // grasped: a run of keyframes holding enough contacts; released: contact
  // lost at some later keyframe.
  int run = 0;
  std::optional<std::size_t> grasp_end;
  for (std::size_t k = 0; k < report.history.size(); ++k) {
    if (report.history[k].object_contacts >= script.thresholds.grasp_min_contacts) {
      if (++run >= script.thresholds.grasp_min_keyframes && !grasp_end) grasp_end = k;
    } else {
      run = 0;
    }
  }
  report.grasped = grasp_end.has_value();
  if (grasp_end) {
    for (std::size_t k = *grasp_end + 1; k < report.history.size(); ++k) {
      if (report.history[k].object_contacts == 0) report.released = true;
    }
  }
  if (start && !report.history.empty()) {
    report.object_displacement = report.history.back().object_position - *start;
    const Vec2 to_base = start->norm() > 0.0 ? Vec2(-start->normalized()) : Vec2(-Vec2::UnitX());
    report.displacement_toward_base = report.object_displacement.dot(to_base);
    report.retrieved = report.displacement_toward_base >= script.thresholds.retrieve_distance;
  }
  return report;
}

std::string scenario_report_json(const ScenarioReport& report) {
  ordered_json doc;
  doc["name"] = report.name;
  doc["keyframe_count"] = report.keyframe_count;
  doc["grasped"] = report.grasped;
  doc["retrieved"] = report.retrieved;
  doc["released"] = report.released;
  doc["object_displacement_cm"] = {report.object_displacement.x() * 100.0,
                                   report.object_displacement.y() * 100.0};
  doc["displacement_toward_base_cm"] = report.displacement_toward_base * 100.0;
  doc["max_obstacle_penetration_mm"] = report.max_obstacle_penetration * 1000.0;
  doc["unconverged_solves"] = report.unconverged_solves;
  ordered_json history = ordered_json::array();
  for (const auto& r : report.history) {
    ordered_json wires = ordered_json::array();
    for (const auto& w : r.wires) {
      wires.push_back({{"id", w.wire_id},
                       {"delta_mm", w.displacement * 1000.0},
                       {"active", w.active},
                       {"clamped", w.clamped}});
    }
    history.push_back({{"t", r.t},
                       {"object_contacts", r.object_contacts},
                       {"object_cm", {r.object_position.x() * 100.0, r.object_position.y() * 100.0}},
                       {"tip_cm", {r.tip.x() * 100.0, r.tip.y() * 100.0}},
                       {"obstacle_penetration_mm", r.obstacle_penetration * 1000.0},
                       {"converged", r.converged},
                       {"wires", wires}});
  }
  doc["history"] = std::move(history);
  return doc.dump(2) + "\n";
}

}  // namespace tailsim
