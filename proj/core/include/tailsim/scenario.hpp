#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tailsim/scene_io.hpp"
#include "tailsim/statics.hpp"

namespace tailsim {

enum class KeyframeAction { Set, Clamp, Release };

// One wire command. Entries sharing `t` are applied together.
struct Keyframe {
  int t = 0;
  int wire_id = 0;
  KeyframeAction action = KeyframeAction::Set;
  double displacement = 0.0;  // m, for Set
};

struct ScenarioThresholds {
  int grasp_min_contacts = 2;
  int grasp_min_keyframes = 2;  // consecutive keyframe steps holding the grasp
  double retrieve_distance = 0.15;  // m toward the base
};

// Script file:
// {
//   "name": "...",
//   "scene": {scene document} | "scene_file": "relative/or/absolute.json",
//   "mobility": {"table_drag_N", "smoothing_mm"?},   optional; fixed object if absent
//   "thresholds": {"grasp_min_contacts", "grasp_min_keyframes", "retrieve_cm"},
//   "ramp_mm"?: continuation increment, default 2,
//   "keyframes": [{"t", "wire", "delta_mm" | "clamp": true | "release": true}]
// }
struct ScenarioScript {
  std::string name;
  std::optional<SceneFile> scene;
  std::optional<ObjectMobility> mobility;
  ScenarioThresholds thresholds;
  double ramp_increment = 2e-3;
  std::vector<Keyframe> keyframes;
};

ScenarioScript parse_scenario(std::string_view json_text,
                              const std::filesystem::path& base_dir = {});
ScenarioScript load_scenario(const std::filesystem::path& path);

struct WireState {
  int wire_id = 0;
  double displacement = 0.0;
  bool active = false;   // false: the wire hangs slack
  bool clamped = false;
};

struct KeyframeRecord {
  int t = 0;
  std::vector<WireState> wires;
  Vec2 object_position = Vec2::Zero();  // m
  int object_contacts = 0;
  double obstacle_penetration = 0.0;    // deepest tail sample inside a wall, m
  bool converged = true;
  Vec2 tip = Vec2::Zero();
};

struct ScenarioReport {
  std::string name;
  int keyframe_count = 0;
  std::vector<KeyframeRecord> history;
  bool grasped = false;
  bool retrieved = false;
  bool released = false;
  Vec2 object_displacement = Vec2::Zero();
  double displacement_toward_base = 0.0;  // m
  double max_obstacle_penetration = 0.0;  // m
  int unconverged_solves = 0;
  std::vector<double> final_q;
};

struct ScenarioCallbacks {
  // Invoked after every keyframe step, in order.
  std::function<void(const KeyframeRecord&)> on_keyframe;
};

ScenarioReport run_scenario(const TailModel& model, const ScenarioScript& script,
                            const StaticsOptions& options = {},
                            const ScenarioCallbacks& callbacks = {});

std::string scenario_report_json(const ScenarioReport& report);

}  // namespace tailsim
