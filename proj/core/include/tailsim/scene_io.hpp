#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tailsim/grasp.hpp"

namespace tailsim {

// A grasp scene plus the protocol used to test it.
//
// {
//   "object":    {"kind": "circle"|"polygon", "diameter_cm", "sides"?,
//                 "pose": {"x_cm", "y_cm", "rot_deg"?},
//                 "placement"?: "center"|"tangent"},
//   "obstacles": [{"a_cm": [x, y], "b_cm": [x, y], "thickness_cm"?}],
//   "friction":  {"mu_pad", "mu_plastic"},
//   "contact_stiffness_N_per_m"?, "pad_joints"?: [first, last],
//   "grasp":     {"wires": [{"id", "delta_mm"}], "tension_limit_N"?},
//   "pull":      {"direction": "out_of_wrap"|"from_base"|"fixed", "angle_deg"?,
//                 "step_mm"?, "max_steps"?},
//   "mass_g"?, "orientations"?, "note"?
// }
enum class ObjectPlacement {
  Center,   // pose gives the object centre
  Tangent,  // pose.x is a station along the straight tail, pose.y the gap from it
};

struct SceneFile {
  GraspScene scene;
  ObjectPlacement placement = ObjectPlacement::Center;
  Vec2 anchor = Vec2::Zero();  // pose.x, pose.y as written, m
  std::vector<WireInput> grasp_wires;
  std::optional<double> grasp_tension_limit;  // N; see GraspOptions
  PullDirection direction;
  PullOptions pull;
  std::optional<double> mass_g;
  // Shape sweeps test each polygon at this many rotations spread evenly over
  // its symmetry period and report the mean.
  int orientations = 1;
  std::string note;
};

// Moves `shape` to the scene's placement rule. Tangent placement puts the
// ventral side of the object `anchor.y` above the straight tail at station
// `anchor.x` (base angle 0). Polygons use their lowest vertex.
ShapeSpec place_object(const SceneFile& file, ShapeSpec shape);

SceneFile parse_scene(std::string_view json_text);
SceneFile load_scene(const std::filesystem::path& path);
std::string dump_scene(const SceneFile& scene);

// Command-line wire list: "3:20mm,4:-5mm" (displacements) or "3:4N"
// (tension). Empty text gives no inputs. ParseError names the bad token.
std::vector<WireInput> parse_wire_list(std::string_view text);

// Object description alone, same schema as the "object" field.
ShapeSpec parse_shape(std::string_view json_text);
std::string dump_shape(const ShapeSpec& shape);

}  // namespace tailsim
