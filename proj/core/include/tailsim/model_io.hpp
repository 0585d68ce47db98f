#pragma once

#include <filesystem>
#include <string>

#include "tailsim/model.hpp"

namespace tailsim {

// Model file schema (all fields required unless noted):
//   regions[]        {name, vertebrae, length_cm, rubber_mm, taped}
//   kappa            N·m/(rad·mm)
//   tape_multiplier  applied to taped regions
//   offsets_mm       {proximal, middle, distal_pinned, distal_tip}
//   angle_limit_deg
//   wires[]          {id, side, termination_joint}
//   base_anchor_mm   optional
//   base_angle_deg   optional, default 0
ModelConfig parse_model_config(const std::string& json_text);
ModelConfig load_model_config(const std::filesystem::path& path);
std::string dump_model_config(const ModelConfig& config);

// Throws ParseError naming the first broken invariant.
TailModel load_model(const std::filesystem::path& path);

// Directory holding the shipped data files: $TAILSIM_DATA_DIR if set, else
// the source tree location recorded at build time, else <prefix>/share/tailsim
// beside an installed binary.
std::filesystem::path data_dir();

// Model selection order: explicit path, then $TAILSIM_MODEL, then the
// built-in default_tail().
TailModel resolve_model(const std::string& explicit_path);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace tailsim
