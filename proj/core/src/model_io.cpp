#include "tailsim/model_io.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tailsim/errors.hpp"

namespace tailsim {

using nlohmann::json;

namespace {

template <typename T>
T required(const json& obj, const char* key) {
  if (!obj.contains(key)) throw ParseError(std::string("model file: missing field '") + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file: field '") + key + "': " + e.what());
  }
}

}  // namespace

ModelConfig parse_model_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("model file: top level must be an object");

  ModelConfig config;
  config.regions.clear();
  for (const auto& r : required<json>(doc, "regions")) {
    RegionConfig rc;
    const auto name = required<std::string>(r, "name");
    const auto parsed = region_from_string(name);
    if (!parsed) throw ParseError("model file: unknown region '" + name + "'");
    rc.name = *parsed;
    rc.vertebrae = required<int>(r, "vertebrae");
    rc.length_cm = required<double>(r, "length_cm");
    rc.rubber_mm = required<double>(r, "rubber_mm");
    rc.taped = r.value("taped", false);
    config.regions.push_back(rc);
  }
  config.kappa = required<double>(doc, "kappa");
  config.tape_multiplier = required<double>(doc, "tape_multiplier");
  const auto offsets = required<json>(doc, "offsets_mm");
  for (int r = 0; r < 4; ++r) {
    const std::string key(to_string(static_cast<RegionName>(r)));
    config.offsets_mm[r] = required<double>(offsets, key.c_str());
  }
  config.angle_limit_deg = required<double>(doc, "angle_limit_deg");
  config.wires.clear();
  for (const auto& w : required<json>(doc, "wires")) {
    WireConfig wc;
    wc.id = required<int>(w, "id");
    const auto side = required<std::string>(w, "side");
    const auto parsed = side_from_string(side);
    if (!parsed) throw ParseError("model file: unknown wire side '" + side + "'");
    wc.side = *parsed;
    wc.termination_joint = required<int>(w, "termination_joint");
    config.wires.push_back(wc);
  }
  if (doc.contains("base_anchor_mm")) config.base_anchor_mm = required<double>(doc, "base_anchor_mm");
  config.base_angle_deg = doc.value("base_angle_deg", 0.0);
  return config;
}

std::string dump_model_config(const ModelConfig& config) {
  json doc;
  doc["regions"] = json::array();
  for (const auto& r : config.regions) {
    doc["regions"].push_back({{"name", std::string(to_string(r.name))},
                              {"vertebrae", r.vertebrae},
                              {"length_cm", r.length_cm},
                              {"rubber_mm", r.rubber_mm},
                              {"taped", r.taped}});
  }
  doc["kappa"] = config.kappa;
  doc["tape_multiplier"] = config.tape_multiplier;
  json offsets;
  for (int r = 0; r < 4; ++r) {
    offsets[std::string(to_string(static_cast<RegionName>(r)))] = config.offsets_mm[r];
  }
  doc["offsets_mm"] = offsets;
  doc["angle_limit_deg"] = config.angle_limit_deg;
  doc["wires"] = json::array();
  for (const auto& w : config.wires) {
    doc["wires"].push_back({{"id", w.id},
                            {"side", std::string(to_string(w.side))},
                            {"termination_joint", w.termination_joint}});
  }
  if (config.base_anchor_mm) doc["base_anchor_mm"] = *config.base_anchor_mm;
  if (config.base_angle_deg != 0.0) doc["base_angle_deg"] = config.base_angle_deg;
  return doc.dump(2) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EnvironmentError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ModelConfig load_model_config(const std::filesystem::path& path) {
  return parse_model_config(read_text_file(path));
}

TailModel load_model(const std::filesystem::path& path) {
  auto model = build_model(load_model_config(path));
  if (const auto v = validate(model)) {
    throw ParseError("model file: " + v->rule + ": " + v->detail +
                     (v->index >= 0 ? " (index " + std::to_string(v->index) + ")" : std::string()));
  }
  return model;
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("TAILSIM_DATA_DIR"); env && *env) return env;
  const std::filesystem::path built(TAILSIM_DATA_DIR);
  std::error_code ec;
  if (std::filesystem::is_directory(built, ec)) return built;
  // Installed layout: <prefix>/bin/tailsim next to <prefix>/share/tailsim.
  const auto exe = std::filesystem::read_symlink("/proc/self/exe", ec);
  if (!ec) {
    const auto installed = exe.parent_path().parent_path() / "share" / "tailsim";
    if (std::filesystem::is_directory(installed, ec)) return installed;
  }
  return built;
}

TailModel resolve_model(const std::string& explicit_path) {
  if (!explicit_path.empty()) return load_model(explicit_path);
  if (const char* env = std::getenv("TAILSIM_MODEL"); env && *env) return load_model(env);
  return default_tail();
}

}  // namespace tailsim
