#include "tailsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <thread>

#include <json.hpp>

#include "tailsim/errors.hpp"
#include "tailsim/records.hpp"

namespace tailsim {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Runs task(i) for i in [0, count) on up to `jobs` threads. Each task writes
// only its own slot, so the result does not depend on scheduling.
void parallel_for(int count, int jobs, const std::function<void(int)>& task) {
  const int workers = std::clamp(jobs, 1, std::max(1, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) task(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct Trial {
  std::optional<PullKinematics> kinematics;
  int contacts = 0;
  bool slipped = false;  // the wrap never held the object
  std::string error;
};

Trial run_trial(const TailModel& model, const SceneFile& file, const ShapeSpec& object,
                const GraspOptions& grasp_options) {
  Trial trial;
  GraspScene scene = file.scene;
  scene.object = object;
  try {
    const std::vector<double> q0(model.joint_count(), 0.0);
    GraspOptions go = grasp_options;
    if (file.grasp_tension_limit) go.tension_limit = file.grasp_tension_limit;
    const auto grasp = solve_grasp(model, file.grasp_wires, scene, q0, go);
    trial.contacts = grasp.contacts.object_contact_count();
    trial.kinematics = track_pull(model, grasp.clamped_inputs, scene, grasp.equilibrium.q_star,
                                  file.direction, file.pull);
  } catch (const NoContact& e) {
    trial.slipped = true;
    trial.error = e.what();
  } catch (const Error& e) {
    trial.error = e.what();
  }
  return trial;
}

ShapeSpec placed(const SceneFile& file, double diameter, int sides, double extra_rotation = 0.0) {
  const Pose2 pose = file.scene.object ? file.scene.object->pose : Pose2{};
  ShapeSpec s = sides == 0 ? make_circle(diameter, pose.position)
                           : make_polygon(sides, diameter, pose.position, pose.rotation + extra_rotation);
  return place_object(file, s);
}

SweepMetadata metadata_for(const TailModel& model, const SceneFile& file) {
  SweepMetadata meta;
  meta.model_hash = model_hash(model);
  meta.friction = file.scene.friction;
  meta.kappa = model.stiffness_coefficient;
  meta.pull_direction = std::string(to_string(file.direction.mode));
  if (file.direction.mode == PullDirectionMode::Fixed) {
    meta.pull_direction += ":" + format_double(rad_to_deg(file.direction.angle)) + "deg";
  }
  meta.grasp_wires = file.grasp_wires;
  return meta;
}

SweepRow row_from(const Trial& trial, const Friction& friction) {
  SweepRow row;
  row.contacts = trial.contacts;
  if (!trial.kinematics) {
    row.failed = true;
    row.error = trial.error;
    return row;
  }
  const auto trace = score_pull(*trial.kinematics, friction);
  row.force = trace.peak_force;
  row.unconverged_steps = trace.unconverged_steps;
  return row;
}

ordered_json metadata_json(const SweepMetadata& meta) {
  ordered_json wires = ordered_json::array();
  for (const auto& w : meta.grasp_wires) {
    wires.push_back({{"id", w.wire_id}, {"delta_mm", w.displacement * 1000.0}});
  }
  return {{"model_hash", meta.model_hash},
          {"kappa", meta.kappa},
          {"mu_pad", meta.friction.mu_pad},
          {"mu_plastic", meta.friction.mu_plastic},
          {"pull_direction", meta.pull_direction},
          {"grasp_wires", wires}};
}

std::string dump(const ordered_json& doc) { return doc.dump(2) + "\n"; }

}  // namespace

std::string shape_label(int sides) {
  switch (sides) {
    case 0: return "circle";
    case 3: return "triangle";
    case 4: return "square";
    case 5: return "pentagon";
    case 6: return "hexagon";
    default: return std::to_string(sides) + "-gon";
  }
}

SceneFile default_sweep_scene() {
  SceneFile file;
  file.placement = ObjectPlacement::Tangent;
  file.anchor = Vec2(0.60, 0.002);
  file.scene.object = place_object(file, make_circle(0.09, Vec2::Zero()));
  file.grasp_wires = {WireInput::pull(3, 0.250)};
  file.grasp_tension_limit = 13.0;
  file.direction = {PullDirectionMode::Fixed, std::numbers::pi};
  file.note = "object resting against the ventral side where the distal region starts; "
              "Wire 3 is pulled until it carries 13 N, then clamped; hook pulls toward -x";
  return file;
}

SceneFile default_shape_scene() {
  SceneFile file = default_sweep_scene();
  file.anchor = Vec2(0.56, 0.002);
  file.scene.object = place_object(file, *file.scene.object);
  file.orientations = 4;
  file.note = "9 cm object resting against the ventral side 5 cm before the distal region; "
              "same wire protocol as the cup sweep; polygons averaged over 4 rotations";
  return file;
}

SweepResult sweep_diameter(const TailModel& model, std::span<const double> diameters_cm,
                           const SceneFile& scene_template, const SweepOptions& options) {
  SweepResult result;
  result.metadata = metadata_for(model, scene_template);
  std::vector<double> ds(diameters_cm.begin(), diameters_cm.end());
  std::sort(ds.begin(), ds.end());
  std::vector<Trial> trials(ds.size());
  parallel_for(static_cast<int>(ds.size()), options.jobs, [&](int i) {
    trials[i] = run_trial(model, scene_template, placed(scene_template, ds[i] / 100.0, 0),
                          options.grasp);
  });
  for (std::size_t i = 0; i < ds.size(); ++i) {
    SweepRow row = row_from(trials[i], scene_template.scene.friction);
    row.shape = "circle";
    row.diameter_cm = ds[i];
    result.rows.push_back(std::move(row));
  }
  return result;
}

SweepResult sweep_shape(const TailModel& model, std::span<const int> side_counts,
                        double circumdiameter_cm, const SceneFile& scene_template,
                        const SweepOptions& options) {
  SweepResult result;
  result.metadata = metadata_for(model, scene_template);
  std::vector<int> sides(side_counts.begin(), side_counts.end());
  for (int s : sides) {
    if (s != 0 && s < 3) throw InvalidArgument("a polygon needs at least 3 sides");
  }
  // Circle last: it is the limit of many sides.
  auto key = [](int s) { return s == 0 ? std::numeric_limits<int>::max() : s; };
  std::sort(sides.begin(), sides.end(), [&](int a, int b) { return key(a) < key(b); });
  // One trial per (shape, orientation); circles need a single orientation.
  struct Job {
    std::size_t row;
    double rotation;
  };
  std::vector<Job> jobs;
  const int orientations = std::max(1, scene_template.orientations);
  for (std::size_t r = 0; r < sides.size(); ++r) {
    const int count = sides[r] == 0 ? 1 : orientations;
    const double period = sides[r] == 0 ? 0.0 : 2.0 * std::numbers::pi / sides[r];
    for (int k = 0; k < count; ++k) jobs.push_back({r, period * k / count});
  }
  std::vector<Trial> trials(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), options.jobs, [&](int i) {
    trials[i] = run_trial(model, scene_template,
                          placed(scene_template, circumdiameter_cm / 100.0, sides[jobs[i].row],
                                 jobs[i].rotation),
                          options.grasp);
  });
  for (std::size_t r = 0; r < sides.size(); ++r) {
    SweepRow row;
    row.shape = shape_label(sides[r]);
    row.sides = sides[r];
    row.diameter_cm = circumdiameter_cm;
    double sum = 0.0;
    int first = -1;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (jobs[i].row != r) continue;
      SweepRow part = row_from(trials[i], scene_template.scene.friction);
      if (first < 0) first = static_cast<int>(i);
      if (part.failed && !trials[i].slipped) {
        row.failed = true;
        row.error = part.error;
      }
      const double f = part.failed ? 0.0 : part.force;
      row.orientation_forces.push_back(f);
      sum += f;
      row.unconverged_steps += part.unconverged_steps;
    }
    row.contacts = trials[first].contacts;
    row.force = row.failed ? 0.0 : sum / static_cast<double>(row.orientation_forces.size());
    if (row.orientation_forces.size() == 1) row.orientation_forces.clear();
    result.rows.push_back(std::move(row));
  }
  return result;
}

LinearFit fit_rows(const SweepResult& result) {
  std::vector<std::pair<double, double>> points;
  for (const auto& row : result.rows) {
    if (!row.failed) points.emplace_back(row.diameter_cm, row.force);
  }
  return linear_fit(points);
}

std::vector<CalibrationTarget> pullout_line_targets() {
  std::vector<CalibrationTarget> out;
  for (double d : kCupDiametersCm) out.push_back({d, pullout_line_force(d)});
  return out;
}

std::vector<CalibrationTarget> parse_targets(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("targets: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("targets") || !doc["targets"].is_array()) {
    throw ParseError("targets: expected an object with a 'targets' array");
  }
  std::vector<CalibrationTarget> out;
  for (const auto& t : doc["targets"]) {
    if (!t.is_object() || !t.contains("d_cm") || !t.contains("F_N") || !t["d_cm"].is_number() ||
        !t["F_N"].is_number()) {
      throw ParseError("targets: each entry needs numeric 'd_cm' and 'F_N'");
    }
    CalibrationTarget target{t["d_cm"].get<double>(), t["F_N"].get<double>()};
    if (!(target.diameter_cm > 0.0)) throw ParseError("targets: diameters must be positive");
    if (!(target.force > 0.0)) {
      throw ParseError("targets: force at d = " + format_double(target.diameter_cm) +
                       " cm is not positive");
    }
    out.push_back(target);
  }
  if (out.empty()) throw ParseError("targets: list is empty");
  return out;
}

CalibrationResult calibrate(const TailModel& model, std::span<const CalibrationTarget> targets,
                            const SceneFile& scene_template, const CalibrationOptions& options) {
  if (targets.empty()) throw InvalidArgument("calibrate: no targets");
  for (const auto& t : targets) {
    if (!(t.force > 0.0)) throw InvalidArgument("calibrate: target forces must be positive");
  }
  if (!(options.kappa_min > 0.0) || options.kappa_max < options.kappa_min ||
      options.mu_max < options.mu_min || options.kappa_points < 1 || options.mu_points < 1) {
    throw InvalidArgument("calibrate: bad search box");
  }

  CalibrationResult result;
  result.targets.assign(targets.begin(), targets.end());
  result.residual = std::numeric_limits<double>::infinity();

  // Trajectories per κ; friction only enters the scoring.
  std::vector<std::pair<double, std::vector<Trial>>> solved;
  auto trials_for = [&](double kappa) -> const std::vector<Trial>& {
    for (const auto& [k, trials] : solved) {
      if (k == kappa) return trials;
    }
    const TailModel tuned = with_kappa(model, kappa);
    std::vector<Trial> trials(targets.size());
    parallel_for(static_cast<int>(targets.size()), options.sweep.jobs, [&](int i) {
      trials[i] = run_trial(tuned, scene_template,
                            placed(scene_template, targets[i].diameter_cm / 100.0, 0),
                            options.sweep.grasp);
    });
    ++result.evaluations;
    solved.emplace_back(kappa, std::move(trials));
    return solved.back().second;
  };
  auto forces = [&](const std::vector<Trial>& trials, double mu) {
    Friction friction = scene_template.scene.friction;
    friction.mu_pad = mu;
    std::vector<double> f;
    for (const auto& t : trials) f.push_back(row_from(t, friction).force);
    return f;
  };
  auto residual_of = [&](const std::vector<double>& f) {
    double r = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) r += std::pow(f[i] - targets[i].force, 2);
    return r;
  };
  auto consider = [&](double kappa, double mu) {
    const auto f = forces(trials_for(kappa), mu);
    const double r = residual_of(f);
    if (r < result.residual) {
      result.residual = r;
      result.kappa = kappa;
      result.mu_pad = mu;
      result.simulated = f;
    }
  };
  auto mu_scan = [&](double kappa, double lo, double hi, int points) {
    lo = std::max(lo, options.mu_min);
    hi = std::min(hi, options.mu_max);
    for (int j = 0; j < points; ++j) {
      const double mu = points == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * j / (points - 1);
      consider(kappa, mu);
    }
  };

  const double log_lo = std::log(options.kappa_min);
  const double log_hi = std::log(options.kappa_max);
  double log_step = options.kappa_points > 1 ? (log_hi - log_lo) / (options.kappa_points - 1) : 0.0;
  double mu_step = options.mu_points > 1 ? (options.mu_max - options.mu_min) / (options.mu_points - 1)
                                         : 0.0;
  for (int i = 0; i < options.kappa_points; ++i) {
    const double kappa = options.kappa_points == 1 ? std::exp(0.5 * (log_lo + log_hi))
                                                   : std::exp(log_lo + log_step * i);
    mu_scan(kappa, options.mu_min, options.mu_max, options.mu_points);
  }
  result.residual_history.push_back(result.residual);

  for (int it = 1; it < options.max_iterations; ++it) {
    log_step *= 0.5;
    const double center = std::log(result.kappa);
    for (double offset : {-log_step, log_step}) {
      const double lk = center + offset;
      if (lk < log_lo - 1e-12 || lk > log_hi + 1e-12) continue;
      mu_scan(std::exp(lk), options.mu_min, options.mu_max, options.mu_points);
    }
    mu_step *= 0.5;
    mu_scan(result.kappa, result.mu_pad - 2.0 * mu_step, result.mu_pad + 2.0 * mu_step, 5);
    result.residual_history.push_back(result.residual);
  }

  for (std::size_t i = 0; i < result.simulated.size(); ++i) {
    result.max_relative_error =
        std::max(result.max_relative_error,
                 std::abs(result.simulated[i] - targets[i].force) / targets[i].force);
  }
  result.flagged = result.max_relative_error > options.flag_threshold;
  return result;
}

std::string diameter_sweep_csv(const SweepResult& result) {
  std::string out = "d_cm,F_N\n";
  for (const auto& row : result.rows) {
    out += format_double(row.diameter_cm) + "," + (row.failed ? "nan" : format_double(row.force)) + "\n";
  }
  return out;
}

std::string shape_sweep_csv(const SweepResult& result) {
  std::string out = "sides,F_N\n";
  for (const auto& row : result.rows) {
    out += (row.sides == 0 ? std::string("inf") : std::to_string(row.sides)) + "," +
           (row.failed ? "nan" : format_double(row.force)) + "\n";
  }
  return out;
}

std::string sweep_json(const SweepResult& result, const std::string& timestamp) {
  ordered_json doc;
  doc["metadata"] = metadata_json(result.metadata);
  if (!timestamp.empty()) doc["metadata"]["timestamp"] = timestamp;
  ordered_json rows = ordered_json::array();
  for (const auto& row : result.rows) {
    ordered_json r{{"shape", row.shape}, {"diameter_cm", row.diameter_cm}, {"sides", row.sides}};
    if (row.failed) {
      r["F_N"] = nullptr;
      r["failed"] = true;
      r["error"] = row.error;
    } else {
      r["F_N"] = row.force;
      r["failed"] = false;
    }
    r["contacts"] = row.contacts;
    r["unconverged_steps"] = row.unconverged_steps;
    if (!row.orientation_forces.empty()) r["orientation_F_N"] = row.orientation_forces;
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  return dump(doc);
}

std::string fit_json(const LinearFit& fit, const SweepResult& result, const std::string& timestamp) {
  ordered_json doc{{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r_squared}};
  doc["metadata"] = metadata_json(result.metadata);
  if (!timestamp.empty()) doc["metadata"]["timestamp"] = timestamp;
  return dump(doc);
}

std::string calibration_json(const CalibrationResult& result, const std::string& timestamp) {
  ordered_json doc{{"kappa", result.kappa},
                   {"mu_pad", result.mu_pad},
                   {"residual", result.residual},
                   {"max_relative_error", result.max_relative_error},
                   {"flagged", result.flagged},
                   {"evaluations", result.evaluations},
                   {"residual_history", result.residual_history}};
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < result.targets.size(); ++i) {
    rows.push_back({{"d_cm", result.targets[i].diameter_cm},
                    {"F_target_N", result.targets[i].force},
                    {"F_sim_N", i < result.simulated.size() ? result.simulated[i] : 0.0}});
  }
  doc["points"] = std::move(rows);
  if (!timestamp.empty()) doc["timestamp"] = timestamp;
  return dump(doc);
}

}  // namespace tailsim
