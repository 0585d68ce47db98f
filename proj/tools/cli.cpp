#include "cli.hpp"

#include <csignal>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "tailsim/errors.hpp"
#include "tailsim/experiments.hpp"
#include "tailsim/model_io.hpp"
#include "tailsim/records.hpp"
#include "tailsim/scenario.hpp"
#include "tailsim/scene_io.hpp"
#include "tailsim/server.hpp"
#include "tailsim/units.hpp"

namespace tailsim::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Globals {
  std::string model_path;
  bool no_timestamps = false;
  int jobs = 0;
};

std::string timestamp(const Globals& g) {
  if (g.no_timestamps) return {};
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  std::ostringstream os;
  os << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

int job_count(const Globals& g) {
  if (g.jobs > 0) return g.jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

void write_file(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw EnvironmentError("cannot write " + path.string());
  f << text;
  if (!f) throw EnvironmentError("write failed: " + path.string());
}

void require_file(const std::string& path, const char* what) {
  if (!path.empty() && !fs::is_regular_file(path)) {
    throw EnvironmentError(std::string(what) + " not found: " + path);
  }
}

struct Calibration {
  double kappa = 0.0;
  double mu_pad = 0.0;
};

Calibration load_calibration(const std::string& path) {
  const auto text = read_text_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("kappa") || !doc.contains("mu_pad") ||
      !doc["kappa"].is_number() || !doc["mu_pad"].is_number()) {
    throw ParseError(path + ": expected numeric 'kappa' and 'mu_pad'");
  }
  Calibration c{doc["kappa"].get<double>(), doc["mu_pad"].get<double>()};
  if (!(c.kappa > 0.0) || !(c.mu_pad >= 0.0)) throw ParseError(path + ": kappa must be positive");
  return c;
}

std::vector<double> parse_diameters(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    const double d = parse_length(token) * 100.0;
    if (!(d > 0.0)) throw ParseError("diameter '" + token + "' must be positive");
    out.push_back(d);
  }
  if (out.empty()) throw ParseError("--diameters: empty list");
  return out;
}

// Mirrors the session's continuation so both reach the same equilibrium.
EquilibriumResult solve_ramped(const TailModel& model, const std::vector<WireInput>& targets,
                               const GraspScene* scene, double increment) {
  std::vector<double> q(model.joint_count(), 0.0);
  double largest = 0.0;
  for (const auto& w : targets) {
    if (w.mode == WireMode::Displacement) largest = std::max(largest, std::abs(w.displacement));
  }
  const int steps = std::max(1, static_cast<int>(std::ceil(largest / increment - 1e-9)));
  EquilibriumResult result;
  for (int s = 1; s <= steps; ++s) {
    std::vector<WireInput> staged;
    for (const auto& w : targets) {
      if (w.mode == WireMode::Tension) {
        staged.push_back(w);
        continue;
      }
      if (w.displacement == 0.0) continue;
      const double d = s == steps ? w.displacement : w.displacement * s / steps;
      staged.push_back(WireInput::pull(w.wire_id, d));
    }
    result = solve_equilibrium(model, staged, scene, q);
    q = result.q_star;
  }
  return result;
}

// Exit code for a library exception, with the message printed.
int report(const std::exception& e, std::ostream& err) {
  err << "error: " << e.what() << '\n';
  if (dynamic_cast<const EnvironmentError*>(&e)) return kEnvironment;
  if (dynamic_cast<const NonConvergence*>(&e) || dynamic_cast<const NoContact*>(&e) ||
      dynamic_cast<const EmptyGrasp*>(&e)) {
    return kNonConvergence;
  }
  if (dynamic_cast<const Error*>(&e)) return kUsage;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kEnvironment;
  return 1;
}

Server* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Planar statics and grasp simulator for a wire-driven prehensile tail", "tailsim"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--model", g.model_path, "Tail model JSON (default: $TAILSIM_MODEL or built-in)");
  app.add_flag("--no-timestamps", g.no_timestamps, "Omit timestamps from output metadata");
  app.add_option("--jobs", g.jobs, "Worker threads for sweeps (default: hardware threads)")
      ->check(CLI::PositiveNumber);

  std::string wires, scene_path, out_dir = ".";
  bool pull = false;
  auto* simulate = app.add_subcommand("simulate", "Solve one equilibrium");
  simulate->add_option("--wires", wires, "Wire inputs, e.g. \"3:20mm,4:-5mm\" or \"3:4N\"");
  simulate->add_option("--scene", scene_path, "Scene JSON");
  simulate->add_option("--out", out_dir, "Output directory");
  simulate->add_flag("--pull", pull, "Grasp the scene object and run a pull-out test");

  std::string kind, calibration_path, diameters;
  auto* sweep = app.add_subcommand("sweep", "Pull-out force sweep");
  sweep->add_option("--kind", kind, "diameter | shape")->required();
  sweep->add_option("--calibration", calibration_path, "calibration.json to apply");
  sweep->add_option("--diameters", diameters, "Comma list with units, e.g. \"4.9cm,7cm\"");
  sweep->add_option("--scene", scene_path, "Scene template JSON");
  sweep->add_option("--out", out_dir, "Output directory");

  std::string targets_path;
  int max_iters = CalibrationOptions{}.max_iterations;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Fit kappa and pad friction to pull-out targets");
  calibrate_cmd->add_option("--targets", targets_path, "Targets JSON {\"targets\":[{d_cm,F_N}]}");
  calibrate_cmd->add_option("--max-iters", max_iters, "Refinement iterations (1 = coarse grid)")
      ->check(CLI::PositiveNumber);
  calibrate_cmd->add_option("--scene", scene_path, "Scene template JSON");
  calibrate_cmd->add_option("--out", out_dir, "Output directory");

  std::string script_path;
  auto* scenario = app.add_subcommand("scenario", "Replay a keyframe script");
  scenario->add_option("--script", script_path, "Scenario JSON")->required();
  scenario->add_option("--out", out_dir, "Output directory");

  std::string host = "127.0.0.1", scenario_dir;
  int port = 8765;
  auto* serve = app.add_subcommand("serve", "Run the session server");
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--port", port, "TCP port (0 picks one)")->check(CLI::Range(0, 65535));
  serve->add_option("--scenario-dir", scenario_dir, "Directory for load_scenario names");

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    require_file(g.model_path, "model file");
    require_file(scene_path, "scene file");
    require_file(calibration_path, "calibration file");
    require_file(targets_path, "targets file");
    require_file(script_path, "scenario script");
    TailModel model = resolve_model(g.model_path);
    const fs::path out_path(out_dir);

    if (*simulate) {
      const auto inputs = parse_wire_list(wires);
      std::optional<SceneFile> file;
      if (!scene_path.empty()) {
        file = load_scene(scene_path);
        check_scene(file->scene, model);
        if (file->scene.object) file->scene.object = place_object(*file, *file->scene.object);
      }
      if (pull) {
        if (!file || !file->scene.object) throw InvalidArgument("--pull needs a scene with an object");
        const auto grasp_wires = inputs.empty() ? file->grasp_wires : inputs;
        GraspOptions go;
        go.tension_limit = file->grasp_tension_limit;
        const std::vector<double> q0(model.joint_count(), 0.0);
        const auto grasp = solve_grasp(model, grasp_wires, file->scene, q0, go);
        const auto trace = pull_out_force(model, grasp.clamped_inputs, file->scene,
                                          grasp.equilibrium.q_star, file->direction, file->pull);
        write_file(out_path / "equilibrium.json",
                   equilibrium_json(model, grasp.equilibrium, &grasp.contacts));
        write_file(out_path / "configuration.csv", configuration_csv(model, grasp.equilibrium.q_star));
        write_file(out_path / "pull_trace.csv", pull_trace_csv(trace));
        out << "contacts " << grasp.contacts.object_contact_count() << "\n";
        out << "peak_force_N " << format_double(trace.peak_force) << "\n";
        if (!grasp.equilibrium.converged) {
          err << "error: grasp equilibrium did not converge\n";
          return kNonConvergence;
        }
        return kOk;
      }
      const GraspScene* scene = file ? &file->scene : nullptr;
      const auto result = solve_ramped(model, inputs, scene, SessionOptions{}.ramp_increment);
      ContactSet contacts;
      if (scene) contacts = contact_forces(model, result.q_star, *scene);
      write_file(out_path / "equilibrium.json", equilibrium_json(model, result, scene ? &contacts : nullptr));
      write_file(out_path / "configuration.csv", configuration_csv(model, result.q_star));
      const auto tip = forward_kinematics(model, result.q_star).tip();
      out << "energy_J " << format_double(result.energy) << "\n";
      out << "tip_xy_cm " << format_double(tip.x() * 100.0) << " " << format_double(tip.y() * 100.0)
          << "\n";
      if (!result.converged) {
        err << "error: equilibrium did not converge (gradient norm "
            << format_double(result.gradient_norm) << "); partial result written\n";
        return kNonConvergence;
      }
      return kOk;
    }

    if (*sweep) {
      if (kind != "diameter" && kind != "shape") {
        err << "error: --kind must be 'diameter' or 'shape', got '" << kind << "'\n";
        return kUsage;
      }
      SceneFile file = !scene_path.empty() ? load_scene(scene_path)
                       : kind == "diameter" ? default_sweep_scene()
                                            : default_shape_scene();
      if (!calibration_path.empty()) {
        const auto c = load_calibration(calibration_path);
        model = with_kappa(model, c.kappa);
        file.scene.friction.mu_pad = c.mu_pad;
      }
      SweepOptions options;
      options.jobs = job_count(g);
      const auto stamp = timestamp(g);
      SweepResult result;
      if (kind == "diameter") {
        const auto ds = diameters.empty()
                            ? std::vector<double>(kCupDiametersCm.begin(), kCupDiametersCm.end())
                            : parse_diameters(diameters);
        result = sweep_diameter(model, ds, file, options);
        const auto fit = fit_rows(result);
        write_file(out_path / "diameter_sweep.csv", diameter_sweep_csv(result));
        write_file(out_path / "fit.json", fit_json(fit, result, stamp));
        for (const auto& row : result.rows) {
          out << "d_cm " << format_double(row.diameter_cm) << " F_N " << format_double(row.force)
              << (row.failed ? " failed: " + row.error : std::string()) << "\n";
        }
        out << "slope " << format_double(fit.slope) << " intercept " << format_double(fit.intercept)
            << " r2 " << format_double(fit.r_squared) << "\n";
      } else {
        if (!diameters.empty()) throw InvalidArgument("--diameters applies to --kind diameter");
        result = sweep_shape(model, kShapeSides, kShapeCircumdiameterCm, file, options);
        write_file(out_path / "shape_sweep.csv", shape_sweep_csv(result));
        for (const auto& row : result.rows) {
          out << row.shape << " F_N " << format_double(row.force)
              << (row.failed ? " failed: " + row.error : std::string()) << "\n";
        }
      }
      write_file(out_path / "sweep.json", sweep_json(result, stamp));
      const bool any_failed = std::any_of(result.rows.begin(), result.rows.end(),
                                          [](const SweepRow& r) { return r.failed; });
      return any_failed ? kNonConvergence : kOk;
    }

    if (*calibrate_cmd) {
      const auto targets = targets_path.empty() ? pullout_line_targets() : parse_targets(read_text_file(targets_path));
      const SceneFile file = scene_path.empty() ? default_sweep_scene() : load_scene(scene_path);
      CalibrationOptions options;
      options.max_iterations = max_iters;
      options.sweep.jobs = job_count(g);
      const auto result = calibrate(model, targets, file, options);
      write_file(out_path / "calibration.json", calibration_json(result, timestamp(g)));
      out << "kappa " << format_double(result.kappa) << " mu_pad " << format_double(result.mu_pad)
          << " residual " << format_double(result.residual) << " max_relative_error "
          << format_double(result.max_relative_error) << (result.flagged ? " (flagged)" : "") << "\n";
      return kOk;
    }

    if (*scenario) {
      const auto script = load_scenario(script_path);
      const auto report_data = run_scenario(model, script);
      write_file(out_path / "scenario_report.json", scenario_report_json(report_data));
      out << "scenario " << report_data.name << "\n"
          << "grasped " << (report_data.grasped ? "true" : "false") << "\n"
          << "released " << (report_data.released ? "true" : "false") << "\n"
          << "retrieved " << (report_data.retrieved ? "true" : "false") << "\n"
          << "displacement_toward_base_cm " << format_double(report_data.displacement_toward_base * 100.0)
          << "\n"
          << "max_obstacle_penetration_mm "
          << format_double(report_data.max_obstacle_penetration * 1000.0) << "\n";
      return report_data.unconverged_solves > 0 ? kNonConvergence : kOk;
    }

    if (*serve) {
      ServerOptions options;
      options.host = host;
      options.port = port;
      options.session.scenario_dir = scenario_dir.empty() ? data_dir() / "scenarios" : fs::path(scenario_dir);
      Server server(model, options);
      server.start();
      out << "listening on " << host << ":" << server.port() << std::endl;
      g_server = &server;
      struct sigaction action{};
      action.sa_handler = on_signal;
      sigemptyset(&action.sa_mask);
      struct sigaction old_int{}, old_term{};
      sigaction(SIGINT, &action, &old_int);
      sigaction(SIGTERM, &action, &old_term);
      server.run();
      sigaction(SIGINT, &old_int, nullptr);
      sigaction(SIGTERM, &old_term, nullptr);
      g_server = nullptr;
      out << "server stopped" << std::endl;
      return kOk;
    }
  } catch (const std::exception& e) {
    return report(e, err);
  }
  return kUsage;
}

}  // namespace tailsim::cli
