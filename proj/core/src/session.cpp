#include "tailsim/session.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "tailsim/errors.hpp"
#include "tailsim/grasp.hpp"
#include "tailsim/scenario.hpp"

namespace tailsim {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

bool safe_name(const std::string& name) {
  if (name.empty() || name.size() > 64) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '-';
  });
}

ordered_json contacts_json(const ContactSet& set) {
  ordered_json out = ordered_json::array();
  for (const auto& c : set.contacts) {
    out.push_back({{"link", c.link},
                   {"body", c.body == ContactBody::Object ? "object" : "obstacle"},
                   {"x_cm", c.point.x() * 100.0},
                   {"y_cm", c.point.y() * 100.0},
                   {"nx", c.normal.x()},
                   {"ny", c.normal.y()},
                   {"normal_force_N", c.normal_force},
                   {"mu", c.friction_coefficient}});
  }
  return out;
}

// Reads a set_wires payload into δ (m) and clamp flags; returns the error code
// and text instead when the payload is invalid.
std::optional<std::pair<std::string, std::string>> read_set_wires(const TailModel& model, const json& body,
                                                                  std::vector<double>& delta,
                                                                  std::vector<bool>& clamp) {
  using Bad = std::pair<std::string, std::string>;
  const std::size_t n = model.wires.size();
  if (!body.contains("delta_mm") || !body["delta_mm"].is_array()) {
    return Bad{"bad_request", "set_wires needs a 'delta_mm' array"};
  }
  const auto& list = body["delta_mm"];
  if (list.size() != n) return Bad{"wire_count", "expected " + std::to_string(n) + " wires"};
  delta.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!list[i].is_number()) return Bad{"bad_request", "delta_mm entries must be numbers"};
    const double mm = list[i].get<double>();
    if (!std::isfinite(mm) || std::abs(mm) > protocol::kWireLimitMm) {
      return Bad{"out_of_range", "wire " + std::to_string(model.wires[i].id) + " delta outside +/-80 mm"};
    }
    delta[i] = mm / 1000.0;
  }
  if (body.contains("clamp")) {
    const auto& c = body["clamp"];
    if (!c.is_array() || c.size() != n) return Bad{"wire_count", "clamp needs " + std::to_string(n) + " booleans"};
    clamp.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!c[i].is_boolean()) return Bad{"bad_request", "clamp entries must be booleans"};
      clamp[i] = c[i].get<bool>();
    }
  }
  return std::nullopt;
}

}  // namespace

Session::Session(std::string id, TailModel model, SessionOptions options)
    : id_(std::move(id)),
      model_(std::move(model)),
      options_(std::move(options)),
      delta_(model_.wires.size(), 0.0),
      clamped_(model_.wires.size(), false),
      solved_delta_(model_.wires.size(), 0.0),
      q_(model_.joint_count(), 0.0) {
  last_ = solve_equilibrium(model_, {}, nullptr, q_, options_.statics);
  q_ = last_.q_star;
  worker_ = std::thread([this] { run(); });
}

Session::~Session() { close(); }

int Session::subscribe(Sink sink) {
  std::lock_guard lock(mutex_);
  sinks_.emplace_back(next_token_, std::move(sink));
  return next_token_++;
}

void Session::unsubscribe(int token) {
  std::lock_guard lock(mutex_);
  std::erase_if(sinks_, [&](const auto& s) { return s.first == token; });
}

void Session::broadcast(const std::string& text) {
  std::vector<Sink> targets;
  {
    std::lock_guard lock(mutex_);
    for (const auto& s : sinks_) targets.push_back(s.second);
  }
  std::lock_guard send_lock(send_mutex_);
  for (const auto& sink : targets) sink(text);
}

void Session::post(const std::string& text) {
  protocol::ClientMessage message;
  try {
    message = protocol::parse_client_message(text);
  } catch (const ParseError& e) {
    broadcast(protocol::error_message(revision_.load(), protocol::extract_tag(text), "bad_request",
                                      e.what()));
    return;
  }
  if (message.type == protocol::MessageType::SetWires) {
    // Only valid commands may replace a queued one.
    std::vector<double> delta;
    std::vector<bool> clamp(model_.wires.size(), false);
    if (auto bad = read_set_wires(model_, message.body, delta, clamp)) {
      broadcast(protocol::error_message(revision_.load(), message.tag, bad->first, bad->second));
      return;
    }
  }
  {
    std::lock_guard lock(mutex_);
    if (closing_) return;
    if (message.type == protocol::MessageType::SetWires && !queue_.empty() &&
        queue_.back().message.type == protocol::MessageType::SetWires) {
      auto& queued = queue_.back();
      queued.superseded_tags.push_back(queued.message.tag);
      queued.message = std::move(message);
    } else {
      queue_.push_back({std::move(message), {}, false});
    }
  }
  cv_.notify_all();
}

void Session::announce() {
  std::lock_guard lock(mutex_);
  queue_.push_front({protocol::ClientMessage{}, {}, true});
  cv_.notify_all();
}

void Session::drain() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return (queue_.empty() && !busy_ && !needs_refinement_) || closing_; });
}

void Session::close() {
  {
    std::lock_guard lock(mutex_);
    closing_ = true;
  }
  cv_.notify_all();
  if (worker_.joinable() && worker_.get_id() != std::this_thread::get_id()) worker_.join();
}

bool Session::has_pending() {
  std::lock_guard lock(mutex_);
  return !queue_.empty() || closing_;
}

void Session::run() {
  for (;;) {
    Pending pending;
    {
      std::unique_lock lock(mutex_);
      cv_.wait_for(lock, std::chrono::milliseconds(needs_refinement_ ? 0 : 1000),
                   [&] { return !queue_.empty() || closing_ || needs_refinement_; });
      if (queue_.empty()) {
        if (closing_) {
          cv_.notify_all();
          return;
        }
        if (!needs_refinement_) continue;
        busy_ = true;
      } else {
        pending = std::move(queue_.front());
        queue_.pop_front();
        busy_ = true;
      }
    }
    if (pending.message.body.is_null() && !pending.announce) {
      refine_in_background();
    } else {
      try {
        handle(pending);
      } catch (const std::exception& e) {
        reject(pending, "internal", e.what());
      }
    }
    {
      std::lock_guard lock(mutex_);
      busy_ = false;
    }
    cv_.notify_all();
  }
}

void Session::handle(Pending& p) {
  if (p.announce) {
    broadcast(state_text(nullptr, {}));
    return;
  }
  switch (p.message.type) {
    case protocol::MessageType::SetWires: on_set_wires(p); break;
    case protocol::MessageType::PlaceObject: on_place_object(p); break;
    case protocol::MessageType::ClearObject: on_clear_object(p); break;
    case protocol::MessageType::PullTest: on_pull_test(p); break;
    case protocol::MessageType::LoadScenario: on_load_scenario(p); break;
  }
}

void Session::reject(const Pending& p, std::string_view code, std::string_view text) {
  broadcast(protocol::error_message(revision_.load(), p.message.tag, code, text));
}

std::vector<WireInput> Session::inputs() const {
  std::vector<WireInput> out;
  for (std::size_t i = 0; i < model_.wires.size(); ++i) {
    if (delta_[i] != 0.0 || clamped_[i]) {
      out.push_back(WireInput::pull(model_.wires[i].id, delta_[i], clamped_[i]));
    }
  }
  return out;
}

bool Session::solve(std::optional<std::chrono::steady_clock::time_point> deadline) {
  const GraspScene* scene = scene_ ? &scene_->scene : nullptr;
  double largest = 0.0;
  for (std::size_t i = 0; i < delta_.size(); ++i) {
    largest = std::max(largest, std::abs(delta_[i] - solved_delta_[i]));
  }
  const int steps =
      std::max(1, static_cast<int>(std::ceil(largest / options_.ramp_increment - 1e-9)));
  const auto from = solved_delta_;
  StaticsOptions statics = options_.statics;
  statics.solver.deadline = deadline;
  for (int s = 1; s <= steps; ++s) {
    std::vector<WireInput> staged;
    for (std::size_t i = 0; i < delta_.size(); ++i) {
      const double d = s == steps ? delta_[i] : from[i] + (delta_[i] - from[i]) * s / steps;
      if (d != 0.0 || clamped_[i] || from[i] != 0.0) {
        if (s == steps && delta_[i] == 0.0 && !clamped_[i]) continue;
        staged.push_back(WireInput::pull(model_.wires[i].id, d, clamped_[i]));
      }
      solved_delta_[i] = d;
    }
    last_ = solve_equilibrium(model_, staged, scene, q_, statics);
    q_ = last_.q_star;
    if (deadline && std::chrono::steady_clock::now() >= *deadline && s < steps) {
      needs_refinement_ = true;
      return false;
    }
  }
  needs_refinement_ = last_.deadline_hit;
  return last_.converged;
}

void Session::refine_in_background() {
  if (has_pending()) return;
  solve(std::chrono::steady_clock::now() + options_.solve_budget);
  if (!needs_refinement_) {
    ++revision_;
    broadcast(state_text(nullptr, {}));
  }
}

std::string Session::state_text(const json& tag, const std::vector<json>& superseded) {
  auto out = protocol::envelope("state", revision_.load(), tag);
  out["session"] = id_;
  std::vector<double> deg;
  for (double a : q_) deg.push_back(rad_to_deg(a));
  out["joint_angles_deg"] = deg;
  const auto pose = forward_kinematics(model_, q_);
  out["tip_xy_cm"] = {pose.tip().x() * 100.0, pose.tip().y() * 100.0};
  ordered_json wires = ordered_json::array();
  std::vector<double> lengths;
  for (std::size_t i = 0; i < model_.wires.size(); ++i) {
    const int id = model_.wires[i].id;
    const double length = wire_length(model_, pose, id);
    lengths.push_back(length * 1000.0);
    double tension = 0.0;
    for (std::size_t a = 0; a < last_.wire_ids.size(); ++a) {
      if (last_.wire_ids[a] == id) tension = last_.wire_tensions[a];
    }
    wires.push_back({{"id", id},
                     {"delta_mm", delta_[i] * 1000.0},
                     {"clamped", static_cast<bool>(clamped_[i])},
                     {"tension_N", tension}});
  }
  out["wire_lengths_mm"] = lengths;
  out["wires"] = std::move(wires);
  ContactSet contacts;
  if (scene_) contacts = contact_forces(model_, q_, scene_->scene);
  out["contacts"] = contacts_json(contacts);
  out["converged"] = last_.converged && !needs_refinement_;
  out["energy_J"] = last_.energy;
  if (scene_ && scene_->scene.object) {
    out["object"] = json::parse(dump_shape(*scene_->scene.object));
  } else {
    out["object"] = nullptr;
  }
  ordered_json walls = ordered_json::array();
  if (scene_) {
    for (const auto& w : scene_->scene.obstacles) {
      walls.push_back({{"a_cm", {w.a.x() * 100.0, w.a.y() * 100.0}},
                       {"b_cm", {w.b.x() * 100.0, w.b.y() * 100.0}},
                       {"thickness_cm", w.thickness * 100.0}});
    }
  }
  out["obstacles"] = std::move(walls);
  if (!superseded.empty()) out["superseded"] = superseded;
  return out.dump();
}

void Session::on_set_wires(Pending& p) {
  std::vector<double> next;
  std::vector<bool> clamp = clamped_;
  if (auto bad = read_set_wires(model_, p.message.body, next, clamp)) return reject(p, bad->first, bad->second);
  delta_ = next;
  clamped_ = clamp;
  solve(std::chrono::steady_clock::now() + options_.solve_budget);
  ++revision_;
  broadcast(state_text(p.message.tag, p.superseded_tags));
}

void Session::on_place_object(Pending& p) {
  const auto& body = p.message.body;
  if (!body.contains("object") && !body.contains("obstacle")) {
    return reject(p, "bad_request", "place_object needs 'object' or 'obstacle'");
  }
  SceneFile next = scene_ ? *scene_ : SceneFile{};
  try {
    if (body.contains("object")) {
      next.scene.object = parse_shape(body["object"].dump());
      if (!(next.scene.object->diameter > 0.0)) throw ParseError("object: diameter must be positive");
      next.placement = ObjectPlacement::Center;
      next.anchor = next.scene.object->pose.position;
    }
    if (body.contains("obstacle")) {
      const json doc{{"obstacles", json::array({body["obstacle"]})}};
      const auto walls = parse_scene(doc.dump()).scene.obstacles;
      next.scene.obstacles.insert(next.scene.obstacles.end(), walls.begin(), walls.end());
    }
  } catch (const Error& e) {
    return reject(p, "bad_request", e.what());
  }
  scene_ = std::move(next);
  solved_delta_ = delta_;
  solve(std::chrono::steady_clock::now() + options_.solve_budget);
  ++revision_;
  broadcast(state_text(p.message.tag, {}));
}

void Session::on_clear_object(Pending& p) {
  if (scene_) {
    scene_->scene.object.reset();
    scene_->scene.obstacles.clear();
  }
  solved_delta_ = delta_;
  solve(std::chrono::steady_clock::now() + options_.solve_budget);
  ++revision_;
  broadcast(state_text(p.message.tag, {}));
}

void Session::on_pull_test(Pending& p) {
  const auto& body = p.message.body;
  if (!scene_ || !scene_->scene.object) return reject(p, "no_object", "no object to pull");
  PullDirection direction = scene_->direction;
  PullOptions pull = scene_->pull;
  if (body.contains("direction_deg")) {
    if (!body["direction_deg"].is_number()) return reject(p, "bad_request", "direction_deg must be a number");
    direction = {PullDirectionMode::Fixed, deg_to_rad(body["direction_deg"].get<double>())};
  }
  if (body.contains("max_steps")) {
    if (!body["max_steps"].is_number_integer() || body["max_steps"].get<int>() < 1) {
      return reject(p, "bad_request", "max_steps must be a positive integer");
    }
    pull.max_steps = body["max_steps"].get<int>();
  }
  const auto commanded = inputs();
  const bool any_clamped = std::any_of(commanded.begin(), commanded.end(),
                                       [](const WireInput& w) { return w.clamped; });
  if (!any_clamped) return reject(p, "not_clamped", "clamp the commanded wire before a pull test");

  const Friction friction = scene_->scene.friction;
  const auto tag = p.message.tag;
  int index = 0;
  pull.on_step = [&](const PullStep& step) {
    auto sample = protocol::envelope("trace_sample", revision_.load(), tag);
    sample["index"] = index++;
    sample["s_mm"] = step.displacement * 1000.0;
    sample["force_N"] = gauge_force(step, friction);
    sample["contacts"] = step.contact_count;
    broadcast(sample.dump());
  };
  PullKinematics kinematics;
  try {
    kinematics = track_pull(model_, commanded, scene_->scene, q_, direction, pull);
  } catch (const EmptyGrasp& e) {
    return reject(p, "empty_grasp", e.what());
  } catch (const Error& e) {
    return reject(p, "solver", e.what());
  }
  const auto trace = score_pull(kinematics, friction);
  auto done = protocol::envelope("trace_done", revision_.load(), tag);
  done["peak_force_N"] = trace.peak_force;
  done["samples"] = trace.samples.size();
  done["direction_deg"] = rad_to_deg(std::atan2(trace.pull_direction.y(), trace.pull_direction.x()));
  done["unconverged_steps"] = trace.unconverged_steps;
  broadcast(done.dump());
}

void Session::on_load_scenario(Pending& p) {
  const auto& body = p.message.body;
  try {
    if (body.contains("scene")) {
      SceneFile file = parse_scene(body["scene"].dump());
      check_scene(file.scene, model_);
      std::fill(delta_.begin(), delta_.end(), 0.0);
      std::fill(clamped_.begin(), clamped_.end(), false);
      q_.assign(model_.joint_count(), 0.0);
      if (file.scene.object && !file.grasp_wires.empty()) {
        GraspOptions go;
        go.tension_limit = file.grasp_tension_limit;
        go.statics = options_.statics;
        const auto grasp = solve_grasp(model_, file.grasp_wires, file.scene, q_, go);
        for (const auto& w : grasp.clamped_inputs) {
          for (std::size_t i = 0; i < model_.wires.size(); ++i) {
            if (model_.wires[i].id == w.wire_id) {
              delta_[i] = w.displacement;
              clamped_[i] = true;
            }
          }
        }
        last_ = grasp.equilibrium;
        q_ = last_.q_star;
        solved_delta_ = delta_;
        needs_refinement_ = false;
      } else {
        solved_delta_.assign(delta_.size(), 0.0);
        scene_ = file;
        solve(std::nullopt);
      }
      scene_ = std::move(file);
    } else {
      ScenarioScript script;
      if (body.contains("name")) {
        if (!body["name"].is_string() || !safe_name(body["name"].get<std::string>())) {
          return reject(p, "bad_request", "scenario name must be [A-Za-z0-9_-]+");
        }
        const auto path = options_.scenario_dir / (body["name"].get<std::string>() + ".json");
        if (!std::filesystem::exists(path)) return reject(p, "not_found", "no scenario " + path.filename().string());
        script = load_scenario(path);
      } else if (body.contains("script")) {
        script = parse_scenario(body["script"].dump(), options_.scenario_dir);
      } else {
        return reject(p, "bad_request", "load_scenario needs 'name', 'script' or 'scene'");
      }
      const auto report = run_scenario(model_, script, options_.statics);
      q_ = report.final_q.empty() ? std::vector<double>(model_.joint_count(), 0.0) : report.final_q;
      std::fill(delta_.begin(), delta_.end(), 0.0);
      std::fill(clamped_.begin(), clamped_.end(), false);
      if (!report.history.empty()) {
        for (const auto& w : report.history.back().wires) {
          for (std::size_t i = 0; i < model_.wires.size(); ++i) {
            if (model_.wires[i].id == w.wire_id && w.active) {
              delta_[i] = w.displacement;
              clamped_[i] = w.clamped;
            }
          }
        }
      }
      scene_ = script.scene;
      if (scene_ && scene_->scene.object && !report.history.empty()) {
        scene_->scene.object->pose.position = report.history.back().object_position;
      }
      solved_delta_ = delta_;
      solve(std::nullopt);
    }
  } catch (const ParseError& e) {
    return reject(p, "bad_request", e.what());
  } catch (const Error& e) {
    return reject(p, "solver", e.what());
  }
  ++revision_;
  broadcast(state_text(p.message.tag, {}));
}

}  // namespace tailsim
