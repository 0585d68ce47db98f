#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tailsim/protocol.hpp"
#include "tailsim/scene_io.hpp"
#include "tailsim/statics.hpp"

namespace tailsim {

struct SessionOptions {
  std::chrono::milliseconds solve_budget{100};
  double ramp_increment = 2e-3;  // m per continuation step for large δ jumps
  StaticsOptions statics;
  std::filesystem::path scenario_dir;  // where load_scenario looks up names
};

// Live tail state owned by one session. Messages are queued and handled in
// order on the session's worker thread, except that a queued set_wires is
// replaced by a newer one (last write wins). Every outgoing message goes to
// all subscribers.
class Session {
 public:
  using Sink = std::function<void(const std::string&)>;

  Session(std::string id, TailModel model, SessionOptions options = {});
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const { return id_; }

  int subscribe(Sink sink);
  void unsubscribe(int token);

  // Queues a raw client message; malformed messages are answered with an
  // error at once.
  void post(const std::string& text);

  // Sends the current state to every subscriber (no revision change).
  void announce();

  // Blocks until the queue is empty and no refinement is running.
  void drain();

  // Stops the worker after the queued messages are handled.
  void close();

  std::uint64_t revision() const { return revision_.load(); }

 private:
  struct Pending {
    protocol::ClientMessage message;
    std::vector<nlohmann::json> superseded_tags;
    bool announce = false;
  };

  void run();
  void handle(Pending& pending);
  void broadcast(const std::string& text);
  std::string state_text(const nlohmann::json& tag, const std::vector<nlohmann::json>& superseded);

  void on_set_wires(Pending& p);
  void on_place_object(Pending& p);
  void on_clear_object(Pending& p);
  void on_pull_test(Pending& p);
  void on_load_scenario(Pending& p);

  // Re-solves toward the current inputs from the current configuration.
  // Returns false when the budget ran out before convergence.
  bool solve(std::optional<std::chrono::steady_clock::time_point> deadline);
  void refine_in_background();
  bool has_pending();

  std::vector<WireInput> inputs() const;
  void reject(const Pending& p, std::string_view code, std::string_view text);

  std::string id_;
  TailModel model_;
  SessionOptions options_;

  // Owned by the worker thread.
  std::vector<double> delta_;          // m per wire, model order
  std::vector<bool> clamped_;
  std::vector<double> solved_delta_;   // inputs q_ corresponds to
  std::optional<SceneFile> scene_;
  std::vector<double> q_;
  EquilibriumResult last_;
  std::atomic<bool> needs_refinement_{false};

  std::atomic<std::uint64_t> revision_{0};

  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Pending> queue_;
  bool busy_ = false;
  bool closing_ = false;
  std::vector<std::pair<int, Sink>> sinks_;
  int next_token_ = 0;
  std::mutex send_mutex_;
  std::thread worker_;
};

}  // namespace tailsim
