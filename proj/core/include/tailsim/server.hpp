#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "tailsim/session.hpp"

namespace tailsim {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  SessionOptions session;
};

// TCP front end: every connection gets its own session and receives that
// session's broadcasts as length-prefixed JSON frames.
class Server {
 public:
  Server(TailModel model, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and listens. Throws EnvironmentError if the address is unavailable.
  void start();
  int port() const { return port_; }

  // Accepts connections until stop(); then flushes every session and returns.
  void run();

  // Safe to call from any thread and from a signal handler.
  void stop();

  std::size_t session_count() const;

 private:
  struct Connection {
    int fd = -1;
    std::shared_ptr<Session> session;
    int token = -1;
    std::thread reader;
    std::atomic<bool> done{false};
  };

  void serve(Connection& c);
  void reap(bool all);

  TailModel model_;
  ServerOptions options_;
  int listen_fd_ = -1;
  int wake_pipe_[2] = {-1, -1};
  int port_ = 0;
  std::atomic<bool> stopping_{false};
  mutable std::mutex mutex_;
  std::vector<std::unique_ptr<Connection>> connections_;
  int next_session_ = 1;
};

}  // namespace tailsim
