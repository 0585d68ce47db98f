#include "tailsim/server.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "tailsim/errors.hpp"

namespace tailsim {

namespace {

void send_all(int fd, const std::string& bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return;
    sent += static_cast<std::size_t>(n);
  }
}

}  // namespace

Server::Server(TailModel model, ServerOptions options)
    : model_(std::move(model)), options_(std::move(options)) {}

Server::~Server() {
  stop();
  reap(true);
  if (listen_fd_ >= 0) ::close(listen_fd_);
  for (int fd : wake_pipe_) {
    if (fd >= 0) ::close(fd);
  }
}

void Server::start() {
  if (::pipe(wake_pipe_) != 0) throw EnvironmentError("cannot create wake pipe");
  ::fcntl(wake_pipe_[1], F_SETFL, O_NONBLOCK);
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw EnvironmentError(std::string("socket: ") + std::strerror(errno));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(options_.port));
  if (::inet_pton(AF_INET, options_.host.c_str(), &addr.sin_addr) != 1) {
    throw EnvironmentError("bad listen address '" + options_.host + "'");
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    const std::string why = std::strerror(errno);
    throw EnvironmentError("cannot bind " + options_.host + ":" + std::to_string(options_.port) +
                           ": " + why);
  }
  if (::listen(listen_fd_, 16) != 0) throw EnvironmentError(std::string("listen: ") + std::strerror(errno));
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

void Server::stop() {
  stopping_.store(true);
  if (wake_pipe_[1] >= 0) {
    const char byte = 1;
    [[maybe_unused]] const auto n = ::write(wake_pipe_[1], &byte, 1);
  }
}

std::size_t Server::session_count() const {
  std::lock_guard lock(mutex_);
  std::size_t live = 0;
  for (const auto& c : connections_) live += c->done.load() ? 0 : 1;
  return live;
}

void Server::run() {
  if (listen_fd_ < 0) start();
  while (!stopping_.load()) {
    pollfd fds[2] = {{listen_fd_, POLLIN, 0}, {wake_pipe_[0], POLLIN, 0}};
    const int ready = ::poll(fds, 2, 500);
    reap(false);
    if (ready < 0 && errno != EINTR) break;
    if (ready <= 0 || !(fds[0].revents & POLLIN)) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);

    auto c = std::make_unique<Connection>();
    c->fd = fd;
    std::string id;
    {
      std::lock_guard lock(mutex_);
      id = "s" + std::to_string(next_session_++);
    }
    c->session = std::make_shared<Session>(id, model_, options_.session);
    c->token = c->session->subscribe([fd](const std::string& text) {
      send_all(fd, protocol::encode_frame(text));
    });
    c->session->announce();
    Connection* raw = c.get();
    c->reader = std::thread([this, raw] { serve(*raw); });
    std::lock_guard lock(mutex_);
    connections_.push_back(std::move(c));
  }
  reap(true);
}

void Server::serve(Connection& c) {
  protocol::FrameDecoder decoder;
  char buf[4096];
  for (;;) {
    const ssize_t n = ::recv(c.fd, buf, sizeof buf, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    decoder.feed(buf, static_cast<std::size_t>(n));
    try {
      while (auto payload = decoder.next()) c.session->post(*payload);
    } catch (const ParseError& e) {
      send_all(c.fd, protocol::encode_frame(
                         protocol::error_message(c.session->revision(), nullptr, "bad_frame", e.what())));
      break;
    }
  }
  c.done.store(true);
}

void Server::reap(bool all) {
  std::vector<std::unique_ptr<Connection>> finished;
  {
    std::lock_guard lock(mutex_);
    for (auto& c : connections_) {
      if (all) ::shutdown(c->fd, SHUT_RD);
    }
    for (auto it = connections_.begin(); it != connections_.end();) {
      if (all || (*it)->done.load()) {
        finished.push_back(std::move(*it));
        it = connections_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& c : finished) {
    if (c->reader.joinable()) c->reader.join();
    // Deliver whatever the session still owes before hanging up.
    c->session->drain();
    c->session->close();
    c->session->unsubscribe(c->token);
    ::shutdown(c->fd, SHUT_RDWR);
    ::close(c->fd);
  }
}

}  // namespace tailsim
