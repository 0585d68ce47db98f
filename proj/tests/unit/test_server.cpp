#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <thread>

#include "support.hpp"
#include "tailsim/errors.hpp"
#include "tailsim/model.hpp"
#include "tailsim/protocol.hpp"
#include "tailsim/server.hpp"

using namespace tailsim;
using nlohmann::json;

namespace {

class Client {
 public:
  explicit Client(int port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) fd_ = -1;
  }
  ~Client() {
    if (fd_ >= 0) ::close(fd_);
  }
  bool ok() const { return fd_ >= 0; }

  void send_raw(const std::string& bytes) {
    ASSERT_EQ(::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL), static_cast<ssize_t>(bytes.size()));
  }
  void send(const json& j) { send_raw(protocol::encode_frame(j.dump())); }

  // Next message, or null after the timeout.
  json receive(int timeout_ms = 10000) {
    for (;;) {
      if (auto p = decoder_.next()) return json::parse(*p);
      pollfd p{fd_, POLLIN, 0};
      if (::poll(&p, 1, timeout_ms) <= 0) return nullptr;
      char buf[4096];
      const auto n = ::recv(fd_, buf, sizeof buf, 0);
      if (n <= 0) return nullptr;
      decoder_.feed(buf, static_cast<std::size_t>(n));
    }
  }

  json receive_type(const std::string& type) {
    for (;;) {
      auto m = receive();
      if (m.is_null() || m["type"] == type) return m;
    }
  }

 private:
  int fd_ = -1;
  protocol::FrameDecoder decoder_;
};

class ServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ServerOptions opt;
    opt.session.scenario_dir = test::data_path("scenarios");
    server_ = std::make_unique<Server>(default_tail(), opt);
    server_->start();
    thread_ = std::thread([this] { server_->run(); });
  }
  void TearDown() override {
    server_->stop();
    thread_.join();
  }
  std::unique_ptr<Server> server_;
  std::thread thread_;
};

}  // namespace

TEST_F(ServerTest, GreetsWithState) {
  ASSERT_GT(server_->port(), 0);
  Client c(server_->port());
  ASSERT_TRUE(c.ok());
  const auto hello = c.receive();
  ASSERT_FALSE(hello.is_null());
  EXPECT_EQ(hello["type"], "state");
  EXPECT_EQ(hello["v"], 1);
  EXPECT_EQ(hello["revision"], 0);
}

TEST_F(ServerTest, SetWiresRoundTrip) {
  Client c(server_->port());
  c.receive();
  c.send({{"v", 1}, {"type", "set_wires"}, {"tag", "w"}, {"delta_mm", {0, 0, 15, 0, 0}}});
  const auto s = c.receive_type("state");
  ASSERT_FALSE(s.is_null());
  EXPECT_EQ(s["tag"], "w");
  EXPECT_EQ(s["revision"], 1);
  EXPECT_GT(s["tip_xy_cm"][1].get<double>(), 0.0);
}

TEST_F(ServerTest, BadPayloadsGetErrors) {
  Client c(server_->port());
  c.receive();
  c.send_raw(protocol::encode_frame("{not json"));
  auto e = c.receive_type("error");
  ASSERT_FALSE(e.is_null());
  EXPECT_EQ(e["code"], "bad_request");
  c.send({{"v", 1}, {"type", "set_wires"}, {"tag", 3}, {"delta_mm", {1, 2}}});
  e = c.receive_type("error");
  EXPECT_EQ(e["tag"], 3);
  EXPECT_EQ(e["code"], "wire_count");
}

TEST_F(ServerTest, SessionsAreIndependent) {
  Client a(server_->port());
  Client b(server_->port());
  const auto ha = a.receive();
  const auto hb = b.receive();
  EXPECT_NE(ha["session"], hb["session"]);
  a.send({{"v", 1}, {"type", "set_wires"}, {"delta_mm", {0, 0, 30, 0, 0}}});
  EXPECT_EQ(a.receive_type("state")["revision"], 1);
  EXPECT_TRUE(b.receive(300).is_null());
  EXPECT_EQ(server_->session_count(), 2u);
}

TEST_F(ServerTest, ScenarioThenPull) {
  Client c(server_->port());
  c.receive();
  c.send({{"v", 1}, {"type", "load_scenario"}, {"name", "grasp_9_3cm"}});
  auto s = c.receive_type("state");
  ASSERT_FALSE(s.is_null());
  EXPECT_TRUE(s["object"].is_object());
  // The script ends released; a grasp scene leaves Wire 3 clamped.
  EXPECT_FALSE(s["wires"][2]["clamped"].get<bool>());
  c.send({{"v", 1},
          {"type", "load_scenario"},
          {"scene", json::parse(test::slurp(test::data_path("scenes/shape_sweep.json")))}});
  s = c.receive_type("state");
  ASSERT_FALSE(s.is_null());
  EXPECT_TRUE(s["wires"][2]["clamped"].get<bool>());
  c.send({{"v", 1}, {"type", "pull_test"}, {"tag", "pt"}, {"max_steps", 5}});
  const auto first = c.receive();
  ASSERT_FALSE(first.is_null());
  EXPECT_EQ(first["type"], "trace_sample");
  const auto done = c.receive_type("trace_done");
  ASSERT_FALSE(done.is_null());
  EXPECT_EQ(done["tag"], "pt");
}

TEST(ServerBind, PortInUse) {
  Server first(default_tail(), {});
  first.start();
  ServerOptions opt;
  opt.port = first.port();
  Server second(default_tail(), opt);
  EXPECT_THROW(second.start(), EnvironmentError);
}

TEST(ServerBind, StopBeforeTraffic) {
  Server s(default_tail(), {});
  s.start();
  std::thread t([&] { s.run(); });
  s.stop();
  t.join();
  EXPECT_EQ(s.session_count(), 0u);
}
