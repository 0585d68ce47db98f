#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "support.hpp"

using namespace tailsim;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "tailsim");
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

double number_after(const std::string& text, const std::string& key) {
  const auto at = text.find(key + " ");
  if (at == std::string::npos) return std::nan("");
  return std::stod(text.substr(at + key.size() + 1));
}

}  // namespace

TEST(Cli, SimulateRest) {
  test::TempDir dir;
  const auto r = run({"simulate", "--wires", "", "--out", dir.path().string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(number_after(r.out, "energy_J"), 0.0);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "equilibrium.json"));
  const auto csv = test::slurp(dir.path() / "configuration.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 40);  // header, 38 joints, tip
}

TEST(Cli, SimulateBends) {
  test::TempDir dir;
  const auto r = run({"simulate", "--wires", "3:20mm", "--out", dir.path().string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto at = r.out.find("tip_xy_cm ");
  ASSERT_NE(at, std::string::npos);
  std::istringstream tip(r.out.substr(at + 10));
  double x = 0.0, y = 0.0;
  tip >> x >> y;
  EXPECT_GT(y, 0.0);
  const auto doc = nlohmann::json::parse(test::slurp(dir.path() / "equilibrium.json"));
  EXPECT_TRUE(doc.is_object());
}

TEST(Cli, BadWireTokenIsUsageError) {
  test::TempDir dir;
  const auto r = run({"simulate", "--wires", "3;20", "--out", dir.path().string()});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_NE(r.err.find("3;20"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(run({"sweep", "--kind", "hexagon"}).code, cli::kUsage);
  EXPECT_EQ(run({"scenario"}).code, cli::kUsage);
  EXPECT_EQ(run({"--help"}).code, cli::kOk);
  EXPECT_EQ(run({"--jobs", "0", "simulate"}).code, cli::kUsage);
}

TEST(Cli, BadTargetsFile) {
  test::TempDir dir;
  const auto targets = dir.path() / "t.json";
  test::spit(targets, R"({"targets": [{"d_cm": 5, "F_N": -0.2}]})");
  const auto r = run({"calibrate", "--targets", targets.string(), "--out", dir.path().string()});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_FALSE(std::filesystem::exists(dir.path() / "calibration.json"));
}

TEST(Cli, MissingFilesAreEnvironmentErrors) {
  test::TempDir dir;
  EXPECT_EQ(run({"simulate", "--scene", "/no/such.json", "--out", dir.path().string()}).code,
            cli::kEnvironment);
  EXPECT_EQ(run({"--model", "/no/model.json", "simulate"}).code, cli::kEnvironment);
  EXPECT_EQ(run({"scenario", "--script", "/no/script.json"}).code, cli::kEnvironment);
}

TEST(Cli, PortInUse) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = 0;
  ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
  ASSERT_EQ(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
  ASSERT_EQ(::listen(fd, 1), 0);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  const auto r = run({"serve", "--port", std::to_string(ntohs(addr.sin_port))});
  ::close(fd);
  EXPECT_EQ(r.code, cli::kEnvironment) << r.err;
}

TEST(Cli, ScenarioReport) {
  test::TempDir dir;
  const auto r = run({"scenario", "--script", test::data_path("scenarios/grasp_2cm.json").string(), "--out",
                      dir.path().string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("grasped true"), std::string::npos);
  const auto doc = nlohmann::json::parse(test::slurp(dir.path() / "scenario_report.json"));
  EXPECT_EQ(doc["name"], "grasp_2cm");
}

TEST(Cli, DiameterSweepIsDeterministic) {
  test::TempDir a, b;
  const auto cal = test::data_path("calibration.json").string();
  const auto ra = run({"--no-timestamps", "--jobs", "1", "sweep", "--kind", "diameter", "--calibration", cal,
                       "--diameters", "6.2cm,7cm", "--out", a.path().string()});
  const auto rb = run({"--no-timestamps", "--jobs", "2", "sweep", "--kind", "diameter", "--calibration", cal,
                       "--diameters", "6.2cm,7cm", "--out", b.path().string()});
  ASSERT_EQ(ra.code, cli::kOk) << ra.err;
  ASSERT_EQ(rb.code, cli::kOk) << rb.err;
  for (const char* f : {"diameter_sweep.csv", "fit.json", "sweep.json"}) {
    EXPECT_EQ(test::slurp(a.path() / f), test::slurp(b.path() / f)) << f;
  }
  EXPECT_GT(number_after(ra.out, "slope"), 0.0);
}

TEST(Cli, SimulatePull) {
  test::TempDir dir;
  auto model = nlohmann::json::parse(test::slurp(test::data_path("default_tail.json")));
  model["kappa"] = 0.2;
  test::spit(dir / "soft.json", model.dump());
  const auto r = run({"--model", (dir / "soft.json").string(), "simulate", "--pull", "--scene",
                      test::data_path("scenes/shape_sweep.json").string(), "--out", dir.path().string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_GE(number_after(r.out, "contacts"), 2.0);
  EXPECT_GT(number_after(r.out, "peak_force_N"), 0.0);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "pull_trace.csv"));
}
