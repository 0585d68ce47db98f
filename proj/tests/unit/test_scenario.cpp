#include <gtest/gtest.h>

#include <json.hpp>

#include "support.hpp"
#include "tailsim/errors.hpp"
#include "tailsim/model.hpp"
#include "tailsim/scenario.hpp"

using namespace tailsim;

namespace {

const char* kMinimal = R"({
  "name": "mini",
  "keyframes": [
    {"t": 0, "wire": 3, "delta_mm": 10},
    {"t": 0, "wire": 2, "delta_mm": 5},
    {"t": 1, "wire": 3, "clamp": true},
    {"t": 2, "wire": 3, "release": true}
  ]
})";

}  // namespace

TEST(Scenario, ParseKeyframes) {
  const auto s = parse_scenario(kMinimal);
  EXPECT_EQ(s.name, "mini");
  ASSERT_EQ(s.keyframes.size(), 4u);
  EXPECT_EQ(s.keyframes[1].wire_id, 2);
  EXPECT_NEAR(s.keyframes[1].displacement, 0.005, 1e-15);
  EXPECT_EQ(s.keyframes[2].action, KeyframeAction::Clamp);
  EXPECT_EQ(s.keyframes[3].action, KeyframeAction::Release);
  EXPECT_FALSE(s.scene.has_value());
  EXPECT_FALSE(s.mobility.has_value());
}

TEST(Scenario, ParseRejections) {
  EXPECT_THROW(parse_scenario(R"({"keyframes": [{"t": 0, "wire": 3}]})"), ParseError);
  EXPECT_THROW(parse_scenario(R"({"keyframes": [{"t": 0, "wire": 3, "delta_mm": 1, "clamp": true}]})"),
               ParseError);
  EXPECT_THROW(parse_scenario(R"({"keyframes": [{"t": -1, "wire": 3, "delta_mm": 1}]})"), ParseError);
  EXPECT_THROW(parse_scenario(R"({"keyframes": [{"t": 0.5, "wire": 3, "delta_mm": 1}]})"), ParseError);
  EXPECT_THROW(parse_scenario(R"({"keyframes": [{"t": 0, "wire": 3, "clamp": false}]})"), ParseError);
  EXPECT_THROW(parse_scenario(R"({"scene": {}, "scene_file": "x.json", "keyframes": []})"), ParseError);
  EXPECT_THROW(parse_scenario("[]"), ParseError);
}

TEST(Scenario, SceneFileRelativeToScript) {
  test::TempDir dir;
  test::spit(dir.path() / "s.json", R"({"object": {"kind": "circle", "diameter_cm": 3, "pose": {"x_cm": 40, "y_cm": 10}}})");
  test::spit(dir.path() / "run.json", R"({"scene_file": "s.json", "keyframes": []})");
  const auto s = load_scenario(dir.path() / "run.json");
  ASSERT_TRUE(s.scene && s.scene->scene.object);
  EXPECT_NEAR(s.scene->scene.object->diameter, 0.03, 1e-15);
}

TEST(Scenario, FreeSpaceRun) {
  const auto model = default_tail();
  std::vector<int> seen;
  ScenarioCallbacks cb;
  cb.on_keyframe = [&](const KeyframeRecord& r) { seen.push_back(r.t); };
  const auto report = run_scenario(model, parse_scenario(kMinimal), {}, cb);
  EXPECT_EQ(seen, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(report.keyframe_count, 3);
  EXPECT_EQ(report.unconverged_solves, 0);
  EXPECT_FALSE(report.grasped);
  // Wire 3 pulled ventral: tip curls to +y.
  EXPECT_GT(report.history[0].tip.y(), 0.0);
  const auto& after_release = report.history[2].wires;
  for (const auto& w : after_release) {
    if (w.wire_id == 3) {
      EXPECT_FALSE(w.active);
      EXPECT_FALSE(w.clamped);
    }
  }
}

TEST(Scenario, UnknownWire) {
  EXPECT_THROW(run_scenario(default_tail(),
                            parse_scenario(R"({"keyframes": [{"t": 0, "wire": 9, "delta_mm": 1}]})")),
               InvalidArgument);
}

TEST(Scenario, ShippedSmallObjectGraspAndRelease) {
  const auto report = run_scenario(default_tail(), load_scenario(test::data_path("scenarios/grasp_2cm.json")));
  EXPECT_TRUE(report.grasped);
  EXPECT_TRUE(report.released);
  EXPECT_EQ(report.unconverged_solves, 0);
}

TEST(Scenario, PassagewayRetrieves) {
  const auto report =
      run_scenario(default_tail(), load_scenario(test::data_path("scenarios/passageway.json")));
  EXPECT_TRUE(report.grasped);
  EXPECT_TRUE(report.retrieved);
  EXPECT_GE(report.displacement_toward_base, 0.15);
  EXPECT_LT(report.max_obstacle_penetration, 0.002);
}

TEST(Scenario, ReportJson) {
  const auto report = run_scenario(default_tail(), parse_scenario(kMinimal));
  const auto doc = nlohmann::json::parse(scenario_report_json(report));
  EXPECT_EQ(doc["name"], "mini");
  EXPECT_EQ(doc["keyframe_count"], 3);
  EXPECT_EQ(doc["history"].size(), 3u);
  EXPECT_FALSE(doc["grasped"].get<bool>());
}
