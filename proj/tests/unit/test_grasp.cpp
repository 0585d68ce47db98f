#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tailsim/errors.hpp"
#include "tailsim/experiments.hpp"
#include "tailsim/grasp.hpp"

using namespace tailsim;

namespace {

// Smallest arc of the circle that holds every contact point, degrees.
double contact_span_deg(const ContactSet& set, const Vec2& center) {
  std::vector<double> a;
  for (const auto& c : set.contacts) {
    if (c.body == ContactBody::Object) a.push_back(std::atan2(c.point.y() - center.y(), c.point.x() - center.x()));
  }
  if (a.size() < 2) return 0.0;
  std::sort(a.begin(), a.end());
  double gap = a.front() + 2 * std::numbers::pi - a.back();
  for (std::size_t i = 1; i < a.size(); ++i) gap = std::max(gap, a[i] - a[i - 1]);
  return rad_to_deg(2 * std::numbers::pi - gap);
}

struct Fixture {
  TailModel model = with_kappa(default_tail(), 0.2);
  SceneFile file = default_shape_scene();
  GraspOptions options() const {
    GraspOptions o;
    o.tension_limit = file.grasp_tension_limit;
    return o;
  }
  std::vector<double> q0() const { return std::vector<double>(model.joint_count(), 0.0); }
};

}  // namespace

TEST(Grasp, NineCentimetreCircleIsWrapped) {
  Fixture f;
  const auto g = solve_grasp(f.model, f.file.grasp_wires, f.file.scene, f.q0(), f.options());
  EXPECT_LT(g.equilibrium.gradient_norm, 1e-6);
  EXPECT_GE(g.contacts.object_contact_count(), 3);
  EXPECT_GE(contact_span_deg(g.contacts, f.file.scene.object->pose.position), 120.0);
  ASSERT_EQ(g.clamped_inputs.size(), 1u);
  EXPECT_TRUE(g.clamped_inputs[0].clamped);
  EXPECT_GT(g.ramp_fraction, 0.0);
  EXPECT_LT(g.ramp_fraction, 1.0);
}

TEST(Grasp, TensionLimitIsRespected) {
  Fixture f;
  const auto g = solve_grasp(f.model, f.file.grasp_wires, f.file.scene, f.q0(), f.options());
  const auto it = std::find(g.equilibrium.wire_ids.begin(), g.equilibrium.wire_ids.end(), 3);
  ASSERT_NE(it, g.equilibrium.wire_ids.end());
  EXPECT_NEAR(g.equilibrium.wire_tensions[it - g.equilibrium.wire_ids.begin()], 13.0, 0.05);
}

TEST(Grasp, ObjectOutOfReach) {
  Fixture f;
  f.file.scene.object = make_circle(0.05, Vec2(0.5, -0.5));
  EXPECT_THROW(solve_grasp(f.model, f.file.grasp_wires, f.file.scene, f.q0(), f.options()), NoContact);
}

TEST(Grasp, BadTensionLimit) {
  Fixture f;
  GraspOptions o;
  o.tension_limit = 0.0;
  EXPECT_THROW(solve_grasp(f.model, f.file.grasp_wires, f.file.scene, f.q0(), o), InvalidArgument);
}

TEST(Grasp, PullWithoutContactIsEmpty) {
  Fixture f;
  const std::vector<WireInput> clamped{WireInput::pull(3, 0.0, true)};
  EXPECT_THROW(track_pull(f.model, clamped, f.file.scene, f.q0(), f.file.direction), EmptyGrasp);
}

TEST(Grasp, PullTraceAndRescoring) {
  Fixture f;
  const auto g = solve_grasp(f.model, f.file.grasp_wires, f.file.scene, f.q0(), f.options());
  int seen = 0;
  PullOptions po = f.file.pull;
  po.on_step = [&](const PullStep&) { ++seen; };
  const auto k = track_pull(f.model, g.clamped_inputs, f.file.scene, g.equilibrium.q_star, f.file.direction, po);
  EXPECT_EQ(seen, static_cast<int>(k.steps.size()));
  EXPECT_NEAR(k.direction.x(), -1.0, 1e-12);

  Friction high = f.file.scene.friction, low = high;
  high.mu_pad = 0.8;
  low.mu_pad = 0.05;
  const auto th = score_pull(k, high);
  const auto tl = score_pull(k, low);
  EXPECT_GT(th.peak_force, 0.0);
  EXPECT_LT(tl.peak_force, 0.2 * th.peak_force);
  for (const auto& s : th.samples) EXPECT_GE(s.force, 0.0);

  const auto direct = pull_out_force(f.model, g.clamped_inputs, f.file.scene, g.equilibrium.q_star,
                                     f.file.direction, f.file.pull);
  Friction same = f.file.scene.friction;
  EXPECT_EQ(direct.peak_force, score_pull(k, same).peak_force);
}

TEST(Grasp, GaugeForceClipsAtZero) {
  PullStep s;
  s.normal_resistance = -2.0;
  s.pad_slip_capacity = 1.0;
  s.plain_slip_capacity = 1.0;
  EXPECT_DOUBLE_EQ(gauge_force(s, {0.5, 0.3}), 0.0);
  s.normal_resistance = 0.5;
  EXPECT_DOUBLE_EQ(gauge_force(s, {0.5, 0.3}), 0.5 + 0.5 + 0.3);
}

TEST(Grasp, DirectionModes) {
  EXPECT_EQ(pull_mode_from_string("out_of_wrap"), PullDirectionMode::OutOfWrap);
  EXPECT_EQ(pull_mode_from_string("from_base"), PullDirectionMode::FromBase);
  EXPECT_EQ(pull_mode_from_string("fixed"), PullDirectionMode::Fixed);
  EXPECT_FALSE(pull_mode_from_string("sideways"));
  const auto m = default_tail();
  GraspScene scene;
  scene.object = make_circle(0.05, Vec2(0.3, 0.4));
  const auto d = resolve_pull_direction(m, std::vector<double>(38, 0.0), scene, {PullDirectionMode::FromBase, 0.0});
  EXPECT_NEAR(d.x(), 0.6, 1e-12);
  EXPECT_NEAR(d.y(), 0.8, 1e-12);
}

TEST(Grasp, SmallObjectTouchedByDistalLinks) {
  // 2 cm object in the path of the curling tip.
  const auto m = default_tail();
  GraspScene scene;
  scene.object = make_circle(0.02, Vec2(0.18, 0.44));
  const std::vector<WireInput> in{WireInput::pull(3, 0.040)};
  const auto g = solve_grasp(m, in, scene, std::vector<double>(38, 0.0));
  ASSERT_GE(g.contacts.object_contact_count(), 1);
  for (const auto& c : g.contacts.contacts) EXPECT_GE(c.link + 1, 30);  // distal tip joints 30-38
}
