#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "tailsim/errors.hpp"
#include "tailsim/model.hpp"

using namespace tailsim;

TEST(Model, DefaultTailGeometry) {
  const auto m = default_tail();
  EXPECT_EQ(m.joint_count(), 38);
  EXPECT_NEAR(m.total_length(), 0.93, 1e-12);
  ASSERT_EQ(m.regions.size(), 4u);
  EXPECT_EQ(m.regions[0].vertebra_count, 6);
  EXPECT_EQ(m.regions[3].vertebra_count, 9);
  EXPECT_FALSE(validate(m).has_value());
  EXPECT_NEAR(m.joint_angle_limit, std::numbers::pi / 3, 1e-12);
}

TEST(Model, StiffnessFollowsThicknessAndTape) {
  const auto m = default_tail();
  EXPECT_NEAR(m.joint_stiffness[0], 1.0 * 0.76 * 1.5, 1e-12);
  EXPECT_NEAR(m.joint_stiffness[6], 0.51, 1e-12);
  EXPECT_NEAR(m.joint_stiffness[37], 0.30, 1e-12);
  for (int j = 1; j < m.joint_count(); ++j) EXPECT_LE(m.joint_stiffness[j], m.joint_stiffness[j - 1]);
}

TEST(Model, WireTerminations) {
  const auto m = default_tail();
  EXPECT_EQ(m.wire(1).termination_joint, 6);
  EXPECT_EQ(m.wire(5).termination_joint, 6);
  EXPECT_EQ(m.wire(2).termination_joint, 16);
  EXPECT_EQ(m.wire(3).termination_joint, 38);
  EXPECT_EQ(m.wire(4).side, Side::Dorsal);
  EXPECT_THROW(m.wire(9), InvalidArgument);
  EXPECT_FALSE(m.has_wire(9));
}

TEST(Model, WithKappaScalesStiffness) {
  const auto m = default_tail();
  const auto soft = with_kappa(m, 0.25);
  for (int j = 0; j < m.joint_count(); ++j) {
    EXPECT_NEAR(soft.joint_stiffness[j], 0.25 * m.joint_stiffness[j], 1e-12);
  }
  EXPECT_NE(model_hash(soft), model_hash(m));
  EXPECT_EQ(model_hash(default_tail()), model_hash(m));
}

TEST(Model, StraightForwardKinematics) {
  const auto m = default_tail();
  const std::vector<double> q(38, 0.0);
  const auto pose = forward_kinematics(m, q);
  ASSERT_EQ(pose.joints.size(), 39u);
  EXPECT_NEAR(pose.tip().x(), 0.93, 1e-12);
  EXPECT_NEAR(pose.tip().y(), 0.0, 1e-15);
}

TEST(Model, BendingVentralRaisesTip) {
  const auto m = default_tail();
  std::vector<double> q(38, 0.05);
  EXPECT_GT(forward_kinematics(m, q).tip().y(), 0.0);
  EXPECT_LT(wire_length(m, q, 3), wire_length(m, std::vector<double>(38, 0.0), 3));
  EXPECT_GT(wire_length(m, q, 4), wire_length(m, std::vector<double>(38, 0.0), 4));
}

TEST(Model, RouteHasOnePointPerJointPlusAnchor) {
  const auto m = default_tail();
  const auto pose = forward_kinematics(m, std::vector<double>(38, 0.0));
  EXPECT_EQ(wire_route(m, pose, 1).size(), 7u);
  EXPECT_EQ(wire_route(m, pose, 3).size(), 39u);
}

TEST(Model, ValidateCatchesBrokenModels) {
  auto m = default_tail();
  m.joint_stiffness[5] = -1.0;
  ASSERT_TRUE(validate(m).has_value());

  m = default_tail();
  m.wires[1].id = m.wires[0].id;
  auto v = validate(m);
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(v->rule, "wire ids");

  m = default_tail();
  m.regions.pop_back();
  EXPECT_TRUE(validate(m).has_value());

  m = default_tail();
  m.joint_angle_limit = 0.0;
  EXPECT_TRUE(validate(m).has_value());
}

TEST(Model, UniformChainRejectsMismatch) {
  const double L[] = {0.1, 0.1};
  const double K[] = {1.0};
  EXPECT_THROW(uniform_chain(L, K, {}, 0.01, 1.0), DimensionError);
}

TEST(Model, BuildRejectsInconsistentConfig) {
  auto c = default_config();
  c.regions[1].rubber_mm = 2.0;  // stiffer than proximal
  const auto v = validate(build_model(c));
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(v->rule, "stiffness ordering");
}
