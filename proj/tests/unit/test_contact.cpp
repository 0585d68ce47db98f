#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "tailsim/contact.hpp"
#include "tailsim/errors.hpp"

using namespace tailsim;

TEST(Shapes, CircleDistance) {
  const auto c = make_circle(0.1, Vec2(1.0, 0.0));
  const auto d = signed_distance(c, Vec2(1.2, 0.0));
  EXPECT_NEAR(d.distance, 0.15, 1e-15);
  EXPECT_NEAR(d.normal.x(), 1.0, 1e-15);
  EXPECT_NEAR(signed_distance(c, Vec2(1.0, 0.02)).distance, -0.03, 1e-15);
}

TEST(Shapes, SquareDistance) {
  // Square of circumradius √2 rotated 45°: the axis-aligned box [-1, 1]².
  const auto s = make_polygon(4, 2.0 * std::sqrt(2.0), Vec2::Zero(), std::numbers::pi / 4);
  EXPECT_NEAR(signed_distance(s, Vec2(3.0, 0.0)).distance, 2.0, 1e-12);
  EXPECT_NEAR(signed_distance(s, Vec2(0.0, 0.5)).distance, -0.5, 1e-12);
  const auto corner = signed_distance(s, Vec2(2.0, 2.0));
  EXPECT_NEAR(corner.distance, std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(corner.normal.x(), std::sqrt(0.5), 1e-12);
  const auto edge = signed_distance(s, Vec2(0.2, -3.0));
  EXPECT_NEAR(edge.normal.y(), -1.0, 1e-12);
}

TEST(Shapes, PolygonVerticesAndSide) {
  const auto t = make_polygon(3, 0.09, Vec2::Zero());
  const auto v = t.vertices();
  ASSERT_EQ(v.size(), 3u);
  EXPECT_NEAR((v[0] - v[1]).norm(), t.side_length(), 1e-12);
  EXPECT_NEAR(v[0].x(), 0.045, 1e-15);
  EXPECT_THROW(make_polygon(2, 0.1, Vec2::Zero()), InvalidArgument);
  EXPECT_THROW(make_circle(0.0, Vec2::Zero()), InvalidArgument);
}

TEST(Shapes, WallCapsule) {
  const Segment wall{Vec2(0.0, 0.06), Vec2(1.0, 0.06), 0.01};
  EXPECT_NEAR(signed_distance(wall, Vec2(0.5, 0.0)).distance, 0.055, 1e-12);
  EXPECT_NEAR(signed_distance(wall, Vec2(0.5, 0.0)).normal.y(), -1.0, 1e-12);
  EXPECT_NEAR(signed_distance(wall, Vec2(1.1, 0.06)).distance, 0.095, 1e-12);
}

TEST(Contact, StraightTailAgainstCircle) {
  const auto m = default_tail();
  GraspScene scene;
  scene.object = make_circle(0.09, Vec2(0.7, 0.044));  // 1 mm into the tail line
  const std::vector<double> q(38, 0.0);
  const auto set = contact_forces(m, q, scene);
  ASSERT_FALSE(set.empty());
  for (const auto& c : set.contacts) {
    EXPECT_EQ(c.body, ContactBody::Object);
    EXPECT_LT(c.normal.y(), 0.0);  // points out of the object toward the tail
    EXPECT_NEAR(c.normal_force, scene.contact_stiffness * c.penetration, 1e-12);
  }
  // Sampled along each link, so the deepest sample sits at most 1 mm deep.
  EXPECT_LE(set.max_penetration(), 0.001 + 1e-12);
  EXPECT_GT(set.max_penetration(), 0.0009);
  EXPECT_NEAR(contact_energy(m, q, scene),
              [&] {
                double e = 0.0;
                for (const auto& c : set.contacts) e += 0.5 * scene.contact_stiffness * c.penetration * c.penetration;
                return e;
              }(),
              1e-15);
}

TEST(Contact, PadFrictionOnlyOnPadLinks) {
  const auto m = default_tail();
  GraspScene scene;
  scene.friction = {0.9, 0.2};
  scene.pad_joints = JointRange{30, 38};
  scene.object = make_circle(0.5, Vec2(0.6, 0.249));
  const auto set = contact_forces(m, std::vector<double>(38, 0.0), scene);
  ASSERT_FALSE(set.empty());
  for (const auto& c : set.contacts) {
    const bool pad = c.link + 1 >= 30;
    EXPECT_DOUBLE_EQ(c.friction_coefficient, pad ? 0.9 : 0.2) << c.link;
  }
}

TEST(Contact, DefaultPadIsDistal) {
  const auto m = default_tail();
  const auto r = pad_range(GraspScene{}, m);
  EXPECT_EQ(r.first, 17);
  EXPECT_EQ(r.last, 38);
}

TEST(Contact, SceneChecks) {
  const auto m = default_tail();
  GraspScene s;
  s.friction.mu_pad = 3.0;
  EXPECT_THROW(check_scene(s, m), InvalidArgument);
  s = {};
  s.contact_stiffness = 0.0;
  EXPECT_THROW(check_scene(s, m), InvalidArgument);
  s = {};
  s.pad_joints = JointRange{2, 10};
  EXPECT_THROW(check_scene(s, m), InvalidArgument);
  s = {};
  s.pad_joints = JointRange{20, 38};
  EXPECT_NO_THROW(check_scene(s, m));
}

TEST(Contact, ObstacleContacts) {
  const auto m = default_tail();
  GraspScene scene;
  scene.obstacles.push_back({Vec2(0.2, 0.004), Vec2(0.4, 0.004), 0.01});
  const auto set = contact_forces(m, std::vector<double>(38, 0.0), scene);
  ASSERT_FALSE(set.empty());
  EXPECT_EQ(set.object_contact_count(), 0);
  EXPECT_EQ(set.contacts.front().body, ContactBody::Obstacle);
}
