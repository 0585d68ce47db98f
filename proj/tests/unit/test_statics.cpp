#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "tailsim/errors.hpp"
#include "tailsim/statics.hpp"

using namespace tailsim;

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Relative error of the analytic gradient against central differences.
double gradient_error(const TailModel& m, const std::vector<double>& q, std::span<const WireInput> in,
                      const GraspScene* scene) {
  const auto g = energy_gradient(m, q, in, scene);
  const double h = 1e-6;
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    auto qp = q, qm = q;
    qp[j] += h;
    qm[j] -= h;
    const double fd = (total_energy(m, qp, in, scene) - total_energy(m, qm, in, scene)) / (2 * h);
    num = std::max(num, std::abs(fd - g[j]));
    den = std::max(den, std::abs(fd));
  }
  return num / std::max(den, 1e-12);
}

}  // namespace

TEST(Statics, ZeroInputsStayStraight) {
  const auto m = default_tail();
  const auto r = solve_equilibrium(m, {}, nullptr, std::vector<double>(38, 0.0));
  EXPECT_TRUE(r.converged);
  EXPECT_LT(max_abs(r.q_star), 1e-6);
  EXPECT_NEAR(r.energy, 0.0, 1e-15);
}

TEST(Statics, ZeroDisplacementIsRestState) {
  const auto m = default_tail();
  const std::vector<WireInput> in{WireInput::pull(3, 0.0), WireInput::pull(4, 0.0)};
  const auto r = solve_equilibrium(m, in, nullptr, std::vector<double>(38, 0.0));
  EXPECT_LT(max_abs(r.q_star), 1e-6);
}

TEST(Statics, GradientMatchesFiniteDifferences) {
  const auto m = default_tail();
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> angle(-0.3, 0.3);
  const std::vector<WireInput> in{WireInput::pull(3, 0.02), WireInput::pull(1, -0.004),
                                  WireInput::with_tension(2, 3.0)};
  GraspScene scene;
  scene.object = make_circle(0.09, Vec2(0.6, 0.05));
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> q(38);
    for (double& a : q) a = angle(rng);
    EXPECT_LT(gradient_error(m, q, {}, nullptr), 1e-5);
    EXPECT_LT(gradient_error(m, q, in, nullptr), 1e-5);
    EXPECT_LT(gradient_error(m, q, in, &scene), 1e-5);
  }
}

TEST(Statics, Wire3CurlsVentrally) {
  const auto m = default_tail();
  const std::vector<WireInput> in{WireInput::pull(3, 0.02)};
  const auto r = solve_equilibrium(m, in, nullptr, std::vector<double>(38, 0.0));
  ASSERT_TRUE(r.converged);
  EXPECT_GT(forward_kinematics(m, r.q_star).tip().y(), 0.0);
  EXPECT_GT(r.wire_tensions[std::find(r.wire_ids.begin(), r.wire_ids.end(), 3) - r.wire_ids.begin()], 0.0);
}

TEST(Statics, AntagonistsMirror) {
  const auto m = default_tail();
  const std::vector<double> q0(38, 0.0);
  for (auto [a, b] : {std::pair{3, 4}, std::pair{1, 5}}) {
    const std::vector<WireInput> ia{WireInput::pull(a, 0.015)};
    const std::vector<WireInput> ib{WireInput::pull(b, 0.015)};
    const auto ra = solve_equilibrium(m, ia, nullptr, q0);
    const auto rb = solve_equilibrium(m, ib, nullptr, q0);
    for (int j = 0; j < 38; ++j) EXPECT_NEAR(ra.q_star[j], -rb.q_star[j], 1e-6) << a << " joint " << j;
  }
}

TEST(Statics, MotionSignatures) {
  const auto m = default_tail();
  const std::vector<double> q0(38, 0.0);
  auto sig = [&](std::vector<WireInput> in) {
    return motion_signature(m, solve_equilibrium(m, in, nullptr, q0));
  };
  const auto w1 = sig({WireInput::pull(1, 0.005)});
  EXPECT_GT(w1[0], 0.0);
  EXPECT_LT(std::abs(w1[2]), 1e-6);
  const auto w5 = sig({WireInput::pull(5, 0.005)});
  EXPECT_LT(w5[0], 0.0);
  const auto w2 = sig({WireInput::pull(2, 0.01)});
  EXPECT_GT(w2[0], 0.0);
  EXPECT_GT(w2[1], 0.0);
  EXPECT_LT(std::abs(w2[3]), 1e-6);
  const auto w3 = sig({WireInput::pull(3, 0.01)});
  EXPECT_GT(w3[2], w3[0]);
  EXPECT_GT(w3[2], 0.0);
  const auto w4 = sig({WireInput::pull(4, 0.01)});
  EXPECT_LT(w4[2], w4[0]);
}

TEST(Statics, JointLimitsHold) {
  const auto m = default_tail();
  const std::vector<WireInput> in{WireInput::with_tension(3, 500.0)};
  const auto r = solve_equilibrium(m, in, nullptr, std::vector<double>(38, 0.0));
  for (double a : r.q_star) EXPECT_LE(std::abs(a), m.joint_angle_limit + 1e-12);
  EXPECT_FALSE(r.saturated_joints.empty());
}

TEST(Statics, BadInputs) {
  const auto m = default_tail();
  const std::vector<double> q0(38, 0.0);
  const std::vector<WireInput> unknown{WireInput::pull(9, 0.01)};
  EXPECT_THROW(solve_equilibrium(m, unknown, nullptr, q0), InvalidArgument);
  const std::vector<WireInput> negative{WireInput::with_tension(3, -1.0)};
  EXPECT_THROW(solve_equilibrium(m, negative, nullptr, q0), InvalidArgument);
  EXPECT_THROW(solve_equilibrium(m, {}, nullptr, std::vector<double>(5, 0.0)), DimensionError);
}

TEST(Statics, WarmStartReachesSameState) {
  const auto m = default_tail();
  const std::vector<WireInput> in{WireInput::pull(3, 0.02)};
  const auto cold = solve_equilibrium(m, in, nullptr, std::vector<double>(38, 0.0));
  const auto warm = solve_equilibrium(m, in, nullptr, cold.q_star);
  for (int j = 0; j < 38; ++j) EXPECT_NEAR(cold.q_star[j], warm.q_star[j], 1e-6);
}

TEST(Statics, ToyChainBeatsCoarseGrid) {
  const double L[] = {0.1, 0.1, 0.1}, K[] = {0.5, 0.4, 0.3};
  const WireConfig w[] = {{1, Side::Ventral, 3}};
  const auto m = uniform_chain(L, K, w, 0.01, std::numbers::pi / 2);
  const std::vector<WireInput> in{WireInput::with_tension(1, 5.0)};
  const auto r = solve_equilibrium(m, in, nullptr, std::vector<double>(3, 0.0));
  double best = 1e300;
  std::vector<double> q(3);
  for (int i = -45; i <= 45; ++i) {
    for (int j = -45; j <= 45; ++j) {
      for (int k = -45; k <= 45; ++k) {
        q = {deg_to_rad(2.0 * i), deg_to_rad(2.0 * j), deg_to_rad(2.0 * k)};
        best = std::min(best, total_energy(m, q, in));
      }
    }
  }
  EXPECT_LE(r.energy, best + 1e-6);
}

TEST(Statics, MobileObjectIsPushed) {
  const auto m = default_tail();
  GraspScene scene;
  scene.object = make_circle(0.05, Vec2(0.85, 0.02));
  ObjectMobility mob;
  mob.table_drag = 0.01;
  const std::vector<WireInput> in{WireInput::pull(3, 0.01)};
  const auto r = solve_equilibrium_mobile(m, in, scene, std::vector<double>(38, 0.0), mob, Vec2::Zero());
  EXPECT_GT(r.object_offset.norm(), 0.0);
}
