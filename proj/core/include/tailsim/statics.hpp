#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tailsim/contact.hpp"
#include "tailsim/model.hpp"
#include "tailsim/optimizer.hpp"

namespace tailsim {

enum class WireMode { Displacement, Tension };

// δ > 0 pulls the wire, δ < 0 pushes it. Tension must be non-negative.
struct WireInput {
  int wire_id = 0;
  WireMode mode = WireMode::Displacement;
  double displacement = 0.0;  // m
  double tension = 0.0;       // N
  bool clamped = false;

  static WireInput pull(int id, double displacement, bool clamped = false) {
    return {id, WireMode::Displacement, displacement, 0.0, clamped};
  }
  static WireInput with_tension(int id, double tension) {
    return {id, WireMode::Tension, 0.0, tension, false};
  }
  friend bool operator==(const WireInput&, const WireInput&) = default;
};

struct CableParams {
  double stiffness = 1e4;    // N/m
  double push_factor = 1.0;  // stiffness multiplier while the cable is compressed
};

// Translational freedom for the object, resisted by a smoothed Coulomb drag
// against the table: F_drag·(sqrt(|u - anchor|² + ε²) - ε).
struct ObjectMobility {
  double table_drag = 0.0;  // N
  double smoothing = 1e-4;  // m
  Vec2 anchor = Vec2::Zero();
};

struct StaticsOptions {
  CableParams cable;
  MinimizeOptions solver;
};

struct EquilibriumResult {
  std::vector<double> q_star;
  double energy = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool deadline_hit = false;
  std::vector<int> saturated_joints;  // 0-based joints resting on the angle limit
  std::vector<int> wire_ids;          // same order as the two vectors below
  std::vector<double> wire_lengths;   // m
  std::vector<double> wire_tensions;  // N, negative while a cable pushes
  Vec2 object_offset = Vec2::Zero();  // only moves when the object is mobile
  std::vector<double> energy_trace;
};

// Total potential energy as an optimisation objective over the joint angles
// (plus the object translation when mobile). Keeps references to the model and
// scene, which must outlive it.
class StaticsEnergy final : public Objective {
 public:
  StaticsEnergy(const TailModel& model, std::span<const WireInput> inputs, const GraspScene* scene,
                const CableParams& cable = {}, std::optional<ObjectMobility> mobility = {});

  int dimension() const override;
  double evaluate(std::span<const double> x, std::span<double> gradient) const override;
  void model_hessian(std::span<const double> x, Eigen::MatrixXd& hessian) const override;

  double rest_length(int wire_id) const;
  double target_length(const WireInput& input) const;
  // Axial force carried by the wire at configuration x (0 for unused wires).
  double wire_tension(std::span<const double> x, int wire_id) const;

 private:
  Vec2 object_shift(std::span<const double> x) const;

  const TailModel& model_;
  std::vector<WireInput> inputs_;
  const GraspScene* scene_;
  CableParams cable_;
  std::optional<ObjectMobility> mobility_;
  std::vector<double> rest_lengths_;  // per model.wires entry
  std::vector<int> input_slot_;       // model.wires index of each input
  JointRange pad_;
};

double elastic_energy(const TailModel& model, std::span<const double> q);

double total_energy(const TailModel& model, std::span<const double> q,
                    std::span<const WireInput> inputs, const GraspScene* scene = nullptr,
                    const CableParams& cable = {});

std::vector<double> energy_gradient(const TailModel& model, std::span<const double> q,
                                    std::span<const WireInput> inputs,
                                    const GraspScene* scene = nullptr,
                                    const CableParams& cable = {});

EquilibriumResult solve_equilibrium(const TailModel& model, std::span<const WireInput> inputs,
                                    const GraspScene* scene, std::span<const double> q0,
                                    const StaticsOptions& options = {});

// Same as solve_equilibrium with the scene object free to translate; the
// object starts at `start_offset` from its scene pose.
EquilibriumResult solve_equilibrium_mobile(const TailModel& model,
                                           std::span<const WireInput> inputs,
                                           const GraspScene& scene, std::span<const double> q0,
                                           const ObjectMobility& mobility, Vec2 start_offset,
                                           const StaticsOptions& options = {});

// Mean joint angle per model region, base to tip (rad).
std::vector<double> motion_signature(const TailModel& model, const EquilibriumResult& result);

}  // namespace tailsim
