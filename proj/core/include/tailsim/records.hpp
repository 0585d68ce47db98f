#pragma once

#include <string>
#include <vector>

#include "tailsim/contact.hpp"
#include "tailsim/grasp.hpp"
#include "tailsim/statics.hpp"

namespace tailsim {

// Shortest decimal text that reads back to the same double. "inf"/"-inf"/"nan"
// for non-finite values.
std::string format_double(double value);

// Equilibrium record as JSON text: solver diagnostics, joint angles, tip,
// wire lengths and tensions, contacts. Key order is fixed.
std::string equilibrium_json(const TailModel& model, const EquilibriumResult& result,
                             const ContactSet* contacts = nullptr);

// joint,angle_rad,angle_deg,x_m,y_m (one row per joint, plus the tip).
std::string configuration_csv(const TailModel& model, std::span<const double> q);

// s_mm,force_N
std::string pull_trace_csv(const PullOutTrace& trace);

}  // namespace tailsim
