#pragma once

#include <optional>

namespace csmc {

struct VaccineState {
  double v = 0.0;
  double u = 0.0;
  double rho = 0.15;
};

struct VaccineParams {
  double lambda_v = 0.038;
  double delta_v_jump = 0.3;
  double delta_v_drift = 0.4;
  double theta_adopt = 0.05;
  double theta_decay = 0.005;
  double theta_up = 0.005;
  double theta_down = 0.003;
  double I_thresh = 0.02;
  double rho_0 = 0.15;
  // Uptake target u_bar(I) = target_base + target_slope * I (embeds the f3 coupling).
  double target_base = 0.3;
  double target_slope = 2.0;

  bool operator==(const VaccineParams&) const = default;
  void validate() const;  // throws ConfigError
};

/// Inputs to one vaccine week that come from outside the block.
struct VaccineDrivers {
  double I = 0.0;                   // week-start infection
  double mandate_multiplier = 1.0;  // f5
  double lambda_v_eff = 0.038;      // lambda_v after f6 and f9
  bool strain_arrived = false;
  // Infection-driven part of the uptake target (f3). Unset means the
  // standard target_slope * I.
  std::optional<double> uptake_boost;
};

bool mandate_active(const VaccineParams& params, double I);

/// Probability of an innovation event this week.
double innovation_probability(double lambda_v_eff);

/// One weekly update. `innovation_uniform` is a U(0,1) draw; an innovation
/// fires when it falls below innovation_probability(lambda_v_eff).
VaccineState step_vaccine(const VaccineState& state, const VaccineParams& params,
                          const VaccineDrivers& drivers, double innovation_uniform);

}  // namespace csmc
