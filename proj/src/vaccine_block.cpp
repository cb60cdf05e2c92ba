#include "csmc/vaccine_block.hpp"

#include <algorithm>
#include <cmath>

#include "csmc/error.hpp"

namespace csmc {

void VaccineParams::validate() const {
  for (double r : {lambda_v, delta_v_jump, delta_v_drift, theta_adopt, theta_decay, theta_up,
                   theta_down, I_thresh, target_base, target_slope}) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw ConfigError("vaccine parameters must be finite and non-negative");
    }
  }
  if (!(theta_up > theta_down)) throw ConfigError("vaccine.theta_up must exceed theta_down");
  if (!(rho_0 >= 0.0 && rho_0 <= 1.0)) throw ConfigError("vaccine.rho_0 must lie in [0,1]");
  if (delta_v_drift > 1.0) throw ConfigError("vaccine.delta_v_drift must not exceed 1");
}

bool mandate_active(const VaccineParams& params, double I) { return I > params.I_thresh; }

double innovation_probability(double lambda_v_eff) {
  return 1.0 - std::exp(-std::max(0.0, lambda_v_eff));
}

VaccineState step_vaccine(const VaccineState& s, const VaccineParams& p, const VaccineDrivers& d,
                          double innovation_uniform) {
  VaccineState n = s;
  const double m = mandate_active(p, d.I) ? 1.0 : 0.0;
  n.rho += p.theta_up * d.mandate_multiplier * m * (1.0 - s.rho) - p.theta_down * (1.0 - m) * s.rho;
  n.rho = std::clamp(n.rho, 0.0, 1.0);

  if (d.strain_arrived) n.v *= 1.0 - p.delta_v_drift;
  if (innovation_uniform < innovation_probability(d.lambda_v_eff)) {
    n.v = std::min(1.0, n.v + p.delta_v_jump);
  }
  n.v = std::clamp(n.v, 0.0, 1.0);

  const double target = p.target_base + d.uptake_boost.value_or(p.target_slope * d.I);
  n.u += p.theta_adopt * std::max(0.0, target - s.u) - p.theta_decay * s.u;
  n.u = std::clamp(std::min(n.u, 1.0 - n.rho), 0.0, 1.0);
  return n;
}

}  // namespace csmc
