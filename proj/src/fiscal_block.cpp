#include "csmc/fiscal_block.hpp"

#include <algorithm>
#include <cmath>

#include "csmc/error.hpp"

namespace csmc {

FiscalParams FiscalParams::baseline() { return FiscalParams{}; }

FiscalParams FiscalParams::us_scale() {
  FiscalParams p;
  p.alpha_g = 0.06;
  p.alpha_I = 0.18;
  p.g_decay = 0.06;
  p.eta_g = 0.6;
  return p;
}

void FiscalParams::validate() const {
  for (double r : {alpha_g, tau, sigma_g, phi_up, phi_down, tau_tax, alpha_I, g_decay, eta_g,
                   zeta, kappa_rho}) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw ConfigError("fiscal parameters must be finite and non-negative");
    }
  }
  if (!(phi_up > phi_down)) throw ConfigError("fiscal.phi_up must exceed phi_down");
  if (!(phi_0 >= 0.0 && phi_0 <= 1.0)) throw ConfigError("fiscal.phi_0 must lie in [0,1]");
  if (g_decay > 1.0 || phi_up > 1.0) throw ConfigError("fiscal weekly rates must not exceed 1");
}

bool fiscal_trigger(const FiscalParams& p, double y) { return y < -p.tau; }

double effective_alpha_g(const FiscalParams& p, double rho) {
  return std::max(0.0, p.alpha_g * (1.0 - p.kappa_rho * rho));
}

double emergency_spending(const FiscalParams& p, double I, double phi) {
  return p.alpha_I * I * (1.0 - phi);
}

FiscalDrivers standard_fiscal_drivers(const FiscalParams& p, const FiscalState& s, double y,
                                      double I, double rho) {
  return {fiscal_trigger(p, y) ? 1.0 : 0.0, effective_alpha_g(p, rho),
          emergency_spending(p, I, s.phi)};
}

FiscalState step_fiscal(const FiscalState& s, const FiscalParams& p, const FiscalDrivers& drv,
                        double y, double xi) {
  const double m = std::clamp(drv.trigger, 0.0, 1.0);
  FiscalState n;
  n.g = std::max(0.0, s.g + drv.alpha_g_eff * s.phi * m - p.g_decay * s.g + p.sigma_g * xi +
                          drv.emergency);
  n.d = s.d + s.g - p.tau_tax * y;
  n.phi = std::clamp(s.phi + p.phi_up * m * (1.0 - s.phi) - p.phi_down * (1.0 - m) * s.phi, 0.0,
                     1.0);
  return n;
}

FiscalState step_fiscal(const FiscalState& s, const FiscalParams& p, double y, double I,
                        double rho, double xi) {
  return step_fiscal(s, p, standard_fiscal_drivers(p, s, y, I, rho), y, xi);
}

}  // namespace csmc
