#pragma once

#include <string>

namespace csmc {

struct FiscalState {
  double g = 0.0;
  double d = 0.0;
  double phi = 0.05;
};

struct FiscalParams {
  double alpha_g = 0.03;
  double tau = 0.03;
  double sigma_g = 0.001;
  double phi_up = 0.08;
  double phi_down = 0.005;
  double phi_0 = 0.05;
  double tau_tax = 0.3;
  double alpha_I = 0.05;
  double g_decay = 0.0;
  double d_star = 0.0;  // carried for completeness; enters no equation
  double eta_g = 0.5;
  double zeta = 2.0;
  double kappa_rho = 1.5;

  bool operator==(const FiscalParams&) const = default;
  static FiscalParams baseline();
  static FiscalParams us_scale();

  void validate() const;  // throws ConfigError
};

/// Coupling-derived inputs to one fiscal week.
struct FiscalDrivers {
  double trigger = 0.0;      // f7, 1 in recession
  double alpha_g_eff = 0.0;  // alpha_g after f10
  double emergency = 0.0;    // f11
};

bool fiscal_trigger(const FiscalParams& params, double y);

/// Recession-channel response after the rejection block, floored at zero.
double effective_alpha_g(const FiscalParams& params, double rho);

/// Emergency spending term alpha_I I (1 - phi).
double emergency_spending(const FiscalParams& params, double I, double phi);

/// Drivers with every fiscal coupling switched on.
FiscalDrivers standard_fiscal_drivers(const FiscalParams& params, const FiscalState& state,
                                      double y, double I, double rho);

/// One weekly update. `y` is the week-start output gap and `xi` a standard
/// normal draw for the spending shock. Debt accumulates last week's spending.
FiscalState step_fiscal(const FiscalState& state, const FiscalParams& params,
                        const FiscalDrivers& drivers, double y, double xi);

FiscalState step_fiscal(const FiscalState& state, const FiscalParams& params, double y, double I,
                        double rho, double xi);

}  // namespace csmc
