#pragma once

#include <Eigen/Dense>

namespace csmc {

/// Quarterly calibration of the three-equation New Keynesian model.
struct NKParams {
  double beta = 0.99;
  double kappa = 0.024;
  double sigma_inv = 1.0;
  double phi_pi = 1.5;
  double phi_y = 0.125;
  double rho_s = 0.9;
  double rho_r = 0.8;
  double sigma_s = 0.005;
  double sigma_r = 0.005;
  double sigma_m = 0.0025;

  bool operator==(const NKParams&) const = default;
  void validate() const;  // throws ConfigError
};

/// Variables are deviations from steady state, in percentage points.
struct NKState {
  double y = 0.0;
  double pi = 0.0;
  double i = 0.0;
  double eps_s = 0.0;
  double r_n = 0.0;
  double eps_m = 0.0;
};

/// Policy functions of the minimum-state-variable solution.
///
/// Columns of `omega` hold the response of (y, pi, i) to a unit supply shock,
/// natural-rate shock and monetary innovation. Stepping uses
///   (y, pi, i) = P (eps_s, r_n)_{t-1} + Q (eta_s, eta_r, eta_m) + Omega_{s,r} (additions)
/// with P = Omega_{s,r} diag(rho_w) and Q = Omega diag(sd_w).
struct NKSolution {
  Eigen::Matrix3d omega;
  Eigen::Matrix<double, 3, 2> P;
  Eigen::Matrix3d Q;
  double rho_s_w = 0.0;
  double rho_r_w = 0.0;
  double sd_s_w = 0.0;
  double sd_r_w = 0.0;
  double sd_m_w = 0.0;
  NKParams params;
};

/// Equilibrium residuals of the Phillips curve, IS curve and Taylor rule for
/// a given (y, pi, i) and shock vector, with expectations (Ey, Epi).
Eigen::Vector3d nk_residuals(const NKParams& p, const Eigen::Vector3d& x,
                             const Eigen::Vector3d& expected_next, double eps_s, double r_n,
                             double eps_m);

/// Solves the MSV by undetermined coefficients, one shock at a time.
/// Throws SolverError when the Taylor principle (in its general form
/// kappa (phi_pi - 1) + (1 - beta) phi_y > 0) fails.
NKSolution solve_msv(const NKParams& params);

/// Additive shock contributions from the couplings, applied to this week's
/// shock states after the AR(1) update.
struct NKShockAdditions {
  double delta_eps_s = 0.0;
  double delta_r_n = 0.0;
};

/// One weekly step. `eta` are three standard normals for (supply, natural rate, monetary).
NKState step_nk(const NKState& state, const NKSolution& sol, const NKShockAdditions& add,
                const Eigen::Vector3d& eta);

}  // namespace csmc
