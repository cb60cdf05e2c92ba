#include "csmc/nk_block.hpp"

#include <cmath>
#include <string>

#include "csmc/error.hpp"

namespace csmc {

void NKParams::validate() const {
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("nk.beta must lie in (0,1)");
  if (!(phi_pi > 1.0)) throw ConfigError("nk.phi_pi must exceed 1 (Taylor principle)");
  if (!(kappa > 0.0)) throw ConfigError("nk.kappa must be positive");
  if (!(sigma_inv > 0.0)) throw ConfigError("nk.sigma_inv must be positive");
  if (!(phi_y >= 0.0)) throw ConfigError("nk.phi_y must be non-negative");
  for (double r : {rho_s, rho_r}) {
    if (!(r >= 0.0 && r < 1.0)) throw ConfigError("nk persistences must lie in [0,1)");
  }
  for (double s : {sigma_s, sigma_r, sigma_m}) {
    if (!(s >= 0.0)) throw ConfigError("nk shock s.d. must be non-negative");
  }
}

Eigen::Vector3d nk_residuals(const NKParams& p, const Eigen::Vector3d& x,
                             const Eigen::Vector3d& expected_next, double eps_s, double r_n,
                             double eps_m) {
  const double y = x(0), pi = x(1), i = x(2);
  const double ey = expected_next(0), epi = expected_next(1);
  Eigen::Vector3d r;
  r(0) = pi - (p.beta * epi + p.kappa * y + eps_s);
  r(1) = y - (ey - p.sigma_inv * (i - epi - r_n));
  r(2) = i - (p.phi_pi * pi + p.phi_y * y + eps_m);
  return r;
}

namespace {

// Response of (y, pi, i) to a shock following s' = rho s, entering the
// Phillips curve (col 0), the IS curve (col 1) or the Taylor rule (col 2).
// Guess x = c s, so E x' = rho c s, and solve the linear system for c.
Eigen::Vector3d solve_column(const NKParams& p, double rho, int channel) {
  Eigen::Matrix3d A;
  // Phillips: pi - beta rho pi - kappa y = s
  A.row(0) << -p.kappa, 1.0 - p.beta * rho, 0.0;
  // IS: y - rho y + sigma_inv (i - rho pi) = sigma_inv r
  A.row(1) << 1.0 - rho, -p.sigma_inv * rho, p.sigma_inv;
  // Taylor: i - phi_pi pi - phi_y y = m
  A.row(2) << -p.phi_y, -p.phi_pi, 1.0;
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  b(channel) = channel == 1 ? p.sigma_inv : 1.0;
  Eigen::FullPivLU<Eigen::Matrix3d> lu(A);
  if (!lu.isInvertible()) {
    throw SolverError("MSV coefficient system is singular for persistence " + std::to_string(rho));
  }
  return lu.solve(b);
}

}  // namespace

NKSolution solve_msv(const NKParams& params) {
  // Determinacy is checked first so that a passive policy rule surfaces as a
  // solver failure naming the condition rather than a generic range error.
  const double determinacy =
      params.kappa * (params.phi_pi - 1.0) + (1.0 - params.beta) * params.phi_y;
  if (!(determinacy > 0.0)) {
    throw SolverError(
        "indeterminate equilibrium: kappa*(phi_pi-1) + (1-beta)*phi_y must be positive");
  }
  params.validate();

  NKSolution sol;
  sol.params = params;
  sol.omega.col(0) = solve_column(params, params.rho_s, 0);
  sol.omega.col(1) = solve_column(params, params.rho_r, 1);
  sol.omega.col(2) = solve_column(params, 0.0, 2);

  const double rhos[3] = {params.rho_s, params.rho_r, 0.0};
  for (int k = 0; k < 3; ++k) {
    Eigen::Vector3d shock = Eigen::Vector3d::Zero();
    shock(k) = 1.0;
    const Eigen::Vector3d x = sol.omega.col(k);
    const Eigen::Vector3d r =
        nk_residuals(params, x, rhos[k] * x, shock(0), shock(1), shock(2));
    if (!(r.cwiseAbs().maxCoeff() < 1e-10)) {
      throw SolverError("MSV residual check failed for shock " + std::to_string(k));
    }
  }

  constexpr double kWeeksPerQuarter = 13.0;
  const double sd_scale = std::sqrt(1.0 / kWeeksPerQuarter);
  sol.rho_s_w = std::pow(params.rho_s, 1.0 / kWeeksPerQuarter);
  sol.rho_r_w = std::pow(params.rho_r, 1.0 / kWeeksPerQuarter);
  sol.sd_s_w = params.sigma_s * sd_scale;
  sol.sd_r_w = params.sigma_r * sd_scale;
  sol.sd_m_w = params.sigma_m * sd_scale;

  sol.P.col(0) = sol.omega.col(0) * sol.rho_s_w;
  sol.P.col(1) = sol.omega.col(1) * sol.rho_r_w;
  sol.Q.col(0) = sol.omega.col(0) * sol.sd_s_w;
  sol.Q.col(1) = sol.omega.col(1) * sol.sd_r_w;
  sol.Q.col(2) = sol.omega.col(2) * sol.sd_m_w;
  return sol;
}

NKState step_nk(const NKState& state, const NKSolution& sol, const NKShockAdditions& add,
                const Eigen::Vector3d& eta) {
  NKState next;
  next.eps_s = sol.rho_s_w * state.eps_s + sol.sd_s_w * eta(0) + add.delta_eps_s;
  next.r_n = sol.rho_r_w * state.r_n + sol.sd_r_w * eta(1) + add.delta_r_n;
  next.eps_m = sol.sd_m_w * eta(2);
  const Eigen::Vector3d x = sol.omega.col(0) * next.eps_s + sol.omega.col(1) * next.r_n +
                            sol.omega.col(2) * next.eps_m;
  next.y = x(0);
  next.pi = x(1);
  next.i = x(2);
  return next;
}

}  // namespace csmc
