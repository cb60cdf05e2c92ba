#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "csmc/error.hpp"
#include "csmc/nk_block.hpp"

using namespace csmc;

namespace {

// Independent oracle: iterate expectations on coefficient guesses. Given a
// guess c for the response to a shock with persistence rho, E x' = rho c;
// solve the contemporaneous (y, pi) pair by Cramer's rule and read i off the
// Taylor rule. Damped until successive guesses agree to 1e-12.
struct Coeffs {
  double y, pi, i;
};

Coeffs oracle_column(const NKParams& p, double rho, double s, double r, double m) {
  Coeffs c{0.0, 0.0, 0.0};
  for (int it = 0; it < 2000000; ++it) {
    const double ey = rho * c.y, epi = rho * c.pi;
    // y (1 + sig phi_y) + sig phi_pi pi = ey + sig epi + sig r - sig m
    // -kappa y + pi = beta epi + s
    const double a11 = 1.0 + p.sigma_inv * p.phi_y, a12 = p.sigma_inv * p.phi_pi;
    const double a21 = -p.kappa, a22 = 1.0;
    const double b1 = ey + p.sigma_inv * epi + p.sigma_inv * r - p.sigma_inv * m;
    const double b2 = p.beta * epi + s;
    const double det = a11 * a22 - a12 * a21;
    const double y = (b1 * a22 - a12 * b2) / det;
    const double pi = (a11 * b2 - a21 * b1) / det;
    const double i = p.phi_pi * pi + p.phi_y * y + m;
    const double diff = std::max({std::abs(y - c.y), std::abs(pi - c.pi), std::abs(i - c.i)});
    c = {y, pi, i};
    if (diff < 1e-12) return c;
  }
  FAIL("oracle did not converge");
  return c;
}

}  // namespace

TEST_CASE("solve_msv matches the fixed-point iteration oracle") {
  const NKParams p;
  const NKSolution sol = solve_msv(p);
  const Coeffs s = oracle_column(p, p.rho_s, 1.0, 0.0, 0.0);
  const Coeffs r = oracle_column(p, p.rho_r, 0.0, 1.0, 0.0);
  const Coeffs m = oracle_column(p, 0.0, 0.0, 0.0, 1.0);
  for (auto [col, c] : {std::pair{0, s}, std::pair{1, r}, std::pair{2, m}}) {
    CHECK(sol.omega(0, col) == Catch::Approx(c.y).margin(1e-8));
    CHECK(sol.omega(1, col) == Catch::Approx(c.pi).margin(1e-8));
    CHECK(sol.omega(2, col) == Catch::Approx(c.i).margin(1e-8));
  }
  // P and Q are the solved responses scaled by weekly persistence and s.d.
  CHECK(sol.P(0, 0) == Catch::Approx(s.y * std::pow(0.9, 1.0 / 13.0)).margin(1e-8));
  CHECK(sol.P(0, 1) == Catch::Approx(r.y * std::pow(0.8, 1.0 / 13.0)).margin(1e-8));
  CHECK(sol.Q(0, 2) == Catch::Approx(m.y * 0.0025 * std::sqrt(1.0 / 13.0)).margin(1e-8));
}

TEST_CASE("weekly persistences are 13th roots of the quarterly ones") {
  const NKSolution sol = solve_msv(NKParams{});
  CHECK(sol.rho_s_w == std::pow(0.9, 1.0 / 13.0));
  CHECK(sol.rho_r_w == std::pow(0.8, 1.0 / 13.0));
  CHECK(sol.rho_s_w == Catch::Approx(0.992).margin(5e-4));
  CHECK(sol.rho_r_w == Catch::Approx(0.983).margin(5e-4));
  CHECK(sol.sd_s_w == 0.005 * std::sqrt(1.0 / 13.0));
}

TEST_CASE("step_nk spec examples") {
  const NKSolution sol = solve_msv(NKParams{});
  const Eigen::Vector3d zero = Eigen::Vector3d::Zero();

  SECTION("zero state, zero innovations, zero additions stays at zero") {
    const NKState n = step_nk(NKState{}, sol, {}, zero);
    CHECK(n.y == 0.0);
    CHECK(n.pi == 0.0);
    CHECK(n.i == 0.0);
    CHECK(n.eps_s == 0.0);
    CHECK(n.r_n == 0.0);
  }
  SECTION("a negative natural-rate addition contracts output") {
    const NKState n = step_nk(NKState{}, sol, {0.0, -0.005}, zero);
    CHECK(n.y < 0.0);
    const Coeffs r = oracle_column(NKParams{}, 0.8, 0.0, 1.0, 0.0);
    CHECK(n.y == Catch::Approx(-0.005 * r.y).margin(1e-10));
  }
  SECTION("supply shock decays at the weekly persistence") {
    NKState s;
    s.eps_s = 0.01;
    const NKState n = step_nk(s, sol, {}, zero);
    CHECK(n.eps_s == Catch::Approx(0.01 * 0.992).margin(1e-5));
    CHECK(n.eps_s == 0.01 * std::pow(0.9, 1.0 / 13.0));
  }
}

TEST_CASE("zero shock s.d. keeps the steady state forever") {
  NKParams p;
  p.sigma_s = p.sigma_r = p.sigma_m = 0.0;
  const NKSolution sol = solve_msv(p);
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  NKState s;
  for (int t = 0; t < 156; ++t) {
    s = step_nk(s, sol, {}, Eigen::Vector3d(nd(gen), nd(gen), nd(gen)));
    REQUIRE(s.y == 0.0);
    REQUIRE(s.pi == 0.0);
    REQUIRE(s.i == 0.0);
  }
}

TEST_CASE("equilibrium residuals vanish for random states") {
  const NKParams p;
  const NKSolution sol = solve_msv(p);
  std::mt19937_64 gen(11);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    NKState s;
    s.eps_s = nd(gen);
    s.r_n = nd(gen);
    const Eigen::Vector3d eta(nd(gen), nd(gen), nd(gen));
    const NKShockAdditions add{0.01 * nd(gen), 0.01 * nd(gen)};
    const NKState n = step_nk(s, sol, add, eta);
    const Eigen::Vector3d x(n.y, n.pi, n.i);
    // Expectations implied by the policy functions and the AR(1) structure.
    const Eigen::Vector3d expected =
        sol.omega.col(0) * p.rho_s * n.eps_s + sol.omega.col(1) * p.rho_r * n.r_n;
    const Eigen::Vector3d r = nk_residuals(p, x, expected, n.eps_s, n.r_n, n.eps_m);
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("impulses decay geometrically without innovations") {
  const NKSolution sol = solve_msv(NKParams{});
  NKState s;
  s.eps_s = 1.0;
  s.r_n = -2.0;
  for (int t = 1; t <= 52; ++t) {
    s = step_nk(s, sol, {}, Eigen::Vector3d::Zero());
    REQUIRE(s.eps_s == Catch::Approx(std::pow(sol.rho_s_w, t)).epsilon(1e-12));
    REQUIRE(s.r_n == Catch::Approx(-2.0 * std::pow(sol.rho_r_w, t)).epsilon(1e-12));
  }
}

TEST_CASE("step_nk is linear in state and additions") {
  const NKSolution sol = solve_msv(NKParams{});
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 100; ++k) {
    NKState s;
    s.eps_s = nd(gen);
    s.r_n = nd(gen);
    const NKShockAdditions add{nd(gen), nd(gen)};
    const double a = 3.0 * nd(gen);
    NKState sa = s;
    sa.eps_s *= a;
    sa.r_n *= a;
    const NKState n1 = step_nk(s, sol, add, Eigen::Vector3d::Zero());
    const NKState n2 = step_nk(sa, sol, {a * add.delta_eps_s, a * add.delta_r_n}, Eigen::Vector3d::Zero());
    CHECK(n2.y == Catch::Approx(a * n1.y).margin(1e-10));
    CHECK(n2.pi == Catch::Approx(a * n1.pi).margin(1e-10));
    CHECK(n2.i == Catch::Approx(a * n1.i).margin(1e-10));
  }
}

TEST_CASE("indeterminacy is reported by name") {
  NKParams p;
  p.phi_pi = 0.9;
  p.phi_y = 0.0;
  try {
    solve_msv(p);
    FAIL("expected a SolverError");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("kappa*(phi_pi-1)") != std::string::npos);
  }
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("invalid NK parameters are rejected") {
  NKParams p;
  p.beta = 1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = NKParams{};
  p.rho_s = 1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = NKParams{};
  p.sigma_m = -1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
