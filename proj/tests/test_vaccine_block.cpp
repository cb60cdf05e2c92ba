#include <catch_amalgamated.hpp>

#include <random>

#include "csmc/vaccine_block.hpp"

using namespace csmc;

namespace {
constexpr double kNoInnovation = 0.999999;
}

TEST_CASE("rejection decays below the mandate threshold") {
  const VaccineParams p;
  VaccineDrivers d;
  d.I = 0.01;
  const VaccineState n = step_vaccine({0.0, 0.0, 0.15}, p, d, kNoInnovation);
  CHECK(n.rho == Catch::Approx(0.15 - 0.003 * 0.15).margin(1e-15));
  CHECK(n.rho == Catch::Approx(0.14955).margin(1e-12));
}

TEST_CASE("rejection grows under a mandate") {
  const VaccineParams p;
  VaccineDrivers d;
  d.I = 0.05;
  const VaccineState n = step_vaccine({0.0, 0.0, 0.15}, p, d, kNoInnovation);
  CHECK(n.rho == Catch::Approx(0.15425).margin(1e-12));

  d.mandate_multiplier = 1.5;
  const VaccineState m = step_vaccine({0.0, 0.0, 0.15}, p, d, kNoInnovation);
  CHECK(m.rho == Catch::Approx(0.15 + 1.5 * 0.005 * 0.85).margin(1e-12));
}

TEST_CASE("only non-rejecters can adopt") {
  const VaccineParams p;
  VaccineDrivers d;
  d.I = 0.0;
  d.uptake_boost = 5.0;  // pushes the target far above 1
  const VaccineState n = step_vaccine({0.2, 0.5, 0.6}, p, d, kNoInnovation);
  CHECK(n.rho < 0.6);
  CHECK(n.u == Catch::Approx(1.0 - n.rho).margin(1e-15));

  VaccineParams frozen = p;
  frozen.theta_down = 0.0;
  frozen.theta_up = 0.0;
  const VaccineState m = step_vaccine({0.2, 0.5, 0.6}, frozen, d, kNoInnovation);
  CHECK(m.u == Catch::Approx(0.4).margin(1e-15));
}

TEST_CASE("hysteresis ratchet: a week up then a week down raises rejection") {
  VaccineParams p;
  VaccineDrivers on, off;
  on.I = 0.05;
  off.I = 0.0;
  for (double rho = 0.10; rho <= 0.45 + 1e-12; rho += 0.01) {
    const VaccineState a = step_vaccine({0.0, 0.0, rho}, p, on, kNoInnovation);
    const VaccineState b = step_vaccine(a, p, off, kNoInnovation);
    CHECK(b.rho > rho);
  }
}

TEST_CASE("sustained mandate raises rejection monotonically") {
  const VaccineParams p;
  VaccineDrivers d;
  d.I = 0.1;
  VaccineState s{0.0, 0.0, 0.15};
  for (int w = 0; w < 520; ++w) {
    const VaccineState n = step_vaccine(s, p, d, kNoInnovation);
    REQUIRE(n.rho >= s.rho);
    REQUIRE(n.rho <= 1.0);
    s = n;
  }
}

TEST_CASE("random weeks keep every share in the unit interval and u below 1 - rho") {
  const VaccineParams p;
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100000; ++k) {
    VaccineState s{u(gen), 0.0, u(gen)};
    s.u = u(gen) * (1.0 - s.rho);
    VaccineDrivers d;
    d.I = 0.1 * u(gen);
    d.mandate_multiplier = 1.0 + 5.0 * u(gen);
    d.lambda_v_eff = 0.1 * u(gen);
    d.strain_arrived = u(gen) < 0.1;
    const VaccineState n = step_vaccine(s, p, d, u(gen));
    for (double x : {n.v, n.u, n.rho}) REQUIRE((x >= 0.0 && x <= 1.0));
    REQUIRE(n.u <= 1.0 - n.rho + 1e-15);
  }
}

TEST_CASE("innovation jumps and strain drift") {
  const VaccineParams p;
  VaccineDrivers d;
  CHECK(innovation_probability(0.038) == Catch::Approx(1.0 - std::exp(-0.038)));
  const VaccineState jump = step_vaccine({0.5, 0.0, 0.15}, p, d, 0.0);
  CHECK(jump.v == Catch::Approx(0.8));
  const VaccineState capped = step_vaccine({0.9, 0.0, 0.15}, p, d, 0.0);
  CHECK(capped.v == 1.0);
  d.strain_arrived = true;
  const VaccineState drift = step_vaccine({0.5, 0.0, 0.15}, p, d, kNoInnovation);
  CHECK(drift.v == Catch::Approx(0.3));
}

TEST_CASE("uptake chases its target and decays") {
  const VaccineParams p;
  VaccineDrivers d;
  d.I = 0.01;
  const VaccineState n = step_vaccine({0.0, 0.1, 0.15}, p, d, kNoInnovation);
  const double target = 0.3 + 2.0 * 0.01;
  CHECK(n.u == Catch::Approx(0.1 + 0.05 * (target - 0.1) - 0.005 * 0.1).margin(1e-15));
  d.uptake_boost = 0.0;
  const VaccineState m = step_vaccine({0.0, 0.1, 0.15}, p, d, kNoInnovation);
  CHECK(m.u == Catch::Approx(0.1 + 0.05 * 0.2 - 0.005 * 0.1).margin(1e-15));
}
