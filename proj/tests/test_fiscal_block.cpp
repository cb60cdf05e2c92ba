#include <catch_amalgamated.hpp>

#include "csmc/error.hpp"
#include "csmc/fiscal_block.hpp"

using namespace csmc;

TEST_CASE("US-scale preset values") {
  const FiscalParams p = FiscalParams::us_scale();
  CHECK(p.alpha_I == 0.18);
  CHECK(p.g_decay == 0.06);
  CHECK(p.eta_g == 0.6);
  CHECK(p.alpha_g == 0.06);
  CHECK(FiscalParams::baseline() == FiscalParams{});
}

TEST_CASE("spending decays as programmes expire") {
  const FiscalParams p = FiscalParams::us_scale();
  const FiscalState s{0.05, 0.0, 0.05};
  const FiscalState n = step_fiscal(s, p, 0.0, 0.0, 0.0, 0.0);
  CHECK(n.g == Catch::Approx(0.047).margin(1e-15));
  const FiscalState noisy = step_fiscal(s, p, 0.0, 0.0, 0.0, 1.0);
  CHECK(noisy.g == Catch::Approx(0.047 + p.sigma_g).margin(1e-15));
}

TEST_CASE("debt accumulates spending and shrinks with tax revenue") {
  const FiscalParams p;
  const FiscalState s{0.08, 0.0, 0.05};
  const FiscalState n = step_fiscal(s, p, -0.01, 0.0, 0.0, 0.0);
  CHECK(n.d == Catch::Approx(0.083).margin(1e-15));

  const FiscalState overshoot = step_fiscal({0.0, 0.0, 0.05}, p, 0.5, 0.0, 0.0, 0.0);
  CHECK(overshoot.d < 0.0);
}

TEST_CASE("budget identity holds along a path") {
  const FiscalParams p = FiscalParams::us_scale();
  FiscalState s{0.0, 0.0, p.phi_0};
  double spent = 0.0, taxed = 0.0;
  for (int w = 0; w < 156; ++w) {
    const double y = -1.0 + 0.02 * w;
    const double I = 0.01 * (w % 7);
    spent += s.g;
    taxed += p.tau_tax * y;
    s = step_fiscal(s, p, y, I, 0.2, (w % 3) - 1.0);
  }
  CHECK(s.d == Catch::Approx(spent - taxed).margin(1e-12));
}

TEST_CASE("political ratchet") {
  const FiscalParams p;
  FiscalState s{0.0, 0.0, p.phi_0};
  for (int w = 0; w < 300; ++w) {
    const FiscalState n = step_fiscal(s, p, -1.0, 0.0, 0.0, 0.0);
    REQUIRE(n.phi >= s.phi);
    s = n;
  }
  CHECK(s.phi > 0.99);
  for (int w = 0; w < 300; ++w) {
    const FiscalState n = step_fiscal(s, p, 1.0, 0.0, 0.0, 0.0);
    REQUIRE(n.phi <= s.phi);
    s = n;
  }
  CHECK(s.phi < 0.99);
  CHECK(s.phi > 0.1);  // the way down is sixteen times slower
}

TEST_CASE("high rejection shuts the recession channel") {
  const FiscalParams p;
  CHECK(effective_alpha_g(p, 1.0 / p.kappa_rho) == 0.0);
  CHECK(effective_alpha_g(p, 0.9) == 0.0);
  CHECK(effective_alpha_g(p, 0.0) == p.alpha_g);
  const FiscalState s{0.0, 0.0, 1.0};
  const FiscalState n = step_fiscal(s, p, -1.0, 0.0, 0.9, 0.0);
  CHECK(n.g == 0.0);
  const FiscalState open = step_fiscal(s, p, -1.0, 0.0, 0.0, 0.0);
  CHECK(open.g == Catch::Approx(p.alpha_g));
}

TEST_CASE("emergency spending and trigger") {
  const FiscalParams p = FiscalParams::us_scale();
  CHECK(emergency_spending(p, 0.1, 0.25) == Catch::Approx(0.18 * 0.1 * 0.75));
  CHECK(fiscal_trigger(p, -p.tau - 1e-9));
  CHECK_FALSE(fiscal_trigger(p, -p.tau));
  const FiscalState n = step_fiscal({0.0, 0.0, 0.0}, p, 0.0, 0.1, 0.0, -100.0);
  CHECK(n.g == 0.0);  // spending is floored at zero
}

TEST_CASE("fiscal validation") {
  FiscalParams p;
  p.phi_down = 0.1;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = FiscalParams{};
  p.tau_tax = -0.1;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
