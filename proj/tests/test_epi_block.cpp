#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "csmc/epi_block.hpp"

using namespace csmc;

TEST_CASE("one Euler week reproduces hand arithmetic") {
  const SEIRParams p;
  const SEIRState s{0.99, 0.005, 0.005, 0.0, 0.0};
  const StrainParams strain{2.5, 0.0, 0.05};
  // beta_eff = 1.75 * (1 - 5 * 0.005) = 1.70625
  const double infections = 1.75 * 0.975 * 0.99 * 0.005;
  const SEIRState n = step_seir(s, strain, p, s.S);
  CHECK(n.S == Catch::Approx(0.99 - infections).margin(1e-15));
  CHECK(n.S == Catch::Approx(0.981554).margin(5e-7));
  CHECK(n.E == Catch::Approx(0.006396).margin(5e-7));
  CHECK(n.I == Catch::Approx(0.008550).margin(5e-7));
  CHECK(n.R == Catch::Approx(0.003325).margin(5e-7));
  CHECK(n.D == Catch::Approx(0.000175).margin(5e-7));
}

TEST_CASE("disease-free state only wanes") {
  const SEIRParams p;
  const SEIRState s{0.6, 0.0, 0.0, 0.3, 0.1};
  const SEIRState n = step_seir(s, StrainParams{}, p, s.S);
  CHECK(n.S == Catch::Approx(0.6 + p.omega * 0.3).margin(1e-15));
  CHECK(n.R == Catch::Approx(0.3 - p.omega * 0.3).margin(1e-15));
  CHECK(n.E == 0.0);
  CHECK(n.I == 0.0);
  CHECK(n.D == 0.1);
}

TEST_CASE("conservation, positivity and monotone deaths under random steps") {
  SEIRParams p;
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 1000000; ++k) {
    double c[5];
    double total = 0.0;
    for (double& x : c) total += (x = u(gen));
    SEIRState s{c[0] / total, c[1] / total, c[2] / total, c[3] / total, 0.0};
    s.D = 1.0 - (s.S + s.E + s.I + s.R);
    if (s.D < 0.0) continue;
    const StrainParams strain{1.5 + 4.5 * u(gen), 0.0, 0.2 * u(gen)};
    const SEIRState n = step_seir(s, strain, p, s.S * u(gen));
    worst = std::max(worst, std::abs(n.total() - 1.0));
    for (double x : {n.S, n.E, n.I, n.R, n.D}) REQUIRE((x >= 0.0 && x <= 1.0));
    REQUIRE(n.D >= s.D);
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("transmission is damped and floored at zero") {
  const SEIRParams p;
  const StrainParams strain{3.0, 0.0, 0.01};
  for (double I = 0.0; I <= 1.0; I += 0.01) {
    const double b = effective_transmission(strain, p, I);
    CHECK(b <= strain.R0 * p.gamma);
    if (I >= 1.0 / p.alpha) CHECK(b == 0.0);
  }
}

TEST_CASE("escape moves recovered back to susceptible") {
  const SEIRState s{0.3, 0.0, 0.0, 0.4, 0.3};
  const SEIRState n = apply_escape(s, 0.5);
  CHECK(n.R == Catch::Approx(0.2));
  CHECK(n.S == Catch::Approx(0.5));
  CHECK(n.total() == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("no arrival leaves strain and state untouched") {
  SEIRParams p;
  p.lambda = 0.0;
  const SEIRState s{0.5, 0.1, 0.1, 0.2, 0.1};
  CounterStream rng(1, 0, 0, Subsystem::kEpidemic);
  const StrainArrival a = maybe_strain_arrival(StrainParams{}, s, p, rng);
  CHECK_FALSE(a.arrived);
  CHECK(a.state == s);
  CHECK(a.strain == StrainParams{});
}

TEST_CASE("new strains are drawn from their ranges") {
  SEIRParams p;
  p.lambda = 1e6;
  const SEIRState s{0.5, 0.0, 0.0, 0.4, 0.1};
  for (std::uint32_t k = 0; k < 2000; ++k) {
    CounterStream rng(9, k, 0, Subsystem::kEpidemic);
    const StrainArrival a = maybe_strain_arrival(StrainParams{}, s, p, rng);
    REQUIRE(a.arrived);
    REQUIRE((a.strain.R0 >= 1.5 && a.strain.R0 <= 6.0));
    REQUIRE((a.strain.escape > 0.0 && a.strain.escape < 1.0));
    REQUIRE((a.strain.ifr > 0.0 && a.strain.ifr < 1.0));
    REQUIRE(a.state.R == Catch::Approx(0.4 * (1.0 - a.strain.escape)));
    REQUIRE(a.state.total() == Catch::Approx(1.0).margin(1e-15));
  }
}

TEST_CASE("arrival counts over three years average lambda times 156") {
  const SEIRParams p;
  const int particles = 20000;
  double sum = 0.0, sq = 0.0;
  for (int k = 0; k < particles; ++k) {
    int count = 0;
    for (int w = 0; w < 156; ++w) {
      CounterStream rng(77, static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(w),
                        Subsystem::kEpidemic);
      count += maybe_strain_arrival(StrainParams{}, SEIRState{}, p, rng).arrived;
    }
    sum += count;
    sq += count * count;
  }
  const double mean = sum / particles;
  const double se = std::sqrt((sq / particles - mean * mean) / particles);
  const double expected = 156.0 * (1.0 - std::exp(-0.025));
  CHECK(std::abs(mean - expected) < 3.0 * se);
  CHECK(mean == Catch::Approx(3.9).margin(0.1));
}
