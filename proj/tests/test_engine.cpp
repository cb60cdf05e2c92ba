#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <random>

#include "csmc/engine.hpp"
#include "csmc/error.hpp"
#include "csmc/rng.hpp"

using namespace csmc;

namespace {

RunConfig small(int particles, Mode mode = Mode::kCoupled) {
  RunConfig c = default_config();
  c.particles = particles;
  c.mode = mode;
  if (mode == Mode::kUncoupled) c.factors = FactorMask::none();
  return c;
}

bool identical(const TrajectoryStore& a, const TrajectoryStore& b) {
  if (a.particles() != b.particles() || a.weeks() != b.weeks()) return false;
  for (int w = 1; w <= a.weeks(); ++w) {
    for (int j = 0; j < a.particles(); ++j) {
      for (int v = 0; v < a.num_variables(); ++v) {
        if (a.row(w, j)[v] != b.row(w, j)[v]) return false;
      }
    }
  }
  return a.weights() == b.weights();
}

}  // namespace

TEST_CASE("effective sample size") {
  const std::vector<double> uniform(10000, 1.0 / 10000);
  CHECK(ess(uniform) == Catch::Approx(10000.0).epsilon(1e-9));
  CHECK(ess(std::vector<double>{1.0, 0.0, 0.0}) == 1.0);
  CHECK(ess(std::vector<double>{0.5, 0.5}) == 2.0);
  CHECK_THROWS_AS(ess(std::vector<double>{0.5, 0.6}), ContractError);
  CHECK_THROWS_AS(ess(std::vector<double>{}), ContractError);
}

TEST_CASE("systematic resampling examples") {
  SECTION("uniform weights leave every slot in place") {
    const std::vector<double> w(8, 0.125);
    for (double u0 : {0.0, 0.3, 0.999}) {
      const auto a = systematic_resample(w, u0);
      for (int j = 0; j < 8; ++j) CHECK(a[j] == j);
    }
  }
  SECTION("a single heavy particle fills every slot") {
    std::vector<double> w(6, 0.0);
    w[2] = 1.0;
    for (int a : systematic_resample(w, 0.7)) CHECK(a == 2);
  }
}

TEST_CASE("offspring counts stay within one of N w over all rotor offsets") {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> cases = {{0.75, 0.25, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0}};
  for (int k = 0; k < 20; ++k) {
    std::vector<double> w(3 + k % 9);
    for (double& x : w) x = u(gen) < 0.2 ? 0.0 : u(gen);
    w[0] += 1e-3;
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= total;
    cases.push_back(w);
  }
  for (const auto& w : cases) {
    const int n = static_cast<int>(w.size());
    for (int r = 0; r < 1000; ++r) {
      const double u0 = (r + 0.5) / 1000.0;
      std::vector<int> count(n, 0);
      for (int a : systematic_resample(w, u0)) count[a] += 1;
      for (int i = 0; i < n; ++i) {
        REQUIRE(std::abs(count[i] - n * w[i]) < 1.0 + 1e-9);
        if (w[i] == 0.0) REQUIRE(count[i] == 0);
      }
    }
  }
}

TEST_CASE("resample_if_needed only fires below half the ensemble") {
  ParticleEnsemble e;
  e.states.resize(4);
  e.weights = {0.25, 0.25, 0.25, 0.25};
  CHECK(resample_if_needed(e, 1).empty());
  e.weights = {0.97, 0.01, 0.01, 0.01};
  e.states[0].week = 42;
  const auto a = resample_if_needed(e, 1);
  CHECK(a.size() == 4);
  CHECK(e.weights == std::vector<double>(4, 0.25));
  CHECK(e.states[0].week == 42);
}

TEST_CASE("zero noise and no infection keep the economy at steady state") {
  RunConfig c = small(4, Mode::kUncoupled);
  c.nk.sigma_s = c.nk.sigma_r = c.nk.sigma_m = 0.0;
  c.epidemic.initial_state = {1.0, 0.0, 0.0, 0.0, 0.0};
  const TrajectoryStore s = run_simulation(c);
  REQUIRE(s.weeks() == 156);
  for (int w = 1; w <= 156; ++w) {
    for (int j = 0; j < 4; ++j) {
      REQUIRE(s.at(w, j, VariableId::y) == 0.0);
      REQUIRE(s.at(w, j, VariableId::pi) == 0.0);
      REQUIRE(s.at(w, j, VariableId::i) == 0.0);
    }
  }
}

TEST_CASE("results do not depend on the number of worker threads") {
  for (int narratives : {3, 4}) {
    RunConfig c = small(257);
    if (narratives == 4) c = parse_config("[run]\nnarratives = 4\nparticles = 257\n");
    EngineOptions one, eight;
    one.threads = 1;
    eight.threads = 8;
    CHECK(identical(run_simulation(c, one), run_simulation(c, eight)));

    const SalienceLens obs = c.lens("observation");
    one.weekly_likelihood = eight.weekly_likelihood = &obs;
    CHECK(identical(run_simulation(c, one), run_simulation(c, eight)));
  }
}

TEST_CASE("uncoupled runs reproduce the standalone blocks") {
  const RunConfig c = small(3, Mode::kUncoupled);
  const TrajectoryStore s = run_simulation(c);
  const NKSolution sol = solve_msv(c.nk);
  for (std::uint32_t j = 0; j < 3; ++j) {
    NKState nk;
    SEIRState seir = c.epidemic.initial_state;
    StrainParams strain = c.epidemic.initial_strain;
    VaccineState vax{0.0, 0.0, c.vaccine.rho_0};
    for (int w = 0; w < c.weeks; ++w) {
      const auto week = static_cast<std::uint32_t>(w);
      CounterStream epi(c.seed, j, week, Subsystem::kEpidemic);
      const StrainArrival a = maybe_strain_arrival(strain, seir, c.epidemic, epi);
      strain = a.strain;
      const double I0 = a.state.I;
      seir = step_seir(a.state, strain, c.epidemic, a.state.S);
      CounterStream vr(c.seed, j, week, Subsystem::kVaccine);
      VaccineDrivers d;
      d.I = I0;
      d.lambda_v_eff = c.vaccine.lambda_v;
      d.strain_arrived = a.arrived;
      d.uptake_boost = 0.0;
      vax = step_vaccine(vax, c.vaccine, d, vr.uniform());
      CounterStream er(c.seed, j, week, Subsystem::kEconomy);
      const double e0 = er.normal(), e1 = er.normal(), e2 = er.normal();
      nk = step_nk(nk, sol, {}, Eigen::Vector3d(e0, e1, e2));
      const int row = w + 1;
      REQUIRE(s.at(row, j, VariableId::y) == nk.y);
      REQUIRE(s.at(row, j, VariableId::I) == seir.I);
      REQUIRE(s.at(row, j, VariableId::D) == seir.D);
      REQUIRE(s.at(row, j, VariableId::rho) == vax.rho);
      REQUIRE(s.at(row, j, VariableId::u) == vax.u);
    }
  }
}

TEST_CASE("coupled and uncoupled runs share shock realisations") {
  const TrajectoryStore a = run_simulation(small(50));
  const TrajectoryStore b = run_simulation(small(50, Mode::kUncoupled));
  CHECK(a.pairing_key == b.pairing_key);
  for (int j = 0; j < 50; ++j) CHECK(a.at(1, j, VariableId::R0) == b.at(1, j, VariableId::R0));
}

TEST_CASE("weights stay normalised") {
  const RunConfig c = small(300);
  const TrajectoryStore plain = run_simulation(c);
  CHECK(plain.weights() == std::vector<double>(300, 1.0 / 300));
  const SalienceLens obs = c.lens("observation");
  EngineOptions opt;
  opt.weekly_likelihood = &obs;
  const TrajectoryStore weighted = run_simulation(c, opt);
  const double total = std::accumulate(weighted.weights().begin(), weighted.weights().end(), 0.0);
  CHECK(total == Catch::Approx(1.0).margin(1e-12));
  for (double w : weighted.weights()) CHECK(w >= 0.0);
}

TEST_CASE("salience reweighting") {
  const TrajectoryStore s = run_simulation(small(400));
  SECTION("constant lens changes nothing") {
    const SalienceResult r = salience_reweight(s, SalienceLens::constant());
    CHECK(r.ess == Catch::Approx(400.0));
    for (double w : r.weights) CHECK(w == Catch::Approx(1.0 / 400));
  }
  SECTION("indicator lens keeps the qualifying particles") {
    const SalienceLens lens =
        SalienceLens::indicator(VariableId::y, LensStat::kTerminal, Comparison::kLess, -0.01);
    int qualifying = 0;
    for (int j = 0; j < 400; ++j) qualifying += s.terminal(j, VariableId::y) < -0.01;
    REQUIRE(qualifying > 0);
    const SalienceResult r = salience_reweight(s, lens);
    CHECK(r.support == qualifying);
    CHECK(r.ess == Catch::Approx(static_cast<double>(qualifying)));
  }
  SECTION("empty support is an error") {
    const SalienceLens never =
        SalienceLens::indicator(VariableId::D, LensStat::kTerminal, Comparison::kGreater, 2.0);
    CHECK_THROWS_AS(salience_reweight(s, never), EmptySupportError);
  }
}

TEST_CASE("particle injection") {
  const RunConfig c = small(200);
  const TrajectoryStore s = run_simulation(c);
  const SalienceLens obs = c.lens("observation");

  SECTION("a copy of a particle gets that particle's weight") {
    const Trajectory copy = s.path(17);
    const InjectionReport r = inject_particle(s, copy, obs);
    std::vector<double> lw(200);
    double mx = -1e300;
    for (int j = 0; j < 200; ++j) mx = std::max(mx, lw[j] = path_log_likelihood(s.path(j), obs));
    double total = 0.0;
    for (double x : lw) total += std::exp(x - mx);
    CHECK(r.weight == Catch::Approx(std::exp(lw[17] - mx) / total).epsilon(1e-9));
  }
  SECTION("the optimistic path under a constant lens gets the uniform weight") {
    const InjectionReport r = inject_particle(s, default_e_plus(c), SalienceLens::constant());
    CHECK(r.weight == Catch::Approx(1.0 / 200));
    CHECK(r.comparable);
  }
  SECTION("a stressed observation lens pushes the optimistic path below the median") {
    const InjectionReport r = inject_particle(s, default_e_plus(c), obs);
    CHECK(r.weight < r.median_weight);
  }
  SECTION("malformed paths are rejected") {
    Trajectory bad = default_e_plus(c);
    bad.set(3, VariableId::S, 2.0);
    CHECK_THROWS_AS(inject_particle(s, bad, obs), ContractError);
    Trajectory short_path(10, false);
    CHECK_THROWS_AS(inject_particle(s, short_path, obs), ContractError);
  }
}

TEST_CASE("a constant likelihood leaves region mass unchanged") {
  const RunConfig c = small(300);
  const SalienceLens region =
      SalienceLens::indicator(VariableId::y, LensStat::kTerminal, Comparison::kLess, -1.0);
  const ObservationComparison r =
      run_observation_free_vs_likelihood(c, SalienceLens::constant(), region);
  CHECK(r.mass_uniform == r.mass_likelihood);
  CHECK(r.observational == 0.0);
  CHECK(r.resamples == 0);
}

TEST_CASE("coupled three-narrative run lands in the published output-gap band") {
  const TrajectoryStore s = run_simulation(default_config());
  double mean = 0.0;
  for (int j = 0; j < s.particles(); ++j) mean += s.weights()[j] * s.terminal(j, VariableId::y);
  CHECK(mean >= -1.2);
  CHECK(mean <= -0.4);
}

TEST_CASE("inconsistent configurations fail at startup") {
  RunConfig c = small(10);
  c.factors.set(8, true);
  CHECK_THROWS_AS(run_simulation(c), ConfigError);

  RunConfig d = small(10);
  const CompositeModel four = build_model(parse_config("[run]\nnarratives = 4\n"));
  CHECK_THROWS_AS(run_simulation(four, d), ConfigError);
}
