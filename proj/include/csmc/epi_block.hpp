#pragma once

#include "csmc/rng.hpp"

namespace csmc {

struct SEIRState {
  double S = 0.99;
  double E = 0.005;
  double I = 0.005;
  double R = 0.0;
  double D = 0.0;

  double total() const { return S + E + I + R + D; }
  bool operator==(const SEIRState&) const = default;
};

struct StrainParams {
  double R0 = 2.5;
  double escape = 0.0;
  double ifr = 0.05;
  bool operator==(const StrainParams&) const = default;
};

struct SEIRParams {
  double sigma = 1.41;
  double gamma = 0.7;
  double omega = 0.019;
  double alpha = 5.0;
  double lambda = 0.025;
  StrainParams initial_strain{};
  SEIRState initial_state{};
  // Ranges for newly emerging strains.
  double r0_min = 1.5;
  double r0_max = 6.0;
  double escape_a = 3.0;
  double escape_b = 3.0;
  double ifr_a = 2.0;
  double ifr_b = 40.0;

  bool operator==(const SEIRParams&) const = default;
  void validate() const;  // throws ConfigError
};

/// beta_eff = max(0, R0 gamma (1 - alpha I)).
double effective_transmission(const StrainParams& strain, const SEIRParams& params, double I);

/// One forward-Euler week. `s_eff` replaces S in the incidence term only.
/// Compartments are clamped to [0,1]; if any clamp fired, S,E,I,R are rescaled
/// so the total is 1 again while D keeps its value.
SEIRState step_seir(const SEIRState& state, const StrainParams& strain, const SEIRParams& params,
                    double s_eff);

struct StrainArrival {
  StrainParams strain;
  SEIRState state;
  bool arrived = false;
};

/// Replaces the dominant strain with probability 1 - exp(-lambda) and returns
/// a fraction `escape` of the recovered to the susceptible pool.
/// `draws` supplies one uniform for the arrival test and, on arrival, the
/// draws for R0, escape and IFR.
StrainArrival maybe_strain_arrival(const StrainParams& strain, const SEIRState& state,
                                   const SEIRParams& params, CounterStream& draws);

/// Applies an already drawn strain (used by tests and by injected paths).
SEIRState apply_escape(const SEIRState& state, double escape);

}  // namespace csmc
