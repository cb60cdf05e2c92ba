#include "csmc/epi_block.hpp"

#include <algorithm>
#include <cmath>

#include "csmc/error.hpp"

namespace csmc {

void SEIRParams::validate() const {
  for (double rate : {sigma, gamma, omega, alpha, lambda}) {
    if (!(rate >= 0.0) || !std::isfinite(rate)) {
      throw ConfigError("epidemic rates must be finite and non-negative");
    }
  }
  if (!(initial_strain.R0 > 0.0)) throw ConfigError("epidemic.initial_r0 must be positive");
  if (!(initial_strain.ifr >= 0.0 && initial_strain.ifr <= 1.0)) {
    throw ConfigError("epidemic.initial_ifr must lie in [0,1]");
  }
  const SEIRState& s = initial_state;
  for (double c : {s.S, s.E, s.I, s.R, s.D}) {
    if (!(c >= 0.0 && c <= 1.0)) throw ConfigError("initial compartments must lie in [0,1]");
  }
  if (std::abs(s.total() - 1.0) > 1e-12) {
    throw ConfigError("initial compartments must sum to 1");
  }
  if (!(r0_min > 0.0 && r0_max >= r0_min)) throw ConfigError("strain R0 range is invalid");
  if (!(escape_a > 0.0 && escape_b > 0.0 && ifr_a > 0.0 && ifr_b > 0.0)) {
    throw ConfigError("strain Beta shape parameters must be positive");
  }
}

double effective_transmission(const StrainParams& strain, const SEIRParams& params, double I) {
  return std::max(0.0, strain.R0 * params.gamma * (1.0 - params.alpha * I));
}

SEIRState step_seir(const SEIRState& s, const StrainParams& strain, const SEIRParams& p,
                    double s_eff) {
  const double infections = effective_transmission(strain, p, s.I) * s_eff * s.I;
  const double onset = p.sigma * s.E;
  const double removal = p.gamma * s.I;
  const double waning = p.omega * s.R;

  SEIRState n;
  n.S = s.S - infections + waning;
  n.E = s.E + infections - onset;
  n.I = s.I + onset - removal;
  n.R = s.R + (1.0 - strain.ifr) * removal - waning;
  n.D = s.D + strain.ifr * removal;

  bool clamped = false;
  for (double* c : {&n.S, &n.E, &n.I, &n.R, &n.D}) {
    const double v = std::clamp(*c, 0.0, 1.0);
    clamped |= v != *c;
    *c = v;
  }
  if (clamped) {
    n.D = std::max(n.D, s.D);
    const double living = n.S + n.E + n.I + n.R;
    const double target = 1.0 - n.D;
    if (living > 0.0) {
      const double scale = target / living;
      n.S *= scale;
      n.E *= scale;
      n.I *= scale;
      n.R *= scale;
    } else {
      n.S = target;
    }
  }
  return n;
}

SEIRState apply_escape(const SEIRState& state, double escape) {
  SEIRState n = state;
  const double moved = escape * state.R;
  n.R -= moved;
  n.S += moved;
  return n;
}

StrainArrival maybe_strain_arrival(const StrainParams& strain, const SEIRState& state,
                                   const SEIRParams& params, CounterStream& draws) {
  StrainArrival out{strain, state, false};
  const double p_arrival = 1.0 - std::exp(-params.lambda);
  if (!(draws.uniform() < p_arrival)) return out;
  out.arrived = true;
  out.strain.R0 = params.r0_min + (params.r0_max - params.r0_min) * draws.uniform();
  out.strain.escape = draws.beta(params.escape_a, params.escape_b);
  out.strain.ifr = draws.beta(params.ifr_a, params.ifr_b);
  out.state = apply_escape(state, out.strain.escape);
  return out;
}

}  // namespace csmc
