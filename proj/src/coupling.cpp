#include "csmc/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "csmc/error.hpp"
#include "csmc/rng.hpp"

namespace csmc {

double HabituationParams::eta_d(double t) const {
  return eta_d_floor + eta_d_amplitude * std::exp(-h * t);
}

double HabituationParams::eta_s(double t) const {
  return eta_s_floor + eta_s_amplitude * std::exp(-h * t);
}

void HabituationParams::validate() const {
  for (double x : {h, eta_d_floor, eta_d_amplitude, eta_s_floor, eta_s_amplitude, xi,
                   mandate_slope, policy_slope, policy_floor}) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw ConfigError("coupling parameters must be finite and non-negative");
    }
  }
  if (!std::isfinite(i_star)) throw ConfigError("coupling.i_star must be finite");
}

bool InputDomain::bounded() const { return std::isfinite(lo) && std::isfinite(hi); }

double InputDomain::reflect(double x) const {
  if (reflection_point) return 2.0 * *reflection_point - x;
  if (!bounded()) {
    throw ConfigError("cannot symmetrise over an unbounded domain without a reflection point");
  }
  return lo + hi - x;
}

FactorMask FactorMask::all() {
  FactorMask m;
  for (int k = 1; k <= 11; ++k) m.bits_[k] = true;
  return m;
}

FactorMask FactorMask::none() { return FactorMask{}; }

FactorMask FactorMask::three_narrative() {
  FactorMask m;
  for (int k = 1; k <= 6; ++k) m.bits_[k] = true;
  return m;
}

bool FactorMask::any() const { return std::any_of(bits_.begin(), bits_.end(), [](bool b) { return b; }); }

std::string FactorMask::to_string() const {
  std::string out;
  for (int k = 1; k <= 11; ++k) {
    if (!bits_[k]) continue;
    if (!out.empty()) out += ',';
    out += 'f' + std::to_string(k);
  }
  return out.empty() ? "none" : out;
}

FactorMask FactorMask::parse(const std::string& text) {
  FactorMask m;
  std::string trimmed = text;
  trimmed.erase(std::remove_if(trimmed.begin(), trimmed.end(), ::isspace), trimmed.end());
  if (trimmed == "none" || trimmed.empty()) return m;
  if (trimmed == "all") return all();
  std::stringstream ss(trimmed);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    int k = 0;
    if (tok.size() >= 2 && tok[0] == 'f') {
      try {
        std::size_t used = 0;
        k = std::stoi(tok.substr(1), &used);
        if (used != tok.size() - 1) k = 0;
      } catch (const std::exception&) {
        k = 0;
      }
    }
    if (k < 1 || k > 11) throw ConfigError("unknown factor id '" + tok + "' in factor mask");
    m.bits_[k] = true;
  }
  return m;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Output-gap and policy-rate deviations are read in percentage points.
const InputDomain kUnit{0.0, 1.0, std::nullopt};
const InputDomain kGap{-5.0, 5.0, 0.0};
const InputDomain kSpending{0.0, 0.2, std::nullopt};

FactorSpec make(int k, std::string source, std::string target, std::vector<std::string> in,
                std::vector<std::string> out, std::vector<InputDomain> dom,
                std::function<double(std::span<const double>, double)> f) {
  FactorSpec s;
  s.number = k;
  s.id = "f" + std::to_string(k);
  s.source = std::move(source);
  s.target = std::move(target);
  s.inputs = std::move(in);
  s.outputs = std::move(out);
  s.domain = std::move(dom);
  s.evaluate = std::move(f);
  return s;
}

}  // namespace

FactorSpec standard_factor(int k, const HabituationParams& hab, const VaccineParams& vax,
                           const FiscalParams& fp) {
  switch (k) {
    case 1:
      return make(1, "epidemic", "economy", {"epidemic.I"}, {"economy.y"}, {kUnit},
                  [hab](std::span<const double> x, double t) { return -hab.eta_d(t) * x[0]; });
    case 2:
      return make(2, "epidemic", "economy", {"epidemic.I"}, {"economy.pi"}, {kUnit},
                  [hab](std::span<const double> x, double t) { return hab.eta_s(t) * x[0]; });
    case 3: {
      auto s = make(3, "epidemic", "vaccine", {"epidemic.I"}, {"vaccine.u"}, {kUnit},
                    [vax](std::span<const double> x, double) { return vax.target_slope * x[0]; });
      s.embedded = true;
      return s;
    }
    case 4:
      // Change in the susceptible pool seen by transmission: s_eff - S.
      return make(4, "vaccine", "epidemic",
                  {"epidemic.S", "vaccine.v", "vaccine.u", "vaccine.rho"}, {"epidemic.S"},
                  {kUnit, kUnit, kUnit, kUnit}, [](std::span<const double> x, double) {
                    return -std::min(x[0], x[1] * x[2] * (1.0 - x[3]));
                  });
    case 5:
      // Extra mandate multiplier above 1.
      return make(5, "economy", "vaccine", {"economy.y"}, {"vaccine.rho"}, {kGap},
                  [hab](std::span<const double> x, double) {
                    return hab.mandate_slope * std::max(0.0, -x[0]);
                  });
    case 6:
      // Relative change of the innovation rate.
      return make(6, "economy", "vaccine", {"economy.i"}, {"vaccine.v"}, {kGap},
                  [hab](std::span<const double> x, double) {
                    return std::max(hab.policy_floor,
                                    1.0 - hab.policy_slope * (x[0] - hab.i_star)) -
                           1.0;
                  });
    case 7:
      return make(7, "economy", "fiscal", {"economy.y"}, {"fiscal.phi"}, {kGap},
                  [fp](std::span<const double> x, double) {
                    return fiscal_trigger(fp, x[0]) ? 1.0 : 0.0;
                  });
    case 8:
      return make(8, "fiscal", "economy", {"fiscal.g"}, {"economy.y"}, {kSpending},
                  [fp](std::span<const double> x, double) { return fp.eta_g * x[0]; });
    case 9:
      return make(9, "fiscal", "vaccine", {"fiscal.g"}, {"vaccine.v"}, {kSpending},
                  [fp](std::span<const double> x, double) { return fp.zeta * x[0]; });
    case 10:
      // Relative change of alpha_g caused by rejection.
      return make(10, "vaccine", "fiscal", {"vaccine.rho"}, {"fiscal.g"}, {kUnit},
                  [fp](std::span<const double> x, double) {
                    return std::max(0.0, 1.0 - fp.kappa_rho * x[0]) - 1.0;
                  });
    case 11:
      return make(11, "epidemic", "fiscal", {"epidemic.I", "fiscal.phi"}, {"fiscal.g"},
                  {kUnit, kUnit}, [fp](std::span<const double> x, double) {
                    return emergency_spending(fp, x[0], x[1]);
                  });
    default:
      break;
  }
  throw ConfigError("no standard factor f" + std::to_string(k));
}

std::vector<FactorSpec> standard_factors(bool fiscal, const HabituationParams& hab,
                                         const VaccineParams& vax, const FiscalParams& fp) {
  std::vector<FactorSpec> out;
  const int last = fiscal ? 11 : 6;
  for (int k = 1; k <= last; ++k) out.push_back(standard_factor(k, hab, vax, fp));
  return out;
}

FactorSpec symmetrise(const FactorSpec& f) {
  if (f.domain.size() != f.inputs.size()) {
    throw ConfigError("factor " + f.id + " has no declared domain for every input");
  }
  for (const auto& d : f.domain) {
    if (!d.reflection_point && !d.bounded()) {
      throw ConfigError("factor " + f.id +
                        " has an unbounded input domain and no declared reflection point");
    }
  }
  FactorSpec s = f;
  s.evaluate = [inner = f.evaluate, dom = f.domain](std::span<const double> x, double t) {
    std::vector<double> r(x.begin(), x.end());
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = dom[j].reflect(r[j]);
    return 0.5 * (inner(x, t) + inner(r, t));
  };
  return s;
}

AsymmetryResult asymmetry_ratio(const FactorSpec& f, int samples, double t, std::uint64_t seed) {
  if (samples < 1) throw ContractError("asymmetry_ratio needs at least one sample");
  if (f.domain.size() != f.inputs.size() || f.domain.empty()) {
    throw ConfigError("factor " + f.id + " has no declared domain");
  }
  for (const auto& d : f.domain) {
    if (!d.bounded()) throw ConfigError("asymmetry ratio needs a bounded domain for " + f.id);
  }
  const std::size_t dim = f.domain.size();
  std::vector<double> x(dim);
  double pos = 0.0, abs_sum = 0.0;
  bool any_pos = false, any_neg = false;
  CounterStream stream(seed, 0, 0, Subsystem::kClustering);
  for (int n = 0; n < samples; ++n) {
    for (std::size_t j = 0; j < dim; ++j) {
      const auto& d = f.domain[j];
      const double unit = dim == 1 ? (n + 0.5) / samples : stream.uniform();
      x[j] = d.lo + (d.hi - d.lo) * unit;
    }
    const double v = f.evaluate(x, t);
    pos += std::max(v, 0.0);
    abs_sum += std::abs(v);
    any_pos |= v > 0.0;
    any_neg |= v < 0.0;
  }
  AsymmetryResult r;
  if (abs_sum == 0.0) {
    r.outcome = AsymmetryResult::Outcome::kZeroFactor;
    return r;
  }
  r.ratio = pos / abs_sum;
  r.sign_definite = !(any_pos && any_neg);
  return r;
}

CouplingFabric::CouplingFabric(const HabituationParams& hab, const VaccineParams& vax,
                               const FiscalParams& fiscal, const FactorMask& mask, bool fiscal_on,
                               const FactorMask& symmetrised)
    : hab_(hab), vax_(vax), fiscal_(fiscal), mask_(mask), fiscal_on_(fiscal_on) {
  for (int k = 7; k <= 11 && !fiscal_on; ++k) {
    if (mask.enabled(k)) {
      throw ConfigError("factor f" + std::to_string(k) +
                        " requires the fiscal narrative (narratives = 4)");
    }
  }
  for (int k = 1; k <= 11; ++k) {
    if (!mask.enabled(k)) continue;
    FactorSpec f = standard_factor(k, hab, vax, fiscal);
    factors_[k] = symmetrised.enabled(k) ? symmetrise(f) : f;
  }
}

std::vector<FactorSpec> CouplingFabric::factors() const {
  std::vector<FactorSpec> out;
  for (const auto& f : factors_) {
    if (f) out.push_back(*f);
  }
  return out;
}

double CouplingFabric::call(int k, std::initializer_list<double> x, double t) const {
  return factors_[k]->evaluate(std::span<const double>(x.begin(), x.size()), t);
}

CouplingOutput CouplingFabric::evaluate(const ParticleState& p, int week) const {
  const double t = week;
  const double I = p.seir.I;
  CouplingOutput out;
  if (factors_[1]) out.delta_r_n += call(1, {I}, t);
  if (factors_[2]) out.delta_eps_s += call(2, {I}, t);
  if (factors_[3]) out.uptake_boost = call(3, {I}, t);

  out.s_eff = p.seir.S;
  if (factors_[4]) {
    out.s_eff = std::clamp(p.seir.S + call(4, {p.seir.S, p.vax.v, p.vax.u, p.vax.rho}, t), 0.0,
                           p.seir.S);
  }
  if (factors_[5]) out.mandate_multiplier = std::max(1.0, 1.0 + call(5, {p.nk.y}, t));

  double lambda_scale = 1.0;
  if (factors_[6]) lambda_scale = 1.0 + call(6, {p.nk.i}, t);

  if (fiscal_on_) {
    if (!p.fiscal) throw ContractError("fiscal couplings evaluated on a particle without fiscal state");
    const FiscalState& fs = *p.fiscal;
    if (factors_[8]) out.delta_r_n += call(8, {fs.g}, t);
    if (factors_[9]) lambda_scale *= 1.0 + call(9, {fs.g}, t);
    out.fiscal.trigger = factors_[7] ? call(7, {p.nk.y}, t) : 0.0;
    out.fiscal.alpha_g_eff =
        factors_[10] ? fiscal_.alpha_g * std::max(0.0, 1.0 + call(10, {p.vax.rho}, t))
                     : fiscal_.alpha_g;
    out.fiscal.emergency = factors_[11] ? call(11, {I, fs.phi}, t) : 0.0;
  }
  out.lambda_v_eff = vax_.lambda_v * std::max(0.0, lambda_scale);
  out.labour = (1.0 - p.seir.D) - hab_.xi * I;
  return out;
}

CouplingOutput eval_couplings(const CouplingFabric& fabric, const ParticleState& state, int week) {
  return fabric.evaluate(state, week);
}

}  // namespace csmc
