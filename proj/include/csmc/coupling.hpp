#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csmc/fiscal_block.hpp"
#include "csmc/particle.hpp"
#include "csmc/vaccine_block.hpp"

namespace csmc {

struct HabituationParams {
  double h = 0.02;
  double eta_d_floor = 0.02;
  double eta_d_amplitude = 0.08;
  double eta_s_floor = 0.01;
  double eta_s_amplitude = 0.04;
  double xi = 0.3;
  // Functional-form constants of f5 and f6.
  double mandate_slope = 5.0;
  double policy_slope = 0.4;
  double policy_floor = 0.5;
  double i_star = 0.0;

  bool operator==(const HabituationParams&) const = default;
  double eta_d(double t) const;
  double eta_s(double t) const;
  void validate() const;  // throws ConfigError
};

enum class FactorKind { kHard, kSoft };

/// Input range of one factor argument. Symmetrisation reflects about
/// `reflection_point` if given, otherwise about the midpoint of [lo, hi].
struct InputDomain {
  double lo = 0.0;
  double hi = 1.0;
  std::optional<double> reflection_point;

  bool bounded() const;
  double reflect(double x) const;  // throws ConfigError when no reflection is defined
};

/// One coupling function. `evaluate(x, t)` returns the factor's contribution
/// at elapsed week t; 0 is the neutral (uncoupled) value for every factor.
struct FactorSpec {
  int number = 0;  // k in f_k
  std::string id;
  std::string source;  // narrative name
  std::string target;
  FactorKind kind = FactorKind::kHard;
  std::vector<std::string> inputs;   // qualified "narrative.variable"
  std::vector<std::string> outputs;  // qualified targets on the factor graph
  std::vector<InputDomain> domain;   // one per input
  bool embedded = false;             // lives inside a block, not a factor-graph node
  std::function<double(std::span<const double>, double)> evaluate;

  double operator()(std::span<const double> x, double t = 0.0) const { return evaluate(x, t); }
};

/// Bit k set means f_k is enabled; index 0 is unused.
class FactorMask {
 public:
  static FactorMask all();
  static FactorMask none();
  static FactorMask three_narrative();  // f1..f6

  bool enabled(int k) const { return bits_.at(k); }
  void set(int k, bool on) { bits_.at(k) = on; }
  bool any() const;
  bool operator==(const FactorMask&) const = default;

  /// Comma-separated factor ids, e.g. "f1,f2,f4" ("none" when empty).
  std::string to_string() const;
  static FactorMask parse(const std::string& text);  // throws ConfigError

 private:
  std::array<bool, 12> bits_{};
};

/// The standard factor f_k (k in 1..11) under the given calibration.
FactorSpec standard_factor(int k, const HabituationParams& hab, const VaccineParams& vax,
                           const FiscalParams& fiscal);
std::vector<FactorSpec> standard_factors(bool fiscal_on, const HabituationParams& hab,
                                         const VaccineParams& vax, const FiscalParams& fiscal);

/// (f(x) + f(reflect(x))) / 2, reflecting every input through its domain.
/// Throws ConfigError if an input domain is unbounded without a reflection point.
FactorSpec symmetrise(const FactorSpec& factor);

struct AsymmetryResult {
  enum class Outcome { kRatio, kZeroFactor };
  Outcome outcome = Outcome::kRatio;
  double ratio = 0.0;
  bool sign_definite = false;
};

/// Estimate of  int max(f,0) / int |f|  over the input domain at week t.
/// One-dimensional factors use a midpoint grid with `samples` points; higher
/// dimensions use `samples` counter-based uniform draws.
AsymmetryResult asymmetry_ratio(const FactorSpec& factor, int samples, double t = 0.0,
                                std::uint64_t seed = 0);

/// Per-particle coupling values for one week.
struct CouplingOutput {
  double delta_r_n = 0.0;
  double delta_eps_s = 0.0;
  double s_eff = 0.0;
  double mandate_multiplier = 1.0;
  double lambda_v_eff = 0.0;
  double uptake_boost = 0.0;  // f3, embedded in the uptake target
  FiscalDrivers fiscal;
  double labour = 1.0;
};

/// The enabled factors of a run, possibly with some replaced by their
/// symmetrised versions. Immutable and shareable across threads.
class CouplingFabric {
 public:
  CouplingFabric(const HabituationParams& hab, const VaccineParams& vax,
                 const FiscalParams& fiscal, const FactorMask& mask, bool fiscal_on,
                 const FactorMask& symmetrised = FactorMask::none());

  const FactorMask& mask() const { return mask_; }
  bool fiscal_on() const { return fiscal_on_; }
  /// Enabled factors in f-number order.
  std::vector<FactorSpec> factors() const;
  const HabituationParams& habituation() const { return hab_; }

  CouplingOutput evaluate(const ParticleState& state, int week) const;

 private:
  double call(int k, std::initializer_list<double> x, double t) const;

  HabituationParams hab_;
  VaccineParams vax_;
  FiscalParams fiscal_;
  FactorMask mask_;
  bool fiscal_on_;
  std::array<std::optional<FactorSpec>, 12> factors_;
};

CouplingOutput eval_couplings(const CouplingFabric& fabric, const ParticleState& state, int week);

}  // namespace csmc
