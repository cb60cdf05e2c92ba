#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

#include "csmc/epi_block.hpp"
#include "csmc/fiscal_block.hpp"
#include "csmc/nk_block.hpp"
#include "csmc/vaccine_block.hpp"

namespace csmc {

/// Every recorded per-particle series. The first kNumBaseVariables are present
/// in all runs; the fiscal triple only when the fiscal narrative is composed.
enum class VariableId : int {
  y,
  pi,
  i,
  eps_s,
  r_n,
  L,
  S,
  E,
  I,
  R,
  D,
  R0,
  ifr,
  strains,
  v,
  u,
  rho,
  g,
  d,
  phi,
};

inline constexpr int kNumBaseVariables = 17;
inline constexpr int kNumVariables = 20;

std::string_view variable_name(VariableId id);
/// Throws ConfigError for unknown names.
VariableId variable_from_name(std::string_view name);
int variable_count(bool fiscal);

/// The full composite state of one particle.
struct ParticleState {
  NKState nk;
  SEIRState seir;
  StrainParams strain;
  VaccineState vax;
  std::optional<FiscalState> fiscal;
  int strain_count = 0;
  int week = 0;
  double labour = 1.0;

  double get(VariableId id) const;  // throws ContractError for fiscal ids without fiscal state
  void set(VariableId id, double value);
};

/// Values in VariableId order, truncated to variable_count(has fiscal).
void pack(const ParticleState& p, std::span<double> out);
ParticleState unpack(std::span<const double> values, bool fiscal);

}  // namespace csmc
