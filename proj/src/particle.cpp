#include "csmc/particle.hpp"

#include <string>

#include "csmc/error.hpp"

namespace csmc {
namespace {

constexpr std::array<std::string_view, kNumVariables> kNames = {
    "y", "pi", "i", "eps_s", "r_n", "L",  "S",       "E", "I", "R",
    "D", "R0", "ifr", "strains", "v", "u", "rho", "g", "d", "phi"};

double& slot(ParticleState& p, VariableId id) {
  switch (id) {
    case VariableId::y: return p.nk.y;
    case VariableId::pi: return p.nk.pi;
    case VariableId::i: return p.nk.i;
    case VariableId::eps_s: return p.nk.eps_s;
    case VariableId::r_n: return p.nk.r_n;
    case VariableId::L: return p.labour;
    case VariableId::S: return p.seir.S;
    case VariableId::E: return p.seir.E;
    case VariableId::I: return p.seir.I;
    case VariableId::R: return p.seir.R;
    case VariableId::D: return p.seir.D;
    case VariableId::R0: return p.strain.R0;
    case VariableId::ifr: return p.strain.ifr;
    case VariableId::v: return p.vax.v;
    case VariableId::u: return p.vax.u;
    case VariableId::rho: return p.vax.rho;
    case VariableId::g:
    case VariableId::d:
    case VariableId::phi:
      if (!p.fiscal) throw ContractError("fiscal variable requested from a 3-narrative particle");
      if (id == VariableId::g) return p.fiscal->g;
      if (id == VariableId::d) return p.fiscal->d;
      return p.fiscal->phi;
    case VariableId::strains: break;
  }
  throw ContractError("variable has no double slot");
}

}  // namespace

std::string_view variable_name(VariableId id) { return kNames.at(static_cast<int>(id)); }

VariableId variable_from_name(std::string_view name) {
  for (int k = 0; k < kNumVariables; ++k) {
    if (kNames[k] == name) return static_cast<VariableId>(k);
  }
  throw ConfigError("unknown variable '" + std::string(name) + "'");
}

int variable_count(bool fiscal) { return fiscal ? kNumVariables : kNumBaseVariables; }

double ParticleState::get(VariableId id) const {
  if (id == VariableId::strains) return static_cast<double>(strain_count);
  return slot(const_cast<ParticleState&>(*this), id);
}

void ParticleState::set(VariableId id, double value) {
  if (id == VariableId::strains) {
    strain_count = static_cast<int>(value);
    return;
  }
  slot(*this, id) = value;
}

void pack(const ParticleState& p, std::span<double> out) {
  const int n = variable_count(p.fiscal.has_value());
  if (static_cast<int>(out.size()) < n) throw ContractError("pack buffer too small");
  for (int k = 0; k < n; ++k) out[k] = p.get(static_cast<VariableId>(k));
}

ParticleState unpack(std::span<const double> values, bool fiscal) {
  ParticleState p;
  if (fiscal) p.fiscal = FiscalState{};
  const int n = variable_count(fiscal);
  if (static_cast<int>(values.size()) < n) throw ContractError("unpack buffer too small");
  for (int k = 0; k < n; ++k) p.set(static_cast<VariableId>(k), values[k]);
  return p;
}

}  // namespace csmc
