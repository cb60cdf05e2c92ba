#include "csmc/trajectory_store.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "csmc/error.hpp"

namespace csmc {

Trajectory::Trajectory(int weeks_, bool fiscal_)
    : fiscal(fiscal_),
      weeks(weeks_),
      values(static_cast<std::size_t>(weeks_) * variable_count(fiscal_), 0.0) {}

double Trajectory::at(int week, VariableId v) const {
  return values.at(static_cast<std::size_t>(week - 1) * num_variables() + static_cast<int>(v));
}

void Trajectory::set(int week, VariableId v, double value) {
  values.at(static_cast<std::size_t>(week - 1) * num_variables() + static_cast<int>(v)) = value;
}

void Trajectory::validate(int expected_weeks, bool expected_fiscal) const {
  if (weeks != expected_weeks) {
    throw ContractError("trajectory spans " + std::to_string(weeks) + " weeks, expected " +
                        std::to_string(expected_weeks));
  }
  if (fiscal != expected_fiscal) throw ContractError("trajectory narrative count mismatch");
  if (values.size() != static_cast<std::size_t>(weeks) * num_variables()) {
    throw ContractError("trajectory value array has the wrong size");
  }
  for (double x : values) {
    if (!std::isfinite(x)) throw ContractError("trajectory contains a non-finite value");
  }
  for (int w = 1; w <= weeks; ++w) {
    double total = 0.0;
    for (VariableId v : {VariableId::S, VariableId::E, VariableId::I, VariableId::R, VariableId::D}) {
      const double c = at(w, v);
      if (c < 0.0 || c > 1.0) throw ContractError("trajectory compartment outside [0,1]");
      total += c;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw ContractError("trajectory compartments do not sum to 1 at week " + std::to_string(w));
    }
    for (VariableId v : {VariableId::v, VariableId::u, VariableId::rho}) {
      const double c = at(w, v);
      if (c < 0.0 || c > 1.0) throw ContractError("trajectory vaccine state outside [0,1]");
    }
  }
}

TrajectoryStore::TrajectoryStore(int particles, int weeks, bool fiscal)
    : particles_(particles),
      weeks_(weeks),
      fiscal_(fiscal),
      vars_(variable_count(fiscal)),
      data_(static_cast<std::size_t>(particles) * weeks * vars_, 0.0),
      weights_(particles, 1.0 / particles) {}

Trajectory TrajectoryStore::path(int particle) const {
  if (particle < 0 || particle >= particles_) throw ContractError("particle index out of range");
  Trajectory t(weeks_, fiscal_);
  for (int w = 1; w <= weeks_; ++w) {
    std::copy_n(row(w, particle), vars_, &t.values[static_cast<std::size_t>(w - 1) * vars_]);
  }
  return t;
}

void TrajectoryStore::apply_ancestry(int week, const std::vector<int>& ancestors) {
  if (static_cast<int>(ancestors.size()) != particles_) {
    throw ContractError("ancestor vector size differs from particle count");
  }
  std::vector<double> buffer(static_cast<std::size_t>(particles_) * vars_);
  for (int w = 1; w <= week; ++w) {
    for (int j = 0; j < particles_; ++j) {
      std::copy_n(row(w, ancestors[j]), vars_, &buffer[static_cast<std::size_t>(j) * vars_]);
    }
    std::copy(buffer.begin(), buffer.end(), row(w, 0));
  }
}

void TrajectoryStore::set_weights(std::vector<double> w) {
  if (static_cast<int>(w.size()) != particles_) throw ContractError("weight vector size mismatch");
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw ContractError("negative or NaN weight");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ContractError("weights are not normalised");
  weights_ = std::move(w);
}

}  // namespace csmc
