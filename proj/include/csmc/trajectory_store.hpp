#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csmc/particle.hpp"

namespace csmc {

/// One particle path, weeks 1..T, dense [week][variable].
struct Trajectory {
  bool fiscal = false;
  int weeks = 0;
  std::vector<double> values;

  Trajectory() = default;
  Trajectory(int weeks, bool fiscal);

  int num_variables() const { return variable_count(fiscal); }
  /// week is 1-based (the state after `week` weekly steps).
  double at(int week, VariableId v) const;
  void set(int week, VariableId v, double value);

  /// Throws ContractError if the path is malformed (wrong size, non-finite or
  /// out-of-range values, compartments not summing to 1).
  void validate(int expected_weeks, bool expected_fiscal) const;
};

/// Dense per-week history of a whole ensemble, week-major.
class TrajectoryStore {
 public:
  TrajectoryStore() = default;
  TrajectoryStore(int particles, int weeks, bool fiscal);

  int particles() const { return particles_; }
  int weeks() const { return weeks_; }
  bool fiscal() const { return fiscal_; }
  int num_variables() const { return vars_; }

  double at(int week, int particle, VariableId v) const {
    return data_[index(week, particle) + static_cast<int>(v)];
  }
  double* row(int week, int particle) { return &data_[index(week, particle)]; }
  const double* row(int week, int particle) const { return &data_[index(week, particle)]; }

  double terminal(int particle, VariableId v) const { return at(weeks_, particle, v); }
  Trajectory path(int particle) const;

  /// After resampling at `week`, slot j descends from slot ancestors[j]:
  /// copy the ancestors' histories for weeks 1..week.
  void apply_ancestry(int week, const std::vector<int>& ancestors);

  const std::vector<double>& weights() const { return weights_; }
  void set_weights(std::vector<double> w);  // throws ContractError if not normalised

  std::uint64_t seed = 0;
  /// Configuration text minus the fields allowed to differ between paired runs.
  std::string pairing_key;
  std::string config_text;
  int resample_count = 0;

 private:
  std::size_t index(int week, int particle) const {
    return (static_cast<std::size_t>(week - 1) * particles_ + particle) * vars_;
  }

  int particles_ = 0;
  int weeks_ = 0;
  bool fiscal_ = false;
  int vars_ = 0;
  std::vector<double> data_;
  std::vector<double> weights_;
};

}  // namespace csmc
