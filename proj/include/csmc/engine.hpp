#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "csmc/composition.hpp"
#include "csmc/config.hpp"
#include "csmc/lens.hpp"
#include "csmc/particle.hpp"
#include "csmc/trajectory_store.hpp"

namespace csmc {

/// Runs fn(begin, end) over [0, n) split into contiguous chunks, one per thread.
void parallel_for(int n, int threads, const std::function<void(int, int)>& fn);

/// Composite model for a config: the standard narratives decorated with their
/// parameter bundles, N == L, and the enabled (possibly symmetrised) factors.
CompositeModel build_model(const RunConfig& config);

ParticleState initial_particle(const RunConfig& config);

/// Everything a weekly step needs; immutable and shared by all workers.
struct StepContext {
  explicit StepContext(const RunConfig& config);
  RunConfig config;
  NKSolution nk;
  CouplingFabric fabric;
};

/// Advances one particle by a week (week is the 0-based index of the step).
void step_particle(ParticleState& state, const StepContext& ctx, std::uint32_t slot, int week);

struct EngineOptions {
  int threads = 0;  // 0: hardware concurrency
  /// Optional per-week likelihood; weights are multiplied by it every
  /// `cadence` weeks and the ensemble is resampled when ESS < N/2.
  const SalienceLens* weekly_likelihood = nullptr;
  int cadence = 1;
};

/// The weekly loop. Without a likelihood all weights stay uniform.
TrajectoryStore run_simulation(const CompositeModel& model, const RunConfig& config,
                               const EngineOptions& options = {});
TrajectoryStore run_simulation(const RunConfig& config, const EngineOptions& options = {});

/// 1 / sum w^2. Throws ContractError if the weights are not normalised.
double ess(std::span<const double> weights);

/// Systematic resampling with offset u0 in [0,1): returns the ancestor index
/// of every output slot.
std::vector<int> systematic_resample(std::span<const double> weights, double u0);

struct ParticleEnsemble {
  std::vector<ParticleState> states;
  std::vector<double> weights;
  std::uint64_t seed = 0;
};

/// Resamples (systematically, to uniform weights) when ESS < N/2. Returns the
/// ancestor vector, or an empty vector if nothing changed.
std::vector<int> resample_if_needed(ParticleEnsemble& ensemble, int week);

struct SalienceResult {
  std::vector<double> weights;
  double ess = 0.0;
  int support = 0;  // particles with positive lens value
};

/// Second-pass weights proportional to prior weight times lens value.
/// Throws EmptySupportError if the lens vanishes on every particle.
SalienceResult salience_reweight(const TrajectoryStore& store, const SalienceLens& lens);

/// Log-likelihood of a path: a single evaluation for path statistics, or the
/// sum over weeks cadence, 2 cadence, ... for the per-week (kCurrent) lens.
double path_log_likelihood(const Trajectory& path, const SalienceLens& lens, int cadence = 1);

struct InjectionReport {
  double weight = 0.0;         // on the scale of the ensemble's normalised weights
  double median_weight = 0.0;  // median ensemble weight under the same likelihood
  double ratio = 0.0;
  bool comparable = false;     // ratio >= kComparableRatio
  std::string verdict;
};

inline constexpr double kComparableRatio = 0.1;

/// Weight the injected path would receive next to the ensemble under the
/// likelihood, against the median particle weight.
InjectionReport inject_particle(const TrajectoryStore& store, const Trajectory& path,
                                const SalienceLens& likelihood, int cadence = 1);

/// Optimistic reference path: no infection, one vaccine innovation at week 8,
/// no strains, rejection held at rho_0, zero economic innovations, fiscal at
/// its initial values.
Trajectory default_e_plus(const RunConfig& config);

/// Reads a path written by write_trajectory_csv (particle_id, week, variable, value).
Trajectory read_trajectory_file(const std::string& path, const RunConfig& config);

/// sum_i w_i * region(path_i).
double region_mass(const TrajectoryStore& store, std::span<const double> weights,
                   const SalienceLens& region);

struct ObservationComparison {
  double mass_uniform = 0.0;
  double mass_likelihood = 0.0;
  double observational = 0.0;  // mass_uniform - mass_likelihood
  double final_ess = 0.0;
  int resamples = 0;
};

/// Two runs sharing the propagation seed, one observation-free and one
/// reweighted every `cadence` weeks by the likelihood.
ObservationComparison run_observation_free_vs_likelihood(const RunConfig& config,
                                                         const SalienceLens& likelihood,
                                                         const SalienceLens& region,
                                                         int threads = 0);

}  // namespace csmc
