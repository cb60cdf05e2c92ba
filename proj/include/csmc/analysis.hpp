#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "csmc/config.hpp"
#include "csmc/engine.hpp"
#include "csmc/trajectory_store.hpp"

namespace csmc {

/// Per-particle summary features, row-major [particle][feature].
struct FeatureMatrix {
  std::vector<std::string> names;
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
};

/// 9 features (13 with the fiscal narrative): peak_I, peak_week, deaths,
/// y_trough, rho_final, strains, mean_I, mean_y, eff_vacc_weeks, then
/// peak_g, debt_final, phi_final, g_final.
std::vector<std::string> feature_names(bool fiscal);
std::vector<double> extract_features(const Trajectory& path);
FeatureMatrix extract_features(const TrajectoryStore& store);

/// Column-wise z-scores; zero-variance columns become 0.
FeatureMatrix standardise(const FeatureMatrix& features);

struct Clustering {
  std::vector<int> medoids;     // row indices into the input
  std::vector<int> assignment;  // cluster index per row
  double objective = 0.0;       // weighted total distance to nearest medoid
  std::vector<double> objective_trace;  // after seeding and after every accepted swap
  int swaps = 0;
};

/// Weighted k-medoids under Euclidean distance: k-medoids++ seeding from the
/// seed, then eager FasterPAM swaps until no swap lowers the objective.
/// Rows are processed in a canonical (sorted) order, so the result does not
/// depend on input order. Throws ContractError if k exceeds the number of
/// distinct rows.
Clustering kmedoids(const FeatureMatrix& standardised, int k, const std::vector<double>& weights,
                    std::uint64_t seed, int max_passes = 100);

struct Archetype {
  double weight = 0.0;
  int medoid = 0;
  int members = 0;
  std::vector<double> feature_means;  // weighted, unstandardised
  Trajectory trajectory;              // weighted average of member paths
};

struct ArchetypeSet {
  std::vector<std::string> feature_names;
  std::vector<Archetype> clusters;     // sorted by final rejection
  std::vector<int> assignment;         // per particle, into `clusters`
};

/// Clusters the ensemble (features z-scored) and averages member paths.
ArchetypeSet build_archetypes(const TrajectoryStore& store, int k, std::uint64_t seed);
ArchetypeSet build_archetypes(const TrajectoryStore& store, const FeatureMatrix& raw,
                              const Clustering& clustering);

/// Weighted Pearson correlation; nullopt when either side has zero variance.
std::optional<double> weighted_correlation(const std::vector<double>& a,
                                           const std::vector<double>& b,
                                           const std::vector<double>& w);

struct CorrelationSeries {
  VariableId a;
  VariableId b;
  std::vector<std::optional<double>> by_week;  // index week-1
};

std::vector<CorrelationSeries> rolling_correlations(
    const TrajectoryStore& store, const std::vector<std::pair<VariableId, VariableId>>& pairs,
    const std::vector<double>& weights);

/// Default pairs reported by the CLI.
std::vector<std::pair<VariableId, VariableId>> default_correlation_pairs(bool fiscal);

struct WeightedMoments {
  double mean = 0.0;
  double sd = 0.0;
};

WeightedMoments terminal_moments(const TrajectoryStore& store, VariableId v);

struct BiasRow {
  std::string variable;
  WeightedMoments coupled;
  WeightedMoments uncoupled;
  double shift = 0.0;  // coupled.mean - uncoupled.mean
};

struct DecompositionEntry {
  std::string source;
  std::string diagnostic;
  double value = 0.0;
  std::string interpretation;
};

struct FactorAsymmetry {
  std::string factor;
  AsymmetryResult result;
};

struct BiasReport {
  std::vector<BiasRow> rows;
  std::vector<DecompositionEntry> decomposition;
  std::vector<FactorAsymmetry> asymmetry;
  std::optional<InjectionReport> injection;
  std::optional<ObservationComparison> observation;
  double constructive_original = 0.0;
  double constructive_symmetrised = 0.0;
};

/// Terminal y, I, D, rho (and d with the fiscal narrative). Throws
/// ContractError unless the stores come from paired runs.
BiasReport bias_table(const TrajectoryStore& coupled, const TrajectoryStore& uncoupled);

/// Sampling (E+ injection), structural (symmetrised vs original couplings)
/// and observational (observation-free vs likelihood) components.
BiasReport bias_decomposition(const RunConfig& config, int threads = 0);

struct BifurcationStats {
  double threshold = 0.35;
  double low_mass = 0.0;   // rho_T <= threshold
  double high_mass = 0.0;
  double low_mean_y = 0.0;
  double high_mean_y = 0.0;
};

BifurcationStats bifurcation(const TrajectoryStore& store, double threshold = 0.35);

/// Per-week weighted quantiles (q05, q25, q50, q75, q95) of one variable.
std::vector<std::array<double, 5>> weekly_quantiles(const TrajectoryStore& store, VariableId v);

/// Euclidean distance from a path to each archetype over all variables,
/// weeks 1..upto (batch monitoring utility).
std::vector<double> archetype_distances(const ArchetypeSet& set, const Trajectory& path, int upto);

}  // namespace csmc
