#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "csmc/analysis.hpp"
#include "csmc/config.hpp"
#include "csmc/trajectory_store.hpp"

namespace csmc {

std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::string& path);  // throws IoError

/// Creates the directory if needed and proves it is writable. Throws IoError.
void preflight_output_dir(const std::string& dir);

void write_trajectories_csv(const TrajectoryStore& store, std::ostream& out);
void write_trajectory_csv(const Trajectory& path, std::ostream& out);
void write_quantiles_csv(const TrajectoryStore& store, std::ostream& out);
void write_archetypes_csv(const ArchetypeSet& set, const std::vector<double>& weights,
                          std::ostream& out);
void write_correlations_csv(const std::vector<CorrelationSeries>& series, std::ostream& out);

nlohmann::json bias_report_json(const BiasReport& report);
/// Config echo, seed and headline statistics.
nlohmann::json summary_json(const RunConfig& config, const TrajectoryStore& store);

/// What a CLI subcommand hands to emit_outputs; absent parts are skipped.
struct RunOutputs {
  const RunConfig* config = nullptr;
  const TrajectoryStore* store = nullptr;
  const ArchetypeSet* archetypes = nullptr;
  const std::vector<CorrelationSeries>* correlations = nullptr;
  const BiasReport* bias = nullptr;
  nlohmann::json extra_summary;  // merged into summary.json under "analysis"
};

struct ManifestEntry {
  std::string file;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// Writes every applicable file through a temporary name and rename, then
/// manifest.json. Returns the manifest entries (manifest.json excluded).
std::vector<ManifestEntry> emit_outputs(const RunOutputs& outputs, const std::string& dir);

}  // namespace csmc
