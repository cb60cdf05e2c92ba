#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "csmc/coupling.hpp"
#include "csmc/epi_block.hpp"
#include "csmc/fiscal_block.hpp"
#include "csmc/lens.hpp"
#include "csmc/nk_block.hpp"
#include "csmc/vaccine_block.hpp"

namespace csmc {

enum class Mode { kCoupled, kUncoupled };
enum class Calibration { kBaseline, kUsScale };

std::string to_string(Mode);
std::string to_string(Calibration);

/// Everything a run depends on. Defaults are the full published calibration.
struct RunConfig {
  Mode mode = Mode::kCoupled;
  int narratives = 3;
  Calibration calibration = Calibration::kBaseline;
  int particles = 10000;
  int weeks = 156;
  std::uint64_t seed = 1;
  FactorMask factors = FactorMask::three_narrative();
  FactorMask symmetrised = FactorMask::none();
  int cluster_k = 5;
  std::string output_dir = "out";

  NKParams nk;
  SEIRParams epidemic;
  VaccineParams vaccine;
  FiscalParams fiscal;
  HabituationParams coupling;

  /// Named lenses. "recession", "constructive" and "observation" always exist.
  std::map<std::string, SalienceLens> lenses;
  std::string constructive_lens = "constructive";
  std::string observation_lens = "observation";
  int likelihood_cadence = 1;  // weeks between likelihood reweights
  std::string e_plus_file;     // empty = built-in optimistic path

  bool operator==(const RunConfig&) const = default;

  bool fiscal_on() const { return narratives == 4; }
  const SalienceLens& lens(const std::string& name) const;  // throws ConfigError

  void validate() const;  // throws ConfigError
};

RunConfig default_config();

/// Parses the sectioned key = value format. Calibration presets are applied
/// before explicit keys, so any single parameter can still be overridden.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Full, explicit text form; parse_config(to_config_text(c)) == c.
/// Without execution settings the output directory is left out, so that
/// the text depends only on what determines the results.
std::string to_config_text(const RunConfig& config, bool include_execution = true);

/// Appends one "section.key=value" override to config text. Overrides are
/// parsed after the original keys and so take precedence.
std::string append_override(const std::string& text, const std::string& assignment);

/// Formats with 17 significant digits (round-trips exactly).
std::string format_double(double x);

}  // namespace csmc
