#pragma once

#include <string>

#include "csmc/particle.hpp"
#include "csmc/trajectory_store.hpp"

namespace csmc {

enum class LensKind { kConstant, kIndicator, kGaussian };
enum class LensStat { kTerminal, kMin, kMax, kMean, kCurrent };
enum class Comparison { kLess, kLessEqual, kGreater, kGreaterEqual };

/// A non-negative weighting function of one path statistic.
///   constant:  value
///   indicator: 1[stat op threshold]
///   gaussian:  exp(-((stat - center) / scale)^2 / 2)
/// Output-gap style variables are read in percentage points.
struct SalienceLens {
  std::string name;
  LensKind kind = LensKind::kConstant;
  VariableId variable = VariableId::y;
  LensStat stat = LensStat::kTerminal;
  Comparison op = Comparison::kLess;
  double threshold = 0.0;
  double center = 0.0;
  double scale = 1.0;
  double value = 1.0;

  bool operator==(const SalienceLens&) const = default;

  static SalienceLens constant(double value = 1.0);
  static SalienceLens indicator(VariableId v, LensStat stat, Comparison op, double threshold);
  static SalienceLens gaussian(VariableId v, LensStat stat, double center, double scale);

  void validate() const;  // throws ConfigError

  /// Lens value for an already computed statistic.
  double weigh(double statistic) const;

  /// Statistic of a path through week `upto` (kCurrent reads week `upto`).
  template <class PathAt>
  double statistic(const PathAt& at, int upto) const;

  double operator()(const Trajectory& path) const;
  double operator()(const TrajectoryStore& store, int particle) const;
  /// Lens applied at week `week` (for per-week likelihood reweighting).
  double at_week(const TrajectoryStore& store, int particle, int week) const;
  double at_week(const Trajectory& path, int week) const;
};

std::string to_string(LensKind);
std::string to_string(LensStat);
std::string to_string(Comparison);
LensKind parse_lens_kind(const std::string&);
LensStat parse_lens_stat(const std::string&);
Comparison parse_comparison(const std::string&);

template <class PathAt>
double SalienceLens::statistic(const PathAt& at, int upto) const {
  switch (stat) {
    case LensStat::kTerminal:
    case LensStat::kCurrent:
      return at(upto, variable);
    case LensStat::kMin:
    case LensStat::kMax: {
      double best = at(1, variable);
      for (int w = 2; w <= upto; ++w) {
        const double x = at(w, variable);
        best = stat == LensStat::kMin ? (x < best ? x : best) : (x > best ? x : best);
      }
      return best;
    }
    case LensStat::kMean: {
      double sum = 0.0;
      for (int w = 1; w <= upto; ++w) sum += at(w, variable);
      return sum / upto;
    }
  }
  return 0.0;
}

}  // namespace csmc
