#include "csmc/lens.hpp"

#include <cmath>

#include "csmc/error.hpp"

namespace csmc {

SalienceLens SalienceLens::constant(double value) {
  SalienceLens l;
  l.name = "constant";
  l.kind = LensKind::kConstant;
  l.value = value;
  return l;
}

SalienceLens SalienceLens::indicator(VariableId v, LensStat stat, Comparison op,
                                     double threshold) {
  SalienceLens l;
  l.name = "indicator";
  l.kind = LensKind::kIndicator;
  l.variable = v;
  l.stat = stat;
  l.op = op;
  l.threshold = threshold;
  return l;
}

SalienceLens SalienceLens::gaussian(VariableId v, LensStat stat, double center, double scale) {
  SalienceLens l;
  l.name = "gaussian";
  l.kind = LensKind::kGaussian;
  l.variable = v;
  l.stat = stat;
  l.center = center;
  l.scale = scale;
  return l;
}

void SalienceLens::validate() const {
  if (kind == LensKind::kConstant && !(value >= 0.0 && std::isfinite(value))) {
    throw ConfigError("lens " + name + ": constant value must be finite and non-negative");
  }
  if (kind == LensKind::kGaussian && !(scale > 0.0 && std::isfinite(center))) {
    throw ConfigError("lens " + name + ": gaussian scale must be positive");
  }
  if (kind == LensKind::kIndicator && !std::isfinite(threshold)) {
    throw ConfigError("lens " + name + ": indicator threshold must be finite");
  }
}

double SalienceLens::weigh(double s) const {
  switch (kind) {
    case LensKind::kConstant:
      return value;
    case LensKind::kIndicator:
      switch (op) {
        case Comparison::kLess: return s < threshold ? 1.0 : 0.0;
        case Comparison::kLessEqual: return s <= threshold ? 1.0 : 0.0;
        case Comparison::kGreater: return s > threshold ? 1.0 : 0.0;
        case Comparison::kGreaterEqual: return s >= threshold ? 1.0 : 0.0;
      }
      break;
    case LensKind::kGaussian: {
      const double z = (s - center) / scale;
      return std::exp(-0.5 * z * z);
    }
  }
  return 0.0;
}

double SalienceLens::operator()(const Trajectory& path) const {
  if (kind == LensKind::kConstant) return value;
  return weigh(statistic([&](int w, VariableId v) { return path.at(w, v); }, path.weeks));
}

double SalienceLens::operator()(const TrajectoryStore& store, int particle) const {
  if (kind == LensKind::kConstant) return value;
  return weigh(statistic([&](int w, VariableId v) { return store.at(w, particle, v); },
                         store.weeks()));
}

double SalienceLens::at_week(const TrajectoryStore& store, int particle, int week) const {
  if (kind == LensKind::kConstant) return value;
  return weigh(statistic([&](int w, VariableId v) { return store.at(w, particle, v); }, week));
}

double SalienceLens::at_week(const Trajectory& path, int week) const {
  if (kind == LensKind::kConstant) return value;
  return weigh(statistic([&](int w, VariableId v) { return path.at(w, v); }, week));
}

std::string to_string(LensKind k) {
  switch (k) {
    case LensKind::kConstant: return "constant";
    case LensKind::kIndicator: return "indicator";
    case LensKind::kGaussian: return "gaussian";
  }
  return "";
}

std::string to_string(LensStat s) {
  switch (s) {
    case LensStat::kTerminal: return "terminal";
    case LensStat::kMin: return "min";
    case LensStat::kMax: return "max";
    case LensStat::kMean: return "mean";
    case LensStat::kCurrent: return "current";
  }
  return "";
}

std::string to_string(Comparison c) {
  switch (c) {
    case Comparison::kLess: return "<";
    case Comparison::kLessEqual: return "<=";
    case Comparison::kGreater: return ">";
    case Comparison::kGreaterEqual: return ">=";
  }
  return "";
}

LensKind parse_lens_kind(const std::string& s) {
  if (s == "constant") return LensKind::kConstant;
  if (s == "indicator") return LensKind::kIndicator;
  if (s == "gaussian") return LensKind::kGaussian;
  throw ConfigError("unknown lens kind '" + s + "'");
}

LensStat parse_lens_stat(const std::string& s) {
  if (s == "terminal") return LensStat::kTerminal;
  if (s == "min") return LensStat::kMin;
  if (s == "max") return LensStat::kMax;
  if (s == "mean") return LensStat::kMean;
  if (s == "current") return LensStat::kCurrent;
  throw ConfigError("unknown lens statistic '" + s + "'");
}

Comparison parse_comparison(const std::string& s) {
  if (s == "<" || s == "lt") return Comparison::kLess;
  if (s == "<=" || s == "le") return Comparison::kLessEqual;
  if (s == ">" || s == "gt") return Comparison::kGreater;
  if (s == ">=" || s == "ge") return Comparison::kGreaterEqual;
  throw ConfigError("unknown comparison '" + s + "'");
}

}  // namespace csmc
