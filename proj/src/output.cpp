#include "csmc/output.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>

#include "csmc/error.hpp"

namespace csmc {
namespace fs = std::filesystem;

namespace {

std::string hex(const unsigned char* digest, unsigned len) {
  static const char* kDigits = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += kDigits[digest[i] >> 4];
    out += kDigits[digest[i] & 0xf];
  }
  return out;
}

struct Sha256 {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(), &EVP_MD_CTX_free};
  Sha256() {
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
      throw IoError("SHA-256 initialisation failed");
    }
  }
  void update(const void* data, std::size_t len) { EVP_DigestUpdate(ctx.get(), data, len); }
  std::string final() {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    return hex(digest, len);
  }
};

// Fast 17-significant-digit formatting for the large CSVs.
inline void put_double(std::string& buf, double x) {
  if (std::isnan(x)) {
    buf += "NA";
    return;
  }
  char tmp[32];
  const auto r = std::to_chars(tmp, tmp + sizeof tmp, x, std::chars_format::general, 17);
  buf.append(tmp, r.ptr);
}

inline void put_int(std::string& buf, long long x) {
  char tmp[24];
  const auto r = std::to_chars(tmp, tmp + sizeof tmp, x);
  buf.append(tmp, r.ptr);
}

void flush_if_large(std::string& buf, std::ostream& out) {
  if (buf.size() > (1u << 20)) {
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    buf.clear();
  }
}

nlohmann::json number_or_null(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

}  // namespace

std::string sha256_hex(const std::string& data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.final();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "' for hashing");
  Sha256 h;
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.final();
}

void preflight_output_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("output directory '" + dir + "' cannot be created: " + ec.message());
  }
  const fs::path probe = fs::path(dir) / ".write-probe";
  {
    std::ofstream out(probe);
    if (!(out << "ok")) throw IoError("output directory '" + dir + "' is not writable");
  }
  fs::remove(probe, ec);
}

void write_trajectories_csv(const TrajectoryStore& store, std::ostream& out) {
  std::string buf = "particle_id,week,variable,value\n";
  const int vars = store.num_variables();
  for (int p = 0; p < store.particles(); ++p) {
    for (int w = 1; w <= store.weeks(); ++w) {
      const double* row = store.row(w, p);
      for (int v = 0; v < vars; ++v) {
        put_int(buf, p);
        buf += ',';
        put_int(buf, w);
        buf += ',';
        buf += variable_name(static_cast<VariableId>(v));
        buf += ',';
        put_double(buf, row[v]);
        buf += '\n';
      }
    }
    flush_if_large(buf, out);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_trajectory_csv(const Trajectory& path, std::ostream& out) {
  std::string buf = "particle_id,week,variable,value\n";
  for (int w = 1; w <= path.weeks; ++w) {
    for (int v = 0; v < path.num_variables(); ++v) {
      buf += "0,";
      put_int(buf, w);
      buf += ',';
      buf += variable_name(static_cast<VariableId>(v));
      buf += ',';
      put_double(buf, path.at(w, static_cast<VariableId>(v)));
      buf += '\n';
    }
  }
  out << buf;
}

void write_quantiles_csv(const TrajectoryStore& store, std::ostream& out) {
  std::string buf = "week,variable,q05,q25,q50,q75,q95\n";
  std::vector<std::vector<std::array<double, 5>>> per_var;
  for (int v = 0; v < store.num_variables(); ++v) {
    per_var.push_back(weekly_quantiles(store, static_cast<VariableId>(v)));
  }
  for (int w = 1; w <= store.weeks(); ++w) {
    for (int v = 0; v < store.num_variables(); ++v) {
      put_int(buf, w);
      buf += ',';
      buf += variable_name(static_cast<VariableId>(v));
      for (double q : per_var[v][w - 1]) {
        buf += ',';
        put_double(buf, q);
      }
      buf += '\n';
    }
  }
  out << buf;
}

void write_archetypes_csv(const ArchetypeSet& set, const std::vector<double>& weights,
                          std::ostream& out) {
  std::string buf = "cluster,weight,medoid,members,kind,key,week,value\n";
  auto prefix = [&](int c) {
    const Archetype& a = set.clusters[c];
    put_int(buf, c);
    buf += ',';
    put_double(buf, a.weight);
    buf += ',';
    put_int(buf, a.medoid);
    buf += ',';
    put_int(buf, a.members);
    buf += ',';
  };
  for (int c = 0; c < static_cast<int>(set.clusters.size()); ++c) {
    const Archetype& a = set.clusters[c];
    for (std::size_t f = 0; f < set.feature_names.size(); ++f) {
      prefix(c);
      buf += "feature," + set.feature_names[f] + ",0,";
      put_double(buf, a.feature_means[f]);
      buf += '\n';
    }
    for (int w = 1; w <= a.trajectory.weeks; ++w) {
      for (int v = 0; v < a.trajectory.num_variables(); ++v) {
        prefix(c);
        buf += "trajectory,";
        buf += variable_name(static_cast<VariableId>(v));
        buf += ',';
        put_int(buf, w);
        buf += ',';
        put_double(buf, a.trajectory.at(w, static_cast<VariableId>(v)));
        buf += '\n';
      }
    }
    flush_if_large(buf, out);
  }
  for (int p = 0; p < static_cast<int>(set.assignment.size()); ++p) {
    prefix(set.assignment[p]);
    buf += "member,";
    put_int(buf, p);
    buf += ",0,";
    put_double(buf, weights[p]);
    buf += '\n';
    flush_if_large(buf, out);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_correlations_csv(const std::vector<CorrelationSeries>& series, std::ostream& out) {
  std::string buf = "week,variable_a,variable_b,correlation\n";
  for (const auto& s : series) {
    for (std::size_t w = 0; w < s.by_week.size(); ++w) {
      put_int(buf, static_cast<long long>(w + 1));
      buf += ',';
      buf += variable_name(s.a);
      buf += ',';
      buf += variable_name(s.b);
      buf += ',';
      if (s.by_week[w]) put_double(buf, *s.by_week[w]);
      else buf += "NA";
      buf += '\n';
    }
  }
  out << buf;
}

nlohmann::json bias_report_json(const BiasReport& r) {
  using nlohmann::json;
  json j;
  j["rows"] = json::array();
  for (const auto& row : r.rows) {
    j["rows"].push_back({{"variable", row.variable},
                         {"coupled_mean", row.coupled.mean},
                         {"coupled_sd", row.coupled.sd},
                         {"uncoupled_mean", row.uncoupled.mean},
                         {"uncoupled_sd", row.uncoupled.sd},
                         {"shift", row.shift}});
  }
  j["decomposition"] = json::array();
  for (const auto& e : r.decomposition) {
    j["decomposition"].push_back({{"source", e.source},
                                  {"diagnostic", e.diagnostic},
                                  {"value", number_or_null(e.value)},
                                  {"interpretation", e.interpretation}});
  }
  j["asymmetry"] = json::array();
  for (const auto& a : r.asymmetry) {
    const bool zero = a.result.outcome == AsymmetryResult::Outcome::kZeroFactor;
    j["asymmetry"].push_back({{"factor", a.factor},
                              {"outcome", zero ? "zero-factor" : "ratio"},
                              {"ratio", zero ? json(nullptr) : json(a.result.ratio)},
                              {"sign_definite", a.result.sign_definite}});
  }
  if (r.injection) {
    j["injection"] = {{"weight", r.injection->weight},
                      {"median_weight", r.injection->median_weight},
                      {"ratio", number_or_null(r.injection->ratio)},
                      {"comparable", r.injection->comparable},
                      {"verdict", r.injection->verdict}};
  } else {
    j["injection"] = nullptr;
  }
  if (r.observation) {
    j["observation"] = {{"mass_uniform", r.observation->mass_uniform},
                        {"mass_likelihood", r.observation->mass_likelihood},
                        {"observational", r.observation->observational},
                        {"final_ess", r.observation->final_ess},
                        {"resamples", r.observation->resamples}};
  } else {
    j["observation"] = nullptr;
  }
  j["constructive_original"] = r.constructive_original;
  j["constructive_symmetrised"] = r.constructive_symmetrised;
  return j;
}

nlohmann::json summary_json(const RunConfig& c, const TrajectoryStore& store) {
  using nlohmann::json;
  json h;
  std::vector<VariableId> vars = {VariableId::y, VariableId::pi, VariableId::i, VariableId::I,
                                  VariableId::D, VariableId::rho, VariableId::v, VariableId::u,
                                  VariableId::strains};
  if (store.fiscal()) {
    for (VariableId v : {VariableId::g, VariableId::d, VariableId::phi}) vars.push_back(v);
  }
  for (VariableId v : vars) {
    const WeightedMoments m = terminal_moments(store, v);
    h[std::string(variable_name(v)) + "_T"] = {{"mean", m.mean}, {"sd", m.sd}};
  }
  const auto& w = store.weights();
  double overshoot = 0.0;
  for (int p = 0; p < store.particles(); ++p) {
    overshoot += w[p] * (store.terminal(p, VariableId::y) > 0.0 ? 1.0 : 0.0);
  }
  h["fraction_y_T_positive"] = overshoot;
  const BifurcationStats b = bifurcation(store);
  h["bifurcation"] = {{"threshold", b.threshold},
                      {"low_mass", b.low_mass},
                      {"high_mass", b.high_mass},
                      {"low_mean_y", number_or_null(b.low_mean_y)},
                      {"high_mean_y", number_or_null(b.high_mean_y)}};
  if (store.fiscal()) {
    double peak = 0.0;
    for (int p = 0; p < store.particles(); ++p) {
      double m = 0.0;
      for (int wk = 1; wk <= store.weeks(); ++wk) m = std::max(m, store.at(wk, p, VariableId::g));
      peak += w[p] * m;
    }
    h["mean_peak_g"] = peak;
  }
  h["ess"] = ess(w);
  h["resamples"] = store.resample_count;

  json j;
  j["config_text"] = to_config_text(c, false);
  j["config"] = {{"mode", to_string(c.mode)},
                 {"narratives", c.narratives},
                 {"calibration", to_string(c.calibration)},
                 {"particles", c.particles},
                 {"weeks", c.weeks},
                 {"factors", c.factors.to_string()},
                 {"symmetrise", c.symmetrised.to_string()},
                 {"cluster_k", c.cluster_k}};
  j["seed"] = c.seed;
  j["headline"] = h;
  return j;
}

namespace {

ManifestEntry write_atomically(const fs::path& dir, const std::string& name,
                               const std::function<void(std::ostream&)>& body) {
  const fs::path final_path = dir / name;
  const fs::path tmp = dir / ("." + name + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    body(out);
    out.flush();
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, final_path, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' into place: " + ec.message());
  return {name, sha256_file(final_path.string()), fs::file_size(final_path)};
}

void dump_json(std::ostream& out, const nlohmann::json& j) { out << j.dump(2) << '\n'; }

}  // namespace

std::vector<ManifestEntry> emit_outputs(const RunOutputs& o, const std::string& dir) {
  preflight_output_dir(dir);
  const fs::path d(dir);
  std::vector<ManifestEntry> files;
  if (o.store) {
    files.push_back(write_atomically(d, "trajectories.csv",
                                     [&](std::ostream& s) { write_trajectories_csv(*o.store, s); }));
    files.push_back(write_atomically(d, "quantiles.csv",
                                     [&](std::ostream& s) { write_quantiles_csv(*o.store, s); }));
  }
  if (o.archetypes && o.store) {
    files.push_back(write_atomically(d, "archetypes.csv", [&](std::ostream& s) {
      write_archetypes_csv(*o.archetypes, o.store->weights(), s);
    }));
  }
  if (o.correlations) {
    files.push_back(write_atomically(
        d, "correlations.csv", [&](std::ostream& s) { write_correlations_csv(*o.correlations, s); }));
  }
  if (o.bias) {
    files.push_back(write_atomically(
        d, "bias_report.json", [&](std::ostream& s) { dump_json(s, bias_report_json(*o.bias)); }));
  }
  if (o.config && o.store) {
    nlohmann::json summary = summary_json(*o.config, *o.store);
    if (!o.extra_summary.is_null()) summary["analysis"] = o.extra_summary;
    files.push_back(
        write_atomically(d, "summary.json", [&](std::ostream& s) { dump_json(s, summary); }));
  }
  nlohmann::json manifest;
  manifest["files"] = nlohmann::json::array();
  for (const auto& f : files) {
    manifest["files"].push_back({{"file", f.file}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  }
  write_atomically(d, "manifest.json", [&](std::ostream& s) { dump_json(s, manifest); });
  return files;
}

}  // namespace csmc
