// Command-line front end: simulate, compare, cluster, salience, decompose, topology.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "csmc/analysis.hpp"
#include "csmc/composition.hpp"
#include "csmc/config.hpp"
#include "csmc/engine.hpp"
#include "csmc/error.hpp"
#include "csmc/output.hpp"

namespace {

using namespace csmc;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string mode, calibration, factors, output;
  int narratives = 0, particles = 0, weeks = 0, cluster_k = 0, threads = 0;
  long long seed = -1;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config_path, "Config file (sectioned key = value)");
  cmd->add_option("--set", o.overrides, "Override, e.g. --set nk.kappa=0.03 (repeatable)");
  cmd->add_option("--mode", o.mode, "coupled | uncoupled");
  cmd->add_option("--narratives", o.narratives, "3 or 4");
  cmd->add_option("--calibration", o.calibration, "baseline | us-scale");
  cmd->add_option("--particles", o.particles, "Number of particles");
  cmd->add_option("--weeks", o.weeks, "Horizon in weeks");
  cmd->add_option("--seed", o.seed, "Run seed");
  cmd->add_option("--factors", o.factors, "Factor mask, e.g. f1,f2,f4 or all or none");
  cmd->add_option("--cluster-k", o.cluster_k, "Number of archetypes");
  cmd->add_option("-o,--output", o.output, "Output directory");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
}

RunConfig resolve(const CommonOptions& o) {
  std::string text;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw ConfigError("cannot read config file '" + o.config_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  auto add = [&](const std::string& key, const std::string& value) {
    text = append_override(text, key + "=" + value);
  };
  if (!o.mode.empty()) add("run.mode", o.mode);
  if (o.narratives) add("run.narratives", std::to_string(o.narratives));
  if (!o.calibration.empty()) add("run.calibration", o.calibration);
  if (o.particles) add("run.particles", std::to_string(o.particles));
  if (o.weeks) add("run.weeks", std::to_string(o.weeks));
  if (o.seed >= 0) add("run.seed", std::to_string(o.seed));
  if (!o.factors.empty()) add("run.factors", o.factors);
  if (o.cluster_k) add("run.cluster_k", std::to_string(o.cluster_k));
  if (!o.output.empty()) add("run.output_dir", o.output);
  for (const auto& ov : o.overrides) text = append_override(text, ov);
  return parse_config(text);
}

void report(const std::vector<ManifestEntry>& files, const std::string& dir) {
  for (const auto& f : files) std::cout << dir << "/" << f.file << "  " << f.sha256 << "\n";
}

int cmd_simulate(const CommonOptions& o) {
  const RunConfig c = resolve(o);
  preflight_output_dir(c.output_dir);
  const TrajectoryStore store = run_simulation(c, {o.threads});
  const auto corr = rolling_correlations(store, default_correlation_pairs(store.fiscal()), store.weights());
  RunOutputs out;
  out.config = &c;
  out.store = &store;
  out.correlations = &corr;
  report(emit_outputs(out, c.output_dir), c.output_dir);
  return 0;
}

int cmd_compare(const CommonOptions& o) {
  RunConfig coupled = resolve(o);
  if (coupled.mode != Mode::kCoupled) throw ConfigError("compare expects a coupled config");
  RunConfig uncoupled = coupled;
  uncoupled.mode = Mode::kUncoupled;
  uncoupled.factors = FactorMask::none();
  uncoupled.symmetrised = FactorMask::none();
  preflight_output_dir(coupled.output_dir);
  const TrajectoryStore cs = run_simulation(coupled, {o.threads});
  const TrajectoryStore us = run_simulation(uncoupled, {o.threads});
  const BiasReport bias = bias_table(cs, us);

  for (const auto& [name, cfg, store] :
       {std::tuple{"coupled", &coupled, &cs}, std::tuple{"uncoupled", &uncoupled, &us}}) {
    const std::string dir = coupled.output_dir + "/" + name;
    const auto corr = rolling_correlations(*store, default_correlation_pairs(store->fiscal()), store->weights());
    RunOutputs out;
    out.config = cfg;
    out.store = store;
    out.correlations = &corr;
    report(emit_outputs(out, dir), dir);
  }
  RunOutputs top;
  top.bias = &bias;
  report(emit_outputs(top, coupled.output_dir), coupled.output_dir);
  for (const auto& row : bias.rows) {
    std::cout << row.variable << ": coupled " << format_double(row.coupled.mean) << " uncoupled "
              << format_double(row.uncoupled.mean) << " shift " << format_double(row.shift) << "\n";
  }
  return 0;
}

int cmd_cluster(const CommonOptions& o) {
  const RunConfig c = resolve(o);
  preflight_output_dir(c.output_dir);
  const TrajectoryStore store = run_simulation(c, {o.threads});
  const ArchetypeSet set = build_archetypes(store, c.cluster_k, c.seed);
  const auto corr = rolling_correlations(store, default_correlation_pairs(store.fiscal()), store.weights());
  nlohmann::json extra;
  extra["archetypes"] = nlohmann::json::array();
  for (const auto& a : set.clusters) {
    nlohmann::json features;
    for (std::size_t f = 0; f < set.feature_names.size(); ++f) {
      features[set.feature_names[f]] = a.feature_means[f];
    }
    extra["archetypes"].push_back(
        {{"weight", a.weight}, {"medoid", a.medoid}, {"members", a.members}, {"features", features}});
  }
  RunOutputs out;
  out.config = &c;
  out.store = &store;
  out.archetypes = &set;
  out.correlations = &corr;
  out.extra_summary = extra;
  report(emit_outputs(out, c.output_dir), c.output_dir);
  return 0;
}

int cmd_salience(const CommonOptions& o, const std::vector<std::string>& lens_names) {
  const RunConfig c = resolve(o);
  std::vector<std::string> names = lens_names;
  if (names.empty()) names = {"recession"};
  for (const auto& n : names) c.lens(n);
  preflight_output_dir(c.output_dir);
  const TrajectoryStore store = run_simulation(c, {o.threads});
  nlohmann::json extra;
  const WeightedMoments deaths = terminal_moments(store, VariableId::D);
  extra["unconditional_mean_deaths"] = deaths.mean;
  extra["lenses"] = nlohmann::json::array();
  for (const auto& n : names) {
    const SalienceResult s = salience_reweight(store, c.lens(n));
    double mean_d = 0.0, mean_y = 0.0;
    for (int p = 0; p < store.particles(); ++p) {
      mean_d += s.weights[p] * store.terminal(p, VariableId::D);
      mean_y += s.weights[p] * store.terminal(p, VariableId::y);
    }
    extra["lenses"].push_back({{"lens", n},
                               {"ess", s.ess},
                               {"support", s.support},
                               {"mean_deaths", mean_d},
                               {"mean_y", mean_y}});
    std::cout << n << ": ESS " << format_double(s.ess) << ", mean deaths "
              << format_double(mean_d) << " vs " << format_double(deaths.mean) << "\n";
  }
  RunOutputs out;
  out.config = &c;
  out.store = &store;
  out.extra_summary = extra;
  report(emit_outputs(out, c.output_dir), c.output_dir);
  return 0;
}

int cmd_decompose(const CommonOptions& o) {
  const RunConfig c = resolve(o);
  preflight_output_dir(c.output_dir);
  const BiasReport r = bias_decomposition(c, o.threads);
  RunOutputs out;
  out.bias = &r;
  report(emit_outputs(out, c.output_dir), c.output_dir);
  for (const auto& e : r.decomposition) {
    std::cout << e.source << ": " << format_double(e.value) << " (" << e.interpretation << ")\n";
  }
  return 0;
}

int cmd_topology(const CommonOptions& o, const std::string& file) {
  const RunConfig c = resolve(o);
  const std::string text = topology_json(build_model(c)).dump(2) + "\n";
  if (file.empty() || file == "-") {
    std::cout << text;
  } else {
    std::ofstream out(file);
    if (!(out << text)) throw IoError("cannot write '" + file + "'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled-narrative sequential Monte Carlo"};
  app.require_subcommand(1);
  CommonOptions sim_o, cmp_o, clu_o, sal_o, dec_o, top_o;
  auto* sim = app.add_subcommand("simulate", "Run the ensemble and write trajectories");
  add_common(sim, sim_o);
  auto* cmp = app.add_subcommand("compare", "Paired coupled/uncoupled runs and the bias table");
  add_common(cmp, cmp_o);
  auto* clu = app.add_subcommand("cluster", "k-medoids archetypes");
  add_common(clu, clu_o);
  auto* sal = app.add_subcommand("salience", "Second-pass lens reweighting");
  add_common(sal, sal_o);
  std::vector<std::string> lenses;
  sal->add_option("--lens", lenses, "Lens name from the config (repeatable)");
  auto* dec = app.add_subcommand("decompose", "Sampling / structural / observational bias tests");
  add_common(dec, dec_o);
  auto* top = app.add_subcommand("topology", "Dump the composed factor graph as JSON");
  add_common(top, top_o);
  std::string topology_file;
  top->add_option("--file", topology_file, "Write to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    int rc = 0;
    if (*sim) rc = cmd_simulate(sim_o);
    else if (*cmp) rc = cmd_compare(cmp_o);
    else if (*clu) rc = cmd_cluster(clu_o);
    else if (*sal) rc = cmd_salience(sal_o, lenses);
    else if (*dec) rc = cmd_decompose(dec_o);
    else if (*top) rc = cmd_topology(top_o, topology_file);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!*top) std::cerr << "done in " << secs << " s\n";
    return rc;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
