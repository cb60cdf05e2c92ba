#include "csmc/engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "csmc/error.hpp"
#include "csmc/rng.hpp"

namespace csmc {

void parallel_for(int n, int threads, const std::function<void(int, int)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    fn(0, n);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    const int begin = static_cast<int>(static_cast<long long>(n) * t / threads);
    const int end = static_cast<int>(static_cast<long long>(n) * (t + 1) / threads);
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
}

CompositeModel build_model(const RunConfig& c) {
  std::vector<DecorationHandle> decorations = {
      std::make_shared<ParameterDecoration<NKParams>>("nk-msv", c.nk),
      std::make_shared<ParameterDecoration<SEIRParams>>("seir-euler", c.epidemic),
      std::make_shared<ParameterDecoration<VaccineParams>>("vaccine-ratchet", c.vaccine),
      std::make_shared<ParameterDecoration<FiscalParams>>("fiscal-ratchet", c.fiscal),
  };
  const CouplingFabric fabric(c.coupling, c.vaccine, c.fiscal, c.factors, c.fiscal_on(),
                              c.symmetrised);
  CompositeModel m = compose(standard_narratives(c.fiscal_on(), decorations),
                             standard_identifications(), fabric.factors());
  validate_factor_graph(m);
  return m;
}

ParticleState initial_particle(const RunConfig& c) {
  ParticleState p;
  p.seir = c.epidemic.initial_state;
  p.strain = c.epidemic.initial_strain;
  p.vax = VaccineState{0.0, 0.0, c.vaccine.rho_0};
  if (c.fiscal_on()) p.fiscal = FiscalState{0.0, 0.0, c.fiscal.phi_0};
  p.labour = (1.0 - p.seir.D) - c.coupling.xi * p.seir.I;
  return p;
}

StepContext::StepContext(const RunConfig& c)
    : config(c),
      nk(solve_msv(c.nk)),
      fabric(c.coupling, c.vaccine, c.fiscal, c.factors, c.fiscal_on(), c.symmetrised) {}

void step_particle(ParticleState& p, const StepContext& ctx, std::uint32_t slot, int week) {
  const RunConfig& c = ctx.config;
  const auto w = static_cast<std::uint32_t>(week);

  CounterStream epi_rng(c.seed, slot, w, Subsystem::kEpidemic);
  const StrainArrival arrival = maybe_strain_arrival(p.strain, p.seir, c.epidemic, epi_rng);
  if (arrival.arrived) {
    p.strain = arrival.strain;
    p.seir = arrival.state;
    ++p.strain_count;
  }

  const CouplingOutput cpl = ctx.fabric.evaluate(p, week);
  const double I_start = p.seir.I;
  const double y_start = p.nk.y;

  p.seir = step_seir(p.seir, p.strain, c.epidemic, cpl.s_eff);

  CounterStream vax_rng(c.seed, slot, w, Subsystem::kVaccine);
  VaccineDrivers drivers;
  drivers.I = I_start;
  drivers.mandate_multiplier = cpl.mandate_multiplier;
  drivers.lambda_v_eff = cpl.lambda_v_eff;
  drivers.strain_arrived = arrival.arrived;
  drivers.uptake_boost = cpl.uptake_boost;
  p.vax = step_vaccine(p.vax, c.vaccine, drivers, vax_rng.uniform());

  CounterStream eco_rng(c.seed, slot, w, Subsystem::kEconomy);
  Eigen::Vector3d eta;
  eta(0) = eco_rng.normal();
  eta(1) = eco_rng.normal();
  eta(2) = eco_rng.normal();
  p.nk = step_nk(p.nk, ctx.nk, {cpl.delta_eps_s, cpl.delta_r_n}, eta);

  if (p.fiscal) {
    CounterStream fis_rng(c.seed, slot, w, Subsystem::kFiscal);
    p.fiscal = step_fiscal(*p.fiscal, c.fiscal, cpl.fiscal, y_start, fis_rng.normal());
  }
  p.labour = (1.0 - p.seir.D) - c.coupling.xi * p.seir.I;
  p.week = week + 1;
}

namespace {

void check_model(const CompositeModel& model, const RunConfig& c) {
  const bool has_fiscal = std::any_of(model.narratives.begin(), model.narratives.end(),
                                      [](const NarrativeCospan& n) { return n.name == "fiscal"; });
  if (has_fiscal != c.fiscal_on()) {
    throw ConfigError("composite model and config disagree on the fiscal narrative");
  }
  FactorMask in_model = FactorMask::none();
  for (const auto& f : model.factors) in_model.set(f.number, true);
  if (!(in_model == c.factors)) {
    throw ConfigError("composite model factors (" + in_model.to_string() +
                      ") differ from the configured mask (" + c.factors.to_string() + ")");
  }
}

std::string pairing_key(const RunConfig& c) {
  RunConfig k = c;
  k.mode = Mode::kCoupled;
  k.factors = FactorMask::none();
  k.symmetrised = FactorMask::none();
  k.cluster_k = 1;
  return to_config_text(k, false);
}

}  // namespace

TrajectoryStore run_simulation(const CompositeModel& model, const RunConfig& c,
                               const EngineOptions& opt) {
  c.validate();
  check_model(model, c);
  const StepContext ctx(c);
  const int threads = opt.threads;
  const int n = c.particles;

  TrajectoryStore store(n, c.weeks, c.fiscal_on());
  store.seed = c.seed;
  store.pairing_key = pairing_key(c);
  store.config_text = to_config_text(c, false);

  ParticleEnsemble ens;
  ens.states.assign(n, initial_particle(c));
  ens.weights.assign(n, 1.0 / n);
  ens.seed = c.seed;

  std::vector<double> log_w(n, 0.0);
  for (int week = 0; week < c.weeks; ++week) {
    parallel_for(n, threads, [&](int begin, int end) {
      for (int j = begin; j < end; ++j) {
        step_particle(ens.states[j], ctx, static_cast<std::uint32_t>(j), week);
        pack(ens.states[j], std::span<double>(store.row(week + 1, j), store.num_variables()));
      }
    });
    if (opt.weekly_likelihood && (week + 1) % std::max(1, opt.cadence) == 0) {
      const SalienceLens& lens = *opt.weekly_likelihood;
      double max_log = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) {
        log_w[j] = std::log(ens.weights[j]) + std::log(lens.at_week(store, j, week + 1));
        max_log = std::max(max_log, log_w[j]);
      }
      if (!std::isfinite(max_log)) {
        throw EmptySupportError("likelihood is zero for every particle at week " +
                                std::to_string(week + 1));
      }
      double total = 0.0;
      for (int j = 0; j < n; ++j) total += (ens.weights[j] = std::exp(log_w[j] - max_log));
      for (double& x : ens.weights) x /= total;
      const std::vector<int> ancestors = resample_if_needed(ens, week + 1);
      if (!ancestors.empty()) {
        store.apply_ancestry(week + 1, ancestors);
        ++store.resample_count;
      }
    }
  }
  store.set_weights(ens.weights);
  return store;
}

TrajectoryStore run_simulation(const RunConfig& c, const EngineOptions& opt) {
  return run_simulation(build_model(c), c, opt);
}

double ess(std::span<const double> w) {
  if (w.empty()) throw ContractError("ess of an empty weight vector");
  double sum = 0.0, sq = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw ContractError("negative or NaN weight");
    sum += x;
    sq += x * x;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ContractError("weights are not normalised");
  return std::clamp(1.0 / sq, 1.0, static_cast<double>(w.size()));
}

std::vector<int> systematic_resample(std::span<const double> w, double u0) {
  const int n = static_cast<int>(w.size());
  std::vector<int> ancestors(n);
  // Rounding in the running sum must never hand offspring to a zero-weight tail.
  int last = n - 1;
  while (last > 0 && !(w[last] > 0.0)) --last;
  double cumulative = w[0];
  int i = 0;
  for (int j = 0; j < n; ++j) {
    const double point = (u0 + j) / n;
    while (point >= cumulative && i < last) cumulative += w[++i];
    ancestors[j] = i;
  }
  return ancestors;
}

std::vector<int> resample_if_needed(ParticleEnsemble& e, int week) {
  const int n = static_cast<int>(e.weights.size());
  if (!(ess(e.weights) < 0.5 * n)) return {};
  CounterStream rng(e.seed, 0, static_cast<std::uint32_t>(week), Subsystem::kResample);
  const std::vector<int> ancestors = systematic_resample(e.weights, rng.uniform());
  std::vector<ParticleState> next(n);
  for (int j = 0; j < n; ++j) next[j] = e.states[ancestors[j]];
  e.states = std::move(next);
  e.weights.assign(n, 1.0 / n);
  return ancestors;
}

SalienceResult salience_reweight(const TrajectoryStore& store, const SalienceLens& lens) {
  const int n = store.particles();
  SalienceResult r;
  r.weights.resize(n);
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    const double l = lens(store, j);
    if (!(l >= 0.0)) throw ContractError("lens returned a negative or NaN value");
    r.weights[j] = store.weights()[j] * l;
    total += r.weights[j];
    r.support += r.weights[j] > 0.0;
  }
  if (!(total > 0.0)) throw EmptySupportError("lens '" + lens.name + "' is zero on every particle");
  for (double& x : r.weights) x /= total;
  r.ess = ess(r.weights);
  return r;
}

double path_log_likelihood(const Trajectory& path, const SalienceLens& lens, int cadence) {
  if (lens.stat != LensStat::kCurrent) return std::log(lens(path));
  double sum = 0.0;
  for (int w = cadence; w <= path.weeks; w += cadence) sum += std::log(lens.at_week(path, w));
  return sum;
}

InjectionReport inject_particle(const TrajectoryStore& store, const Trajectory& path,
                                const SalienceLens& likelihood, int cadence) {
  path.validate(store.weeks(), store.fiscal());
  const int n = store.particles();
  cadence = std::max(1, cadence);
  std::vector<double> log_w(n);
  double max_log = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    log_w[j] = std::log(store.weights()[j]) +
               path_log_likelihood(store.path(j), likelihood, cadence);
    max_log = std::max(max_log, log_w[j]);
  }
  if (!std::isfinite(max_log)) {
    throw EmptySupportError("likelihood '" + likelihood.name + "' is zero on every particle");
  }
  double total = 0.0;
  for (double x : log_w) total += std::exp(x - max_log);
  std::vector<double> w(n);
  for (int j = 0; j < n; ++j) w[j] = std::exp(log_w[j] - max_log) / total;

  InjectionReport r;
  const double prior = 1.0 / n;
  r.weight = std::exp(std::log(prior) + path_log_likelihood(path, likelihood, cadence) - max_log) /
             total;
  std::vector<double> sorted = w;
  std::sort(sorted.begin(), sorted.end());
  r.median_weight = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  r.ratio = r.median_weight > 0.0 ? r.weight / r.median_weight
                                  : (r.weight > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  r.comparable = r.ratio >= kComparableRatio;
  r.verdict = r.comparable ? "comparable to the median: sampling bias"
                           : "negligible: observations or structure reject it";
  return r;
}

Trajectory default_e_plus(const RunConfig& c) {
  Trajectory t(c.weeks, c.fiscal_on());
  constexpr int kInnovationWeek = 8;
  double v = 0.0, u = 0.0;
  const double rho = c.vaccine.rho_0;
  for (int w = 1; w <= c.weeks; ++w) {
    if (w == kInnovationWeek) v = std::min(1.0, v + c.vaccine.delta_v_jump);
    u += c.vaccine.theta_adopt * std::max(0.0, c.vaccine.target_base - u) - c.vaccine.theta_decay * u;
    u = std::clamp(std::min(u, 1.0 - rho), 0.0, 1.0);
    t.set(w, VariableId::S, 1.0);
    t.set(w, VariableId::L, 1.0);
    t.set(w, VariableId::R0, c.epidemic.initial_strain.R0);
    t.set(w, VariableId::ifr, c.epidemic.initial_strain.ifr);
    t.set(w, VariableId::v, v);
    t.set(w, VariableId::u, u);
    t.set(w, VariableId::rho, rho);
    if (c.fiscal_on()) t.set(w, VariableId::phi, c.fiscal.phi_0);
  }
  return t;
}

Trajectory read_trajectory_file(const std::string& file, const RunConfig& c) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read trajectory file '" + file + "'");
  Trajectory t(c.weeks, c.fiscal_on());
  std::vector<char> seen(t.values.size(), 0);
  std::string line;
  std::getline(in, line);
  if (line.rfind("particle_id,week,variable,value", 0) != 0) {
    throw ContractError("trajectory file '" + file + "' has an unexpected header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string pid, week, var, value;
    std::getline(ss, pid, ',');
    std::getline(ss, week, ',');
    std::getline(ss, var, ',');
    std::getline(ss, value, ',');
    int w = 0;
    double x = 0.0;
    try {
      w = std::stoi(week);
      x = std::stod(value);
    } catch (const std::exception&) {
      throw ContractError("malformed trajectory row '" + line + "'");
    }
    if (w < 1 || w > c.weeks) throw ContractError("trajectory week out of range in '" + line + "'");
    const VariableId v = variable_from_name(var);
    if (static_cast<int>(v) >= t.num_variables()) {
      throw ContractError("trajectory variable '" + var + "' not present in this narrative set");
    }
    t.set(w, v, x);
    seen[static_cast<std::size_t>(w - 1) * t.num_variables() + static_cast<int>(v)] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw ContractError("trajectory file '" + file + "' does not cover every week and variable");
  }
  t.validate(c.weeks, c.fiscal_on());
  return t;
}

double region_mass(const TrajectoryStore& store, std::span<const double> w,
                   const SalienceLens& region) {
  double mass = 0.0;
  for (int j = 0; j < store.particles(); ++j) mass += w[j] * region(store, j);
  return mass;
}

ObservationComparison run_observation_free_vs_likelihood(const RunConfig& c,
                                                         const SalienceLens& likelihood,
                                                         const SalienceLens& region,
                                                         int threads) {
  const CompositeModel model = build_model(c);
  EngineOptions plain;
  plain.threads = threads;
  const TrajectoryStore uniform = run_simulation(model, c, plain);

  EngineOptions observed = plain;
  observed.weekly_likelihood = &likelihood;
  observed.cadence = c.likelihood_cadence;
  const TrajectoryStore weighted = run_simulation(model, c, observed);

  ObservationComparison r;
  r.mass_uniform = region_mass(uniform, uniform.weights(), region);
  r.mass_likelihood = region_mass(weighted, weighted.weights(), region);
  r.observational = r.mass_uniform - r.mass_likelihood;
  r.final_ess = ess(weighted.weights());
  r.resamples = weighted.resample_count;
  return r;
}

}  // namespace csmc
