#include "csmc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "csmc/error.hpp"
#include "csmc/rng.hpp"

namespace csmc {

std::vector<std::string> feature_names(bool fiscal) {
  std::vector<std::string> names = {"peak_I",   "peak_week", "deaths",
                                    "y_trough", "rho_final", "strains",
                                    "mean_I",   "mean_y",    "eff_vacc_weeks"};
  if (fiscal) {
    for (const char* n : {"peak_g", "debt_final", "phi_final", "g_final"}) names.emplace_back(n);
  }
  return names;
}

namespace {

template <class At>
std::vector<double> features_of(const At& at, int weeks, bool fiscal) {
  double peak_I = -1.0, peak_week = 0.0, y_trough = std::numeric_limits<double>::infinity();
  double sum_I = 0.0, sum_y = 0.0, eff = 0.0, peak_g = 0.0;
  for (int w = 1; w <= weeks; ++w) {
    const double I = at(w, VariableId::I);
    if (I > peak_I) {
      peak_I = I;
      peak_week = w;
    }
    const double y = at(w, VariableId::y);
    y_trough = std::min(y_trough, y);
    sum_I += I;
    sum_y += y;
    eff += at(w, VariableId::v) * at(w, VariableId::u) * (1.0 - at(w, VariableId::rho));
    if (fiscal) peak_g = std::max(peak_g, at(w, VariableId::g));
  }
  std::vector<double> f = {peak_I,
                           peak_week,
                           at(weeks, VariableId::D),
                           y_trough,
                           at(weeks, VariableId::rho),
                           at(weeks, VariableId::strains),
                           sum_I / weeks,
                           sum_y / weeks,
                           eff};
  if (fiscal) {
    f.push_back(peak_g);
    f.push_back(at(weeks, VariableId::d));
    f.push_back(at(weeks, VariableId::phi));
    f.push_back(at(weeks, VariableId::g));
  }
  return f;
}

double sq_distance(const FeatureMatrix& m, int a, int b) {
  double s = 0.0;
  for (int c = 0; c < m.cols; ++c) {
    const double d = m.at(a, c) - m.at(b, c);
    s += d * d;
  }
  return s;
}

}  // namespace

std::vector<double> extract_features(const Trajectory& path) {
  return features_of([&](int w, VariableId v) { return path.at(w, v); }, path.weeks, path.fiscal);
}

FeatureMatrix extract_features(const TrajectoryStore& store) {
  FeatureMatrix m;
  m.names = feature_names(store.fiscal());
  m.rows = store.particles();
  m.cols = static_cast<int>(m.names.size());
  m.values.resize(static_cast<std::size_t>(m.rows) * m.cols);
  for (int p = 0; p < m.rows; ++p) {
    const auto f = features_of([&](int w, VariableId v) { return store.at(w, p, v); },
                               store.weeks(), store.fiscal());
    std::copy(f.begin(), f.end(), &m.values[static_cast<std::size_t>(p) * m.cols]);
  }
  return m;
}

FeatureMatrix standardise(const FeatureMatrix& f) {
  FeatureMatrix z = f;
  for (int c = 0; c < f.cols; ++c) {
    double mean = 0.0;
    for (int r = 0; r < f.rows; ++r) mean += f.at(r, c);
    mean /= f.rows;
    double var = 0.0;
    for (int r = 0; r < f.rows; ++r) var += (f.at(r, c) - mean) * (f.at(r, c) - mean);
    const double sd = std::sqrt(var / f.rows);
    for (int r = 0; r < f.rows; ++r) z.at(r, c) = sd > 0.0 ? (f.at(r, c) - mean) / sd : 0.0;
  }
  return z;
}

Clustering kmedoids(const FeatureMatrix& input, int k, const std::vector<double>& weights,
                    std::uint64_t seed, int max_passes) {
  const int n = input.rows;
  if (k < 1) throw ContractError("kmedoids needs k >= 1");
  if (static_cast<int>(weights.size()) != n) throw ContractError("weight count differs from rows");

  // Canonical row order: lexicographic on features, then weight.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto row_less = [&](int a, int b) {
    for (int c = 0; c < input.cols; ++c) {
      if (input.at(a, c) != input.at(b, c)) return input.at(a, c) < input.at(b, c);
    }
    return weights[a] < weights[b];
  };
  std::sort(order.begin(), order.end(), row_less);
  FeatureMatrix m = input;
  std::vector<double> w(n);
  for (int r = 0; r < n; ++r) {
    std::copy_n(&input.values[static_cast<std::size_t>(order[r]) * input.cols], input.cols,
                &m.values[static_cast<std::size_t>(r) * m.cols]);
    w[r] = weights[order[r]];
  }
  int distinct = n > 0 ? 1 : 0;
  for (int r = 1; r < n; ++r) distinct += sq_distance(m, r - 1, r) > 0.0;
  if (k > distinct) {
    throw ContractError("k = " + std::to_string(k) + " exceeds the " + std::to_string(distinct) +
                        " distinct points");
  }
  auto dist = [&](int a, int b) { return std::sqrt(sq_distance(m, a, b)); };

  // k-medoids++ seeding.
  CounterStream rng(seed, 0, 0, Subsystem::kClustering);
  std::vector<int> med;
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  auto pick = [&](const std::vector<double>& mass) {
    const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
    if (!(total > 0.0)) {
      for (int r = 0; r < n; ++r) {
        if (nearest[r] > 0.0 && std::find(med.begin(), med.end(), r) == med.end()) return r;
      }
      throw ContractError("kmedoids seeding found no candidate");
    }
    const double target = rng.uniform() * total;
    double acc = 0.0;
    for (int r = 0; r < n; ++r) {
      acc += mass[r];
      if (acc > target && mass[r] > 0.0) return r;
    }
    for (int r = n - 1; r >= 0; --r) {
      if (mass[r] > 0.0) return r;
    }
    return n - 1;
  };
  std::vector<double> mass(n);
  for (int j = 0; j < k; ++j) {
    for (int r = 0; r < n; ++r) mass[r] = j == 0 ? w[r] : w[r] * nearest[r] * nearest[r];
    if (j == 0 && !(std::accumulate(w.begin(), w.end(), 0.0) > 0.0)) mass.assign(n, 1.0);
    const int c = pick(mass);
    med.push_back(c);
    for (int r = 0; r < n; ++r) nearest[r] = std::min(nearest[r], dist(r, c));
  }

  // Nearest and second-nearest medoid bookkeeping.
  std::vector<int> near_idx(n);
  std::vector<double> dn(n), ds(n);
  auto refresh = [&](int r) {
    dn[r] = ds[r] = std::numeric_limits<double>::infinity();
    near_idx[r] = 0;
    for (int j = 0; j < k; ++j) {
      const double d = dist(r, med[j]);
      if (d < dn[r]) {
        ds[r] = dn[r];
        dn[r] = d;
        near_idx[r] = j;
      } else if (d < ds[r]) {
        ds[r] = d;
      }
    }
  };
  for (int r = 0; r < n; ++r) refresh(r);
  auto objective = [&] {
    double s = 0.0;
    for (int r = 0; r < n; ++r) s += w[r] * dn[r];
    return s;
  };

  Clustering out;
  out.objective_trace.push_back(objective());
  if (k > 1) {
    std::vector<double> removal(k), delta(k);
    auto removal_loss = [&] {
      std::fill(removal.begin(), removal.end(), 0.0);
      for (int r = 0; r < n; ++r) removal[near_idx[r]] += w[r] * (ds[r] - dn[r]);
    };
    removal_loss();
    int last_swap = -1;
    for (int pass = 0; pass < max_passes; ++pass) {
      bool improved = false;
      for (int c = 0; c < n; ++c) {
        if (c == last_swap) break;  // a full cycle without improvement
        if (dn[c] == 0.0) continue;  // already a medoid or a duplicate of one
        delta = removal;
        double acc = 0.0;
        for (int r = 0; r < n; ++r) {
          const double d = dist(r, c);
          if (d < dn[r]) {
            acc += w[r] * (d - dn[r]);
            delta[near_idx[r]] += w[r] * (dn[r] - ds[r]);
          } else if (d < ds[r]) {
            delta[near_idx[r]] += w[r] * (d - ds[r]);
          }
        }
        const int best = static_cast<int>(std::min_element(delta.begin(), delta.end()) - delta.begin());
        if (delta[best] + acc < -1e-12 * std::max(1.0, out.objective_trace.back())) {
          med[best] = c;
          for (int r = 0; r < n; ++r) refresh(r);
          removal_loss();
          out.objective_trace.push_back(objective());
          ++out.swaps;
          improved = true;
          last_swap = c;
        }
      }
      if (!improved) break;
    }
  }

  out.objective = objective();
  out.assignment.resize(n);
  for (int r = 0; r < n; ++r) out.assignment[order[r]] = near_idx[r];
  out.medoids.resize(k);
  for (int j = 0; j < k; ++j) out.medoids[j] = order[med[j]];
  return out;
}

ArchetypeSet build_archetypes(const TrajectoryStore& store, const FeatureMatrix& raw,
                              const Clustering& cl) {
  const int k = static_cast<int>(cl.medoids.size());
  const auto& w = store.weights();
  const int n = store.particles();
  std::vector<Archetype> clusters(k);
  for (auto& a : clusters) {
    a.trajectory = Trajectory(store.weeks(), store.fiscal());
    a.feature_means.assign(raw.cols, 0.0);
  }
  for (int j = 0; j < k; ++j) clusters[j].medoid = cl.medoids[j];
  for (int p = 0; p < n; ++p) {
    auto& a = clusters[cl.assignment[p]];
    a.weight += w[p];
    ++a.members;
  }
  const int vars = store.num_variables();
  for (int p = 0; p < n; ++p) {
    auto& a = clusters[cl.assignment[p]];
    if (!(a.weight > 0.0)) continue;
    const double share = w[p] / a.weight;
    for (int c = 0; c < raw.cols; ++c) a.feature_means[c] += share * raw.at(p, c);
    for (int wk = 1; wk <= store.weeks(); ++wk) {
      const double* row = store.row(wk, p);
      double* dst = &a.trajectory.values[static_cast<std::size_t>(wk - 1) * vars];
      for (int v = 0; v < vars; ++v) dst[v] += share * row[v];
    }
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& a : clusters) a.weight /= total;

  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  const int rho_col = 4;
  std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) {
    return clusters[a].feature_means[rho_col] < clusters[b].feature_means[rho_col];
  });
  std::vector<int> rank(k);
  ArchetypeSet set;
  set.feature_names = raw.names;
  for (int j = 0; j < k; ++j) {
    rank[perm[j]] = j;
    set.clusters.push_back(std::move(clusters[perm[j]]));
  }
  set.assignment.resize(n);
  for (int p = 0; p < n; ++p) set.assignment[p] = rank[cl.assignment[p]];
  return set;
}

ArchetypeSet build_archetypes(const TrajectoryStore& store, int k, std::uint64_t seed) {
  const FeatureMatrix raw = extract_features(store);
  const Clustering cl = kmedoids(standardise(raw), k, store.weights(), seed);
  return build_archetypes(store, raw, cl);
}

std::optional<double> weighted_correlation(const std::vector<double>& a,
                                           const std::vector<double>& b,
                                           const std::vector<double>& w) {
  double sw = 0.0, ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sw += w[i];
    ma += w[i] * a[i];
    mb += w[i] * b[i];
  }
  ma /= sw;
  mb /= sw;
  double caa = 0.0, cbb = 0.0, cab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    caa += w[i] * da * da;
    cbb += w[i] * db * db;
    cab += w[i] * da * db;
  }
  if (!(caa > 0.0) || !(cbb > 0.0)) return std::nullopt;
  return std::clamp(cab / std::sqrt(caa * cbb), -1.0, 1.0);
}

std::vector<CorrelationSeries> rolling_correlations(
    const TrajectoryStore& store, const std::vector<std::pair<VariableId, VariableId>>& pairs,
    const std::vector<double>& weights) {
  std::vector<CorrelationSeries> out;
  const int n = store.particles();
  std::vector<double> a(n), b(n);
  for (const auto& [va, vb] : pairs) {
    if (static_cast<int>(va) >= store.num_variables() || static_cast<int>(vb) >= store.num_variables()) {
      throw ContractError("correlation pair references a variable absent from the run");
    }
    CorrelationSeries s{va, vb, {}};
    for (int wk = 1; wk <= store.weeks(); ++wk) {
      for (int p = 0; p < n; ++p) {
        a[p] = store.at(wk, p, va);
        b[p] = store.at(wk, p, vb);
      }
      s.by_week.push_back(weighted_correlation(a, b, weights));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::pair<VariableId, VariableId>> default_correlation_pairs(bool fiscal) {
  using V = VariableId;
  std::vector<std::pair<V, V>> pairs = {{V::y, V::rho}, {V::y, V::I}, {V::v, V::I},
                                        {V::rho, V::I}, {V::y, V::D}, {V::u, V::rho}};
  if (fiscal) {
    pairs.push_back({V::g, V::y});
    pairs.push_back({V::g, V::I});
  }
  return pairs;
}

WeightedMoments terminal_moments(const TrajectoryStore& store, VariableId v) {
  const auto& w = store.weights();
  WeightedMoments m;
  double sw = 0.0;
  for (int p = 0; p < store.particles(); ++p) {
    sw += w[p];
    m.mean += w[p] * store.terminal(p, v);
  }
  m.mean /= sw;
  double var = 0.0;
  for (int p = 0; p < store.particles(); ++p) {
    const double d = store.terminal(p, v) - m.mean;
    var += w[p] * d * d;
  }
  m.sd = std::sqrt(var / sw);
  return m;
}

BiasReport bias_table(const TrajectoryStore& coupled, const TrajectoryStore& uncoupled) {
  if (coupled.seed != uncoupled.seed) {
    throw ContractError("bias table needs runs that share a seed");
  }
  if (coupled.pairing_key != uncoupled.pairing_key || coupled.particles() != uncoupled.particles() ||
      coupled.weeks() != uncoupled.weeks() || coupled.fiscal() != uncoupled.fiscal()) {
    throw ContractError("bias table needs runs that differ only in their factor mask");
  }
  BiasReport r;
  std::vector<VariableId> vars = {VariableId::y, VariableId::I, VariableId::D, VariableId::rho};
  if (coupled.fiscal()) vars.push_back(VariableId::d);
  for (VariableId v : vars) {
    BiasRow row;
    row.variable = std::string(variable_name(v)) + "_T";
    row.coupled = terminal_moments(coupled, v);
    row.uncoupled = terminal_moments(uncoupled, v);
    row.shift = row.coupled.mean - row.uncoupled.mean;
    r.rows.push_back(row);
  }
  return r;
}

BiasReport bias_decomposition(const RunConfig& c, int threads) {
  BiasReport r;
  const SalienceLens& region = c.lens(c.constructive_lens);
  const SalienceLens& likelihood = c.lens(c.observation_lens);
  EngineOptions opt;
  opt.threads = threads;

  const TrajectoryStore original = run_simulation(c, opt);

  const Trajectory e_plus =
      c.e_plus_file.empty() ? default_e_plus(c) : read_trajectory_file(c.e_plus_file, c);
  r.injection = inject_particle(original, e_plus, likelihood, c.likelihood_cadence);
  r.decomposition.push_back({"sampling", "E+ injection weight / median particle weight",
                             r.injection->ratio, r.injection->verdict});

  RunConfig sym = c;
  sym.symmetrised = c.factors;
  const TrajectoryStore symmetrised = run_simulation(sym, opt);
  r.constructive_original = region_mass(original, original.weights(), region);
  r.constructive_symmetrised = region_mass(symmetrised, symmetrised.weights(), region);
  const double structural = r.constructive_symmetrised - r.constructive_original;
  r.decomposition.push_back(
      {"structural", "constructive mass, symmetrised minus original couplings", structural,
       structural > 0.0   ? "functional forms suppress constructive outcomes"
       : structural < 0.0 ? "symmetrised couplings are more pessimistic"
                          : "no structural component"});

  const CouplingFabric fabric(c.coupling, c.vaccine, c.fiscal, c.factors, c.fiscal_on());
  for (const auto& f : fabric.factors()) {
    r.asymmetry.push_back({f.id, asymmetry_ratio(f, 4096)});
  }

  EngineOptions observed = opt;
  observed.weekly_likelihood = &likelihood;
  observed.cadence = c.likelihood_cadence;
  const TrajectoryStore weighted = run_simulation(c, observed);
  ObservationComparison oc;
  oc.mass_uniform = r.constructive_original;
  oc.mass_likelihood = region_mass(weighted, weighted.weights(), region);
  oc.observational = oc.mass_uniform - oc.mass_likelihood;
  oc.final_ess = ess(weighted.weights());
  oc.resamples = weighted.resample_count;
  r.observation = oc;
  r.decomposition.push_back({"observational",
                             "constructive mass, observation-free minus likelihood-weighted",
                             oc.observational,
                             oc.observational > 0.0 ? "observations downweight constructive outcomes"
                                                    : "observations do not downweight them"});
  return r;
}

BifurcationStats bifurcation(const TrajectoryStore& store, double threshold) {
  BifurcationStats b;
  b.threshold = threshold;
  const auto& w = store.weights();
  double sy_low = 0.0, sy_high = 0.0;
  for (int p = 0; p < store.particles(); ++p) {
    const double y = store.terminal(p, VariableId::y);
    if (store.terminal(p, VariableId::rho) <= threshold) {
      b.low_mass += w[p];
      sy_low += w[p] * y;
    } else {
      b.high_mass += w[p];
      sy_high += w[p] * y;
    }
  }
  b.low_mean_y = b.low_mass > 0.0 ? sy_low / b.low_mass : std::nan("");
  b.high_mean_y = b.high_mass > 0.0 ? sy_high / b.high_mass : std::nan("");
  return b;
}

std::vector<std::array<double, 5>> weekly_quantiles(const TrajectoryStore& store, VariableId v) {
  static constexpr std::array<double, 5> kLevels = {0.05, 0.25, 0.50, 0.75, 0.95};
  const int n = store.particles();
  const auto& w = store.weights();
  std::vector<std::array<double, 5>> out;
  std::vector<std::pair<double, double>> vals(n);
  for (int wk = 1; wk <= store.weeks(); ++wk) {
    for (int p = 0; p < n; ++p) vals[p] = {store.at(wk, p, v), w[p]};
    std::sort(vals.begin(), vals.end());
    std::array<double, 5> q{};
    double cum = 0.0;
    std::size_t level = 0;
    for (int p = 0; p < n && level < kLevels.size(); ++p) {
      cum += vals[p].second;
      while (level < kLevels.size() && cum >= kLevels[level] - 1e-12) q[level++] = vals[p].first;
    }
    while (level < kLevels.size()) q[level++] = vals[n - 1].first;
    out.push_back(q);
  }
  return out;
}

std::vector<double> archetype_distances(const ArchetypeSet& set, const Trajectory& path, int upto) {
  std::vector<double> out;
  for (const auto& a : set.clusters) {
    if (upto > a.trajectory.weeks || upto > path.weeks || a.trajectory.fiscal != path.fiscal) {
      throw ContractError("path and archetypes have incompatible shapes");
    }
    double s = 0.0;
    const std::size_t len = static_cast<std::size_t>(upto) * path.num_variables();
    for (std::size_t i = 0; i < len; ++i) {
      const double d = path.values[i] - a.trajectory.values[i];
      s += d * d;
    }
    out.push_back(std::sqrt(s));
  }
  return out;
}

}  // namespace csmc
