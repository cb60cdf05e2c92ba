#include "csmc/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "csmc/error.hpp"

namespace csmc {

std::string to_string(Mode m) { return m == Mode::kCoupled ? "coupled" : "uncoupled"; }

std::string to_string(Calibration c) {
  return c == Calibration::kBaseline ? "baseline" : "us-scale";
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("value '" + text + "' for " + key + " is not a number");
  }
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  long long v = 0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("value '" + text + "' for " + key + " is not an integer");
  }
  return v;
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class Block>
Field dbl(std::string section, std::string key, Block RunConfig::*block, double Block::*member) {
  const std::string full = section + "." + key;
  return {section, key,
          [=](RunConfig& c, const std::string& v) { (c.*block).*member = parse_double(full, v); },
          [=](const RunConfig& c) { return format_double((c.*block).*member); }};
}

Field strain_dbl(std::string key, double StrainParams::*member) {
  const std::string full = "epidemic." + key;
  return {"epidemic", key,
          [=](RunConfig& c, const std::string& v) {
            c.epidemic.initial_strain.*member = parse_double(full, v);
          },
          [=](const RunConfig& c) { return format_double(c.epidemic.initial_strain.*member); }};
}

Field seed_dbl(std::string key, double SEIRState::*member) {
  const std::string full = "epidemic." + key;
  return {"epidemic", key,
          [=](RunConfig& c, const std::string& v) {
            c.epidemic.initial_state.*member = parse_double(full, v);
          },
          [=](const RunConfig& c) { return format_double(c.epidemic.initial_state.*member); }};
}

Field integer(std::string section, std::string key, int RunConfig::*member) {
  const std::string full = section + "." + key;
  return {section, key,
          [=](RunConfig& c, const std::string& v) {
            const long long x = parse_int(full, v);
            if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
              throw ConfigError(full + " is out of range");
            }
            c.*member = static_cast<int>(x);
          },
          [=](const RunConfig& c) { return std::to_string(c.*member); }};
}

Field text(std::string section, std::string key, std::string RunConfig::*member) {
  return {section, key, [=](RunConfig& c, const std::string& v) { c.*member = v; },
          [=](const RunConfig& c) { return c.*member; }};
}

// Fields whose values change the defaults of others; applied first.
const std::vector<Field>& structural_fields() {
  static const std::vector<Field> fields = {
      {"run", "mode",
       [](RunConfig& c, const std::string& v) {
         if (v == "coupled") c.mode = Mode::kCoupled;
         else if (v == "uncoupled") c.mode = Mode::kUncoupled;
         else throw ConfigError("run.mode must be coupled or uncoupled, got '" + v + "'");
       },
       [](const RunConfig& c) { return to_string(c.mode); }},
      integer("run", "narratives", &RunConfig::narratives),
      {"run", "calibration",
       [](RunConfig& c, const std::string& v) {
         if (v == "baseline") c.calibration = Calibration::kBaseline;
         else if (v == "us-scale") c.calibration = Calibration::kUsScale;
         else throw ConfigError("run.calibration must be baseline or us-scale, got '" + v + "'");
       },
       [](const RunConfig& c) { return to_string(c.calibration); }},
  };
  return fields;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      integer("run", "particles", &RunConfig::particles),
      integer("run", "weeks", &RunConfig::weeks),
      {"run", "seed",
       [](RunConfig& c, const std::string& v) {
         const long long x = parse_int("run.seed", v);
         if (x < 0) throw ConfigError("run.seed must be non-negative");
         c.seed = static_cast<std::uint64_t>(x);
       },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      {"run", "factors", [](RunConfig& c, const std::string& v) { c.factors = FactorMask::parse(v); },
       [](const RunConfig& c) { return c.factors.to_string(); }},
      {"run", "symmetrise",
       [](RunConfig& c, const std::string& v) { c.symmetrised = FactorMask::parse(v); },
       [](const RunConfig& c) { return c.symmetrised.to_string(); }},
      integer("run", "cluster_k", &RunConfig::cluster_k),
      text("run", "output_dir", &RunConfig::output_dir),

      dbl("nk", "beta", &RunConfig::nk, &NKParams::beta),
      dbl("nk", "kappa", &RunConfig::nk, &NKParams::kappa),
      dbl("nk", "sigma_inv", &RunConfig::nk, &NKParams::sigma_inv),
      dbl("nk", "phi_pi", &RunConfig::nk, &NKParams::phi_pi),
      dbl("nk", "phi_y", &RunConfig::nk, &NKParams::phi_y),
      dbl("nk", "rho_s", &RunConfig::nk, &NKParams::rho_s),
      dbl("nk", "rho_r", &RunConfig::nk, &NKParams::rho_r),
      dbl("nk", "sigma_s", &RunConfig::nk, &NKParams::sigma_s),
      dbl("nk", "sigma_r", &RunConfig::nk, &NKParams::sigma_r),
      dbl("nk", "sigma_m", &RunConfig::nk, &NKParams::sigma_m),

      dbl("epidemic", "sigma", &RunConfig::epidemic, &SEIRParams::sigma),
      dbl("epidemic", "gamma", &RunConfig::epidemic, &SEIRParams::gamma),
      dbl("epidemic", "omega", &RunConfig::epidemic, &SEIRParams::omega),
      dbl("epidemic", "alpha", &RunConfig::epidemic, &SEIRParams::alpha),
      dbl("epidemic", "lambda", &RunConfig::epidemic, &SEIRParams::lambda),
      strain_dbl("initial_r0", &StrainParams::R0),
      strain_dbl("initial_ifr", &StrainParams::ifr),
      strain_dbl("initial_escape", &StrainParams::escape),
      seed_dbl("initial_S", &SEIRState::S),
      seed_dbl("initial_E", &SEIRState::E),
      seed_dbl("initial_I", &SEIRState::I),
      seed_dbl("initial_R", &SEIRState::R),
      seed_dbl("initial_D", &SEIRState::D),
      dbl("epidemic", "r0_min", &RunConfig::epidemic, &SEIRParams::r0_min),
      dbl("epidemic", "r0_max", &RunConfig::epidemic, &SEIRParams::r0_max),
      dbl("epidemic", "escape_a", &RunConfig::epidemic, &SEIRParams::escape_a),
      dbl("epidemic", "escape_b", &RunConfig::epidemic, &SEIRParams::escape_b),
      dbl("epidemic", "ifr_a", &RunConfig::epidemic, &SEIRParams::ifr_a),
      dbl("epidemic", "ifr_b", &RunConfig::epidemic, &SEIRParams::ifr_b),

      dbl("vaccine", "lambda_v", &RunConfig::vaccine, &VaccineParams::lambda_v),
      dbl("vaccine", "delta_v_jump", &RunConfig::vaccine, &VaccineParams::delta_v_jump),
      dbl("vaccine", "delta_v_drift", &RunConfig::vaccine, &VaccineParams::delta_v_drift),
      dbl("vaccine", "theta_adopt", &RunConfig::vaccine, &VaccineParams::theta_adopt),
      dbl("vaccine", "theta_decay", &RunConfig::vaccine, &VaccineParams::theta_decay),
      dbl("vaccine", "theta_up", &RunConfig::vaccine, &VaccineParams::theta_up),
      dbl("vaccine", "theta_down", &RunConfig::vaccine, &VaccineParams::theta_down),
      dbl("vaccine", "I_thresh", &RunConfig::vaccine, &VaccineParams::I_thresh),
      dbl("vaccine", "rho_0", &RunConfig::vaccine, &VaccineParams::rho_0),
      dbl("vaccine", "target_base", &RunConfig::vaccine, &VaccineParams::target_base),
      dbl("vaccine", "target_slope", &RunConfig::vaccine, &VaccineParams::target_slope),

      dbl("fiscal", "alpha_g", &RunConfig::fiscal, &FiscalParams::alpha_g),
      dbl("fiscal", "tau", &RunConfig::fiscal, &FiscalParams::tau),
      dbl("fiscal", "sigma_g", &RunConfig::fiscal, &FiscalParams::sigma_g),
      dbl("fiscal", "phi_up", &RunConfig::fiscal, &FiscalParams::phi_up),
      dbl("fiscal", "phi_down", &RunConfig::fiscal, &FiscalParams::phi_down),
      dbl("fiscal", "phi_0", &RunConfig::fiscal, &FiscalParams::phi_0),
      dbl("fiscal", "tau_tax", &RunConfig::fiscal, &FiscalParams::tau_tax),
      dbl("fiscal", "alpha_I", &RunConfig::fiscal, &FiscalParams::alpha_I),
      dbl("fiscal", "g_decay", &RunConfig::fiscal, &FiscalParams::g_decay),
      dbl("fiscal", "d_star", &RunConfig::fiscal, &FiscalParams::d_star),
      dbl("fiscal", "eta_g", &RunConfig::fiscal, &FiscalParams::eta_g),
      dbl("fiscal", "zeta", &RunConfig::fiscal, &FiscalParams::zeta),
      dbl("fiscal", "kappa_rho", &RunConfig::fiscal, &FiscalParams::kappa_rho),

      dbl("coupling", "h", &RunConfig::coupling, &HabituationParams::h),
      dbl("coupling", "eta_d_floor", &RunConfig::coupling, &HabituationParams::eta_d_floor),
      dbl("coupling", "eta_d_amplitude", &RunConfig::coupling, &HabituationParams::eta_d_amplitude),
      dbl("coupling", "eta_s_floor", &RunConfig::coupling, &HabituationParams::eta_s_floor),
      dbl("coupling", "eta_s_amplitude", &RunConfig::coupling, &HabituationParams::eta_s_amplitude),
      dbl("coupling", "xi", &RunConfig::coupling, &HabituationParams::xi),
      dbl("coupling", "mandate_slope", &RunConfig::coupling, &HabituationParams::mandate_slope),
      dbl("coupling", "policy_slope", &RunConfig::coupling, &HabituationParams::policy_slope),
      dbl("coupling", "policy_floor", &RunConfig::coupling, &HabituationParams::policy_floor),
      dbl("coupling", "i_star", &RunConfig::coupling, &HabituationParams::i_star),

      text("decomposition", "constructive_lens", &RunConfig::constructive_lens),
      text("decomposition", "observation_lens", &RunConfig::observation_lens),
      integer("decomposition", "likelihood_cadence", &RunConfig::likelihood_cadence),
      text("decomposition", "e_plus_file", &RunConfig::e_plus_file),
  };
  return f;
}

const Field* find_field(const std::vector<Field>& list, const std::string& section,
                        const std::string& key) {
  for (const auto& f : list) {
    if (f.section == section && f.key == key) return &f;
  }
  return nullptr;
}

void set_lens_key(SalienceLens& lens, const std::string& key, const std::string& v) {
  const std::string full = "lens." + lens.name + "." + key;
  if (key == "kind") lens.kind = parse_lens_kind(v);
  else if (key == "variable") lens.variable = variable_from_name(v);
  else if (key == "stat") lens.stat = parse_lens_stat(v);
  else if (key == "op") lens.op = parse_comparison(v);
  else if (key == "threshold") lens.threshold = parse_double(full, v);
  else if (key == "center") lens.center = parse_double(full, v);
  else if (key == "scale") lens.scale = parse_double(full, v);
  else if (key == "value") lens.value = parse_double(full, v);
  else throw ConfigError("unknown key '" + full + "'");
}

void apply_calibration_defaults(RunConfig& c) {
  c.fiscal = c.calibration == Calibration::kUsScale ? FiscalParams::us_scale()
                                                    : FiscalParams::baseline();
  if (c.mode == Mode::kUncoupled) {
    c.factors = FactorMask::none();
  } else {
    c.factors = c.narratives == 4 ? FactorMask::all() : FactorMask::three_narrative();
  }
  c.cluster_k = c.narratives == 4 ? 7 : 5;
}

struct Entry {
  std::string section;
  std::string key;
  std::string value;
  int line;
};

std::vector<Entry> tokenize(const std::string& text) {
  std::vector<Entry> out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": key outside of any section");
    }
    out.push_back({section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), lineno});
  }
  return out;
}

void apply_entry(RunConfig& c, const Entry& e) {
  if (e.section.rfind("lens.", 0) == 0) {
    const std::string name = e.section.substr(5);
    if (name.empty()) throw ConfigError("lens section needs a name");
    auto it = c.lenses.find(name);
    if (it == c.lenses.end()) {
      SalienceLens l = SalienceLens::constant();
      l.name = name;
      it = c.lenses.emplace(name, l).first;
    }
    set_lens_key(it->second, e.key, e.value);
    return;
  }
  if (find_field(structural_fields(), e.section, e.key)) return;
  const Field* f = find_field(fields(), e.section, e.key);
  if (!f) throw ConfigError("unknown key '" + e.section + "." + e.key + "'");
  f->set(c, e.value);
}

}  // namespace

const SalienceLens& RunConfig::lens(const std::string& name) const {
  const auto it = lenses.find(name);
  if (it == lenses.end()) throw ConfigError("no lens named '" + name + "'");
  return it->second;
}

RunConfig default_config() {
  RunConfig c;
  SalienceLens recession =
      SalienceLens::indicator(VariableId::y, LensStat::kTerminal, Comparison::kLess, -1.0);
  recession.name = "recession";
  SalienceLens constructive =
      SalienceLens::indicator(VariableId::y, LensStat::kTerminal, Comparison::kGreater, 0.0);
  constructive.name = "constructive";
  SalienceLens observation = SalienceLens::gaussian(VariableId::y, LensStat::kCurrent, -1.0, 0.5);
  observation.name = "observation";
  c.lenses = {{recession.name, recession},
              {constructive.name, constructive},
              {observation.name, observation}};
  return c;
}

void RunConfig::validate() const {
  if (narratives != 3 && narratives != 4) throw ConfigError("run.narratives must be 3 or 4");
  if (calibration == Calibration::kUsScale && narratives != 4) {
    throw ConfigError("calibration us-scale requires narratives = 4");
  }
  if (particles < 1) throw ConfigError("run.particles must be at least 1");
  if (weeks < 1) throw ConfigError("run.weeks must be at least 1");
  if (cluster_k < 1) throw ConfigError("run.cluster_k must be at least 1");
  if (likelihood_cadence < 1) throw ConfigError("decomposition.likelihood_cadence must be >= 1");
  if (output_dir.empty()) throw ConfigError("run.output_dir must not be empty");
  for (int k = 7; k <= 11; ++k) {
    if (narratives == 3 && (factors.enabled(k) || symmetrised.enabled(k))) {
      throw ConfigError("factor f" + std::to_string(k) + " requires narratives = 4");
    }
  }
  if (mode == Mode::kUncoupled && factors.any()) {
    throw ConfigError("run.mode = uncoupled requires run.factors = none");
  }
  nk.validate();
  epidemic.validate();
  vaccine.validate();
  fiscal.validate();
  coupling.validate();
  for (const auto& [name, l] : lenses) {
    if (name != l.name) throw ConfigError("lens key and name disagree for '" + name + "'");
    if (l.variable >= VariableId::g && narratives == 3) {
      throw ConfigError("lens " + name + " reads a fiscal variable in a 3-narrative run");
    }
    l.validate();
  }
  lens(constructive_lens);
  lens(observation_lens);
}

RunConfig parse_config(const std::string& text) {
  const std::vector<Entry> entries = tokenize(text);
  RunConfig c = default_config();
  for (const auto& e : entries) {
    if (const Field* f = find_field(structural_fields(), e.section, e.key)) f->set(c, e.value);
  }
  apply_calibration_defaults(c);
  for (const auto& e : entries) apply_entry(c, e);
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_config_text(const RunConfig& c, bool include_execution) {
  std::ostringstream out;
  std::string section;
  auto emit = [&](const Field& f) {
    if (f.section != section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.key << " = " << f.get(c) << '\n';
  };
  for (const auto& f : structural_fields()) emit(f);
  for (const auto& f : fields()) {
    if (f.section == "run" && (include_execution || f.key != "output_dir")) emit(f);
  }
  for (const auto& f : fields()) {
    if (f.section != "run") emit(f);
  }
  for (const auto& [name, l] : c.lenses) {
    out << "\n[lens." << name << "]\n";
    out << "kind = " << to_string(l.kind) << '\n';
    out << "variable = " << variable_name(l.variable) << '\n';
    out << "stat = " << to_string(l.stat) << '\n';
    out << "op = " << to_string(l.op) << '\n';
    out << "threshold = " << format_double(l.threshold) << '\n';
    out << "center = " << format_double(l.center) << '\n';
    out << "scale = " << format_double(l.scale) << '\n';
    out << "value = " << format_double(l.value) << '\n';
  }
  return out.str();
}

std::string append_override(const std::string& text, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = eq == std::string::npos ? std::string::npos : assignment.rfind('.', eq);
  if (eq == std::string::npos || dot == std::string::npos || dot == 0) {
    throw ConfigError("override '" + assignment + "' must look like section.key=value");
  }
  return text + "\n[" + trim(assignment.substr(0, dot)) + "]\n" +
         trim(assignment.substr(dot + 1, eq - dot - 1)) + " = " + trim(assignment.substr(eq + 1)) +
         "\n";
}

}  // namespace csmc
