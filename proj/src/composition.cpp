#include "csmc/composition.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "csmc/error.hpp"

namespace csmc {

void NarrativeCospan::validate() const {
  if (name.empty() || name.find('.') != std::string::npos) {
    throw CompositionError("narrative name '" + name + "' is empty or contains '.'");
  }
  std::set<std::string> seen;
  for (const auto& v : interior) {
    if (!seen.insert(v).second) {
      throw CompositionError("label '" + v + "' repeated in narrative " + name);
    }
  }
  for (const auto& v : interface) {
    if (!seen.count(v)) {
      throw CompositionError("interface label '" + v + "' is not interior to narrative " + name);
    }
  }
}

std::string qualified(const Label& l) { return l.first + "." + l.second; }

Label parse_label(const std::string& q) {
  const auto dot = q.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == q.size()) {
    throw CompositionError("label '" + q + "' is not of the form narrative.variable");
  }
  return {q.substr(0, dot), q.substr(dot + 1)};
}

std::string VariableClass::name() const {
  std::string out;
  for (const auto& m : members) {
    if (!out.empty()) out += "==";
    out += qualified(m);
  }
  return out;
}

int CompositeModel::class_index(const std::string& q) const {
  const auto it = class_of.find(parse_label(q));
  if (it == class_of.end()) throw CompositionError("unresolvable label '" + q + "'");
  return it->second;
}

const NarrativeCospan& CompositeModel::narrative(const std::string& name) const {
  for (const auto& n : narratives) {
    if (n.name == name) return n;
  }
  throw CompositionError("no narrative named '" + name + "'");
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

CompositeModel compose(const std::vector<NarrativeCospan>& narratives,
                       const std::vector<Identification>& identifications,
                       const std::vector<FactorSpec>& factors) {
  CompositeModel m;
  std::vector<Label> labels;
  std::set<Label> interface_labels;
  std::map<Label, int> index;
  std::set<std::string> names;
  for (const auto& n : narratives) {
    n.validate();
    if (!names.insert(n.name).second) {
      throw CompositionError("narrative '" + n.name + "' composed twice");
    }
    for (const auto& v : n.interior) {
      index[{n.name, v}] = static_cast<int>(labels.size());
      labels.emplace_back(n.name, v);
    }
    for (const auto& v : n.interface) interface_labels.insert({n.name, v});
  }

  UnionFind uf(static_cast<int>(labels.size()));
  auto lookup = [&](const std::string& narrative, const std::string& var) {
    const auto it = index.find({narrative, var});
    if (it == index.end()) {
      throw CompositionError("identification references missing label '" + narrative + "." +
                             var + "'");
    }
    return it->second;
  };
  for (const auto& id : identifications) {
    uf.unite(lookup(id.narrative_a, id.var_a), lookup(id.narrative_b, id.var_b));
  }

  std::map<int, VariableClass> by_root;
  for (int k = 0; k < static_cast<int>(labels.size()); ++k) {
    auto& cls = by_root[uf.find(k)];
    cls.members.push_back(labels[k]);
    cls.interface |= interface_labels.count(labels[k]) > 0;
  }
  for (auto& [root, cls] : by_root) {
    std::sort(cls.members.begin(), cls.members.end());
    m.classes.push_back(std::move(cls));
  }
  std::sort(m.classes.begin(), m.classes.end(),
            [](const VariableClass& a, const VariableClass& b) {
              return a.representative() < b.representative();
            });
  for (int c = 0; c < static_cast<int>(m.classes.size()); ++c) {
    for (const auto& l : m.classes[c].members) m.class_of[l] = c;
  }

  m.narratives = narratives;
  m.identifications = identifications;
  for (const auto& f : factors) {
    for (const auto* list : {&f.inputs, &f.outputs}) {
      for (const auto& q : *list) {
        if (!m.class_of.count(parse_label(q))) {
          throw CompositionError("factor " + f.id + " endpoint '" + q + "' does not resolve");
        }
      }
    }
    m.factors.push_back(f);
  }
  return m;
}

CompositeModel compose(const CompositeModel& a, const CompositeModel& b,
                       const std::vector<Identification>& identifications,
                       const std::vector<FactorSpec>& factors) {
  std::vector<NarrativeCospan> narratives = a.narratives;
  narratives.insert(narratives.end(), b.narratives.begin(), b.narratives.end());
  std::vector<Identification> ids = a.identifications;
  ids.insert(ids.end(), b.identifications.begin(), b.identifications.end());
  ids.insert(ids.end(), identifications.begin(), identifications.end());
  std::vector<FactorSpec> fs = a.factors;
  fs.insert(fs.end(), b.factors.begin(), b.factors.end());
  fs.insert(fs.end(), factors.begin(), factors.end());
  return compose(narratives, ids, fs);
}

std::string CompositeModel::normal_form() const {
  std::ostringstream out;
  std::vector<std::string> names;
  for (const auto& n : narratives) {
    std::vector<std::string> interior = n.interior, iface = n.interface;
    std::sort(interior.begin(), interior.end());
    std::sort(iface.begin(), iface.end());
    std::string s = n.name + "{";
    for (const auto& v : interior) s += v + (std::count(iface.begin(), iface.end(), v) ? "*" : "") + ",";
    names.push_back(s + "}");
  }
  std::sort(names.begin(), names.end());
  out << "narratives:";
  for (const auto& s : names) out << s << ';';
  out << "\nclasses:";
  for (const auto& c : classes) out << c.name() << (c.interface ? "*" : "") << ';';
  out << "\nfactors:";
  std::vector<std::string> fs;
  for (const auto& f : factors) {
    std::string s = f.id + (f.embedded ? "[embedded]" : "") + "(";
    for (const auto& q : f.inputs) s += classes[class_index(q)].name() + ",";
    s += ")->(";
    for (const auto& q : f.outputs) s += classes[class_index(q)].name() + ",";
    fs.push_back(s + ")");
  }
  std::sort(fs.begin(), fs.end());
  for (const auto& s : fs) out << s << ';';
  return out.str();
}

FactorGraphReport validate_factor_graph(const CompositeModel& m) {
  FactorGraphReport r;
  for (const auto& c : m.classes) {
    if (c.interface) r.variable_nodes.push_back(c.name());
  }
  for (const auto& f : m.factors) {
    std::set<std::string> spaces;
    std::set<int> touched;
    for (const auto* list : {&f.inputs, &f.outputs}) {
      for (const auto& q : *list) {
        touched.insert(m.class_index(q));
        spaces.insert(parse_label(q).first);
      }
    }
    if (spaces.size() > 2) {
      throw CompositionError("factor " + f.id + " is not local: it touches " +
                             std::to_string(spaces.size()) + " component state spaces");
    }
    if (f.embedded) continue;
    r.factor_nodes.push_back(f.id);
    for (int c : touched) {
      if (m.classes[c].interface) r.edges.emplace_back(f.id, m.classes[c].name());
    }
  }
  return r;
}

nlohmann::json topology_json(const CompositeModel& m) {
  using nlohmann::json;
  json j;
  j["narratives"] = json::array();
  for (const auto& n : m.narratives) {
    j["narratives"].push_back({{"name", n.name}, {"interior", n.interior}, {"interface", n.interface}});
  }
  j["identifications"] = json::array();
  for (const auto& id : m.identifications) {
    j["identifications"].push_back(
        {qualified({id.narrative_a, id.var_a}), qualified({id.narrative_b, id.var_b})});
  }
  j["classes"] = json::array();
  for (const auto& c : m.classes) {
    json members = json::array();
    for (const auto& l : c.members) members.push_back(qualified(l));
    j["classes"].push_back({{"members", members}, {"interface", c.interface}});
  }
  j["factors"] = json::array();
  for (const auto& f : m.factors) {
    j["factors"].push_back({{"id", f.id},
                            {"source", f.source},
                            {"target", f.target},
                            {"kind", f.kind == FactorKind::kHard ? "hard" : "soft"},
                            {"embedded", f.embedded},
                            {"inputs", f.inputs},
                            {"outputs", f.outputs}});
  }
  const FactorGraphReport g = validate_factor_graph(m);
  json edges = json::array();
  for (const auto& [f, v] : g.edges) edges.push_back({f, v});
  j["factor_graph"] = {{"variable_nodes", g.variable_nodes},
                       {"factor_nodes", g.factor_nodes},
                       {"edges", edges}};
  return j;
}

std::vector<NarrativeCospan> standard_narratives(bool fiscal,
                                                 std::vector<DecorationHandle> decorations) {
  std::vector<NarrativeCospan> out = {
      {"economy", {"y", "pi", "i", "eps_s", "r_n", "eps_m", "L"}, {"y", "pi", "i"}, nullptr},
      {"epidemic", {"S", "E", "I", "R", "D", "N", "R0", "ifr", "strains"}, {"S", "I", "D"}, nullptr},
      {"vaccine", {"v", "u", "rho"}, {"v", "u", "rho"}, nullptr},
  };
  if (fiscal) out.push_back({"fiscal", {"g", "d", "phi"}, {"g", "d", "phi"}, nullptr});
  for (std::size_t k = 0; k < out.size() && k < decorations.size(); ++k) {
    out[k].decoration = decorations[k];
  }
  return out;
}

std::vector<Identification> standard_identifications() {
  return {{"economy", "L", "epidemic", "N"}};
}

}  // namespace csmc
