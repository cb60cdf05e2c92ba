#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "csmc/composition.hpp"
#include "csmc/error.hpp"

using namespace csmc;

namespace {

const HabituationParams kHab;
const VaccineParams kVax;
const FiscalParams kFiscal;

std::vector<FactorSpec> factors_for(bool fiscal) {
  return standard_factors(fiscal, kHab, kVax, kFiscal);
}

std::set<std::string> narratives_of(const FactorSpec& f) {
  std::set<std::string> out;
  for (const auto* list : {&f.inputs, &f.outputs}) {
    for (const auto& q : *list) out.insert(parse_label(q).first);
  }
  return out;
}

// Factors whose endpoints all live in `present` and are not yet attached.
std::vector<FactorSpec> ready(const std::vector<FactorSpec>& all, const std::set<std::string>& present,
                              std::set<std::string>& attached) {
  std::vector<FactorSpec> out;
  for (const auto& f : all) {
    if (attached.count(f.id)) continue;
    const auto ns = narratives_of(f);
    if (std::includes(present.begin(), present.end(), ns.begin(), ns.end())) {
      out.push_back(f);
      attached.insert(f.id);
    }
  }
  return out;
}

// Identifications whose labels all live in `present` and are not yet used.
std::vector<Identification> ready_ids(const std::vector<Identification>& all,
                                      const std::set<std::string>& present, std::set<int>& used) {
  std::vector<Identification> out;
  for (int k = 0; k < static_cast<int>(all.size()); ++k) {
    if (used.count(k)) continue;
    if (present.count(all[k].narrative_a) && present.count(all[k].narrative_b)) {
      out.push_back(all[k]);
      used.insert(k);
    }
  }
  return out;
}

struct Fold {
  std::vector<FactorSpec> factors;
  std::vector<Identification> ids;
  std::set<std::string> attached;
  std::set<int> used;

  CompositeModel leaf(const NarrativeCospan& n) {
    const std::set<std::string> present{n.name};
    return compose({n}, ready_ids(ids, present, used), ready(factors, present, attached));
  }
  CompositeModel join(const CompositeModel& a, const CompositeModel& b) {
    std::set<std::string> present;
    for (const auto* m : {&a, &b}) {
      for (const auto& n : m->narratives) present.insert(n.name);
    }
    return compose(a, b, ready_ids(ids, present, used), ready(factors, present, attached));
  }
};

}  // namespace

TEST_CASE("economy and epidemic glued along N == L") {
  NarrativeCospan economy{"economy", {"y", "pi", "i", "L"}, {"y", "pi", "i"}, nullptr};
  NarrativeCospan epidemic{"epidemic", {"S", "E", "I", "R", "D", "N"}, {"S", "I", "D"}, nullptr};
  const CompositeModel m =
      compose({economy, epidemic}, {{"economy", "L", "epidemic", "N"}}, {});
  CHECK(m.classes.size() == 9);
  int singletons = 0, merged = 0;
  for (const auto& c : m.classes) (c.members.size() == 1 ? singletons : merged) += 1;
  CHECK(singletons == 8);
  CHECK(merged == 1);
  CHECK(m.class_index("economy.L") == m.class_index("epidemic.N"));
}

TEST_CASE("empty identifications give a disjoint union") {
  const auto ns = standard_narratives(true);
  const CompositeModel m = compose(ns, {}, {});
  std::size_t total = 0;
  for (const auto& n : ns) total += n.interior.size();
  CHECK(m.classes.size() == total);
}

TEST_CASE("composition is associative and order independent") {
  for (bool fiscal : {false, true}) {
    const auto ns = standard_narratives(fiscal);
    const auto fs = factors_for(fiscal);
    const auto ids = standard_identifications();
    const std::string flat = compose(ns, ids, fs).normal_form();

    std::vector<int> order(ns.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937 gen(fiscal ? 17 : 3);
    for (int trial = 0; trial < 24; ++trial) {
      std::shuffle(order.begin(), order.end(), gen);
      Fold left{fs, ids, {}, {}};
      CompositeModel acc = left.leaf(ns[order[0]]);
      for (std::size_t k = 1; k < order.size(); ++k) acc = left.join(acc, left.leaf(ns[order[k]]));
      CHECK(acc.normal_form() == flat);

      Fold right{fs, ids, {}, {}};
      CompositeModel racc = right.leaf(ns[order.back()]);
      for (int k = static_cast<int>(order.size()) - 2; k >= 0; --k) {
        racc = right.join(right.leaf(ns[order[k]]), racc);
      }
      CHECK(racc.normal_form() == flat);
    }
  }
}

TEST_CASE("decorations pass through composition untouched") {
  struct Sentinel final : Decoration {
    std::string kind() const override { return "sentinel"; }
    // Any call into the decoration during composition would trip this.
    [[noreturn]] void poke() const { throw std::logic_error("decoration inspected"); }
  };
  auto a = std::make_shared<const Sentinel>();
  auto b = std::make_shared<const ParameterDecoration<NKParams>>("nk", NKParams{});
  auto ns = standard_narratives(false, {b, a, a});
  const CompositeModel m = compose(ns, standard_identifications(), factors_for(false));
  CHECK(m.narrative("economy").decoration == b);
  CHECK(m.narrative("epidemic").decoration == a);
  CHECK(m.narrative("vaccine").decoration.get() == a.get());
  CHECK(m.narrative("economy").decoration->kind() == "nk");
}

TEST_CASE("factor graph node counts") {
  const auto g3 = validate_factor_graph(
      compose(standard_narratives(false), standard_identifications(), factors_for(false)));
  CHECK(g3.variable_nodes.size() == 9);
  CHECK(g3.factor_nodes.size() == 5);
  CHECK(std::find(g3.factor_nodes.begin(), g3.factor_nodes.end(), "f3") == g3.factor_nodes.end());

  const auto g4 = validate_factor_graph(
      compose(standard_narratives(true), standard_identifications(), factors_for(true)));
  CHECK(g4.variable_nodes.size() == 12);
  CHECK(g4.factor_nodes.size() == 10);
}

TEST_CASE("empty factor list is a valid trivial report") {
  const auto g = validate_factor_graph(compose(standard_narratives(false), {}, {}));
  CHECK(g.factor_nodes.empty());
  CHECK(g.edges.empty());
  CHECK(g.variable_nodes.size() == 9);
}

TEST_CASE("composition errors name the offending label") {
  const auto ns = standard_narratives(false);
  try {
    compose(ns, {{"economy", "L", "epidemic", "Q"}}, {});
    FAIL("expected a CompositionError");
  } catch (const CompositionError& e) {
    CHECK(std::string(e.what()).find("epidemic.Q") != std::string::npos);
  }

  FactorSpec bad = standard_factor(1, kHab, kVax, kFiscal);
  bad.outputs = {"fiscal.g"};
  CHECK_THROWS_AS(compose(ns, {}, {bad}), CompositionError);
  CHECK_THROWS_AS(parse_label("nodot"), CompositionError);
  CHECK_THROWS_AS(compose({ns[0], ns[0]}, {}, {}), CompositionError);
}

TEST_CASE("factors spanning three narratives are rejected") {
  FactorSpec wide = standard_factor(4, kHab, kVax, kFiscal);
  wide.id = "wide";
  wide.inputs.push_back("economy.y");
  wide.domain.push_back({-5.0, 5.0, 0.0});
  const CompositeModel m = compose(standard_narratives(false), {}, {wide});
  CHECK_THROWS_AS(validate_factor_graph(m), CompositionError);
}

TEST_CASE("topology json lists nodes and edges") {
  const auto j = topology_json(
      compose(standard_narratives(true), standard_identifications(), factors_for(true)));
  CHECK(j["factor_graph"]["variable_nodes"].size() == 12);
  CHECK(j["factor_graph"]["factor_nodes"].size() == 10);
  CHECK(j["narratives"].size() == 4);
}
