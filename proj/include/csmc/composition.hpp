#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "csmc/coupling.hpp"

namespace csmc {

/// Dynamics attached to a narrative's interior. Composition only moves the
/// handle around; it never calls into it.
class Decoration {
 public:
  virtual ~Decoration() = default;
  virtual std::string kind() const = 0;
};

using DecorationHandle = std::shared_ptr<const Decoration>;

template <class Params>
class ParameterDecoration final : public Decoration {
 public:
  ParameterDecoration(std::string kind, Params params)
      : kind_(std::move(kind)), params_(std::move(params)) {}
  std::string kind() const override { return kind_; }
  const Params& params() const { return params_; }

 private:
  std::string kind_;
  Params params_;
};

struct NarrativeCospan {
  std::string name;
  std::vector<std::string> interior;
  std::vector<std::string> interface;  // subset of interior
  DecorationHandle decoration;

  void validate() const;  // throws CompositionError
};

/// narrative_a.var_a is declared equal to narrative_b.var_b.
struct Identification {
  std::string narrative_a;
  std::string var_a;
  std::string narrative_b;
  std::string var_b;
};

using Label = std::pair<std::string, std::string>;  // (narrative, variable)

std::string qualified(const Label& label);
Label parse_label(const std::string& qualified_label);  // throws CompositionError

struct VariableClass {
  std::vector<Label> members;  // sorted
  bool interface = false;

  const Label& representative() const { return members.front(); }
  std::string name() const;  // members joined with "=="
};

struct CompositeModel {
  std::vector<NarrativeCospan> narratives;  // in composition order
  std::vector<Identification> identifications;
  std::vector<FactorSpec> factors;
  std::vector<VariableClass> classes;  // canonical order
  std::map<Label, int> class_of;

  int class_index(const std::string& qualified_label) const;  // throws CompositionError
  const NarrativeCospan& narrative(const std::string& name) const;

  /// Order-independent textual form used to compare composites.
  std::string normal_form() const;
};

/// Pushout of the narratives along the identifications, with factors attached.
CompositeModel compose(const std::vector<NarrativeCospan>& narratives,
                       const std::vector<Identification>& identifications,
                       const std::vector<FactorSpec>& factors);

/// Binary pushout of two composites glued along further identifications.
CompositeModel compose(const CompositeModel& a, const CompositeModel& b,
                       const std::vector<Identification>& identifications,
                       const std::vector<FactorSpec>& factors);

struct FactorGraphReport {
  std::vector<std::string> variable_nodes;
  std::vector<std::string> factor_nodes;
  std::vector<std::pair<std::string, std::string>> edges;  // (factor, variable node)
};

/// Factor-graph view: variable nodes are quotient classes holding an interface
/// variable, factor nodes the non-embedded factors. Throws CompositionError if a
/// factor touches more than two narratives.
FactorGraphReport validate_factor_graph(const CompositeModel& model);

nlohmann::json topology_json(const CompositeModel& model);

/// Economy, epidemic, vaccine (and fiscal) narratives with their interfaces.
std::vector<NarrativeCospan> standard_narratives(bool fiscal,
                                                 std::vector<DecorationHandle> decorations = {});
/// N == L.
std::vector<Identification> standard_identifications();

}  // namespace csmc
