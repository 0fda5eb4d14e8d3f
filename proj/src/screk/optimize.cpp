#include "grouptrack/screk/optimize.hpp"

#include <set>

namespace grouptrack::screk {

namespace {

const std::string non_chain = "cannot optimize: non-chain temporal constraints";

std::vector<Binding> bindings_for(const ScenarioModel& m, const std::vector<const Component*>& comps) {
  std::set<std::string> used;
  for (const auto* c : comps) used.insert(c->arguments.begin(), c->arguments.end());
  std::vector<Binding> out;
  for (const auto& b : m.physical_objects)
    if (used.count(b.variable)) out.push_back(b);
  return out;
}

}  // namespace

bool is_optimal(const ScenarioModel& model) {
  return model.components.size() <= 2 && model.temporal_constraints().size() <= 1;
}

bool is_internal_model(std::string_view name) { return name.find("__") != std::string_view::npos; }

std::vector<ScenarioModel> optimize(const ScenarioModel& model) {
  if (is_optimal(model)) return {model};
  const auto temporal = model.temporal_constraints();
  const std::size_t n = model.components.size();
  if (n < 3 || temporal.size() != n - 1) throw OptimizeError(non_chain);

  std::map<std::string, const TemporalConstraint*> out_edge;
  std::set<std::string> has_in;
  for (const auto& t : temporal) {
    if (!model.find_component(t.lhs) || !model.find_component(t.rhs) || t.lhs == t.rhs) throw OptimizeError(non_chain);
    if (!out_edge.emplace(t.lhs, &t).second || !has_in.insert(t.rhs).second) throw OptimizeError(non_chain);
  }
  std::vector<const Component*> chain;
  for (const auto& c : model.components)
    if (!has_in.count(c.variable)) chain.push_back(&c);
  if (chain.size() != 1) throw OptimizeError(non_chain);
  std::vector<AllenRelation> relations;
  while (chain.size() < n) {
    auto it = out_edge.find(chain.back()->variable);
    if (it == out_edge.end()) throw OptimizeError(non_chain);
    chain.push_back(model.find_component(it->second->rhs));
    relations.push_back(it->second->relation);
  }

  std::vector<ScenarioModel> out;
  Component previous = *chain[0];
  std::vector<const Component*> covered{chain[0]};
  for (std::size_t k = 1; k < n; ++k) {
    covered.push_back(chain[k]);
    const bool last = k + 1 == n;
    ScenarioModel step;
    step.type = model.type;
    step.name = last ? model.name : model.name + "__" + std::to_string(k);
    step.physical_objects = last ? model.physical_objects : bindings_for(model, covered);
    step.components = {previous, *chain[k]};
    step.constraints.push_back(TemporalConstraint{previous.variable, relations[k - 1], chain[k]->variable});
    if (last) {
      for (const auto& s : model.symbolic_constraints()) step.constraints.push_back(s);
      step.alarm = model.alarm;
    } else {
      step.alarm = AlarmLevel::NotUrgent;
      Component next;
      next.variable = "__x" + std::to_string(k);
      next.model = step.name;
      for (const auto& b : step.physical_objects) next.arguments.push_back(b.variable);
      previous = std::move(next);
    }
    out.push_back(std::move(step));
  }
  return out;
}

Ontology optimize_ontology(const Ontology& ontology) {
  Ontology out;
  out.classes = ontology.classes;
  for (const auto& m : ontology.models) {
    auto opt = optimize(m);
    out.models.insert(out.models.end(), opt.begin(), opt.end());
  }
  return out;
}

const std::vector<std::string>& TriggerTree::of(const std::string& model) const {
  static const std::vector<std::string> none;
  auto it = triggers.find(model);
  return it == triggers.end() ? none : it->second;
}

TriggerSide trigger_side(AllenRelation r) {
  return r == AllenRelation::Finishes ? TriggerSide::First : TriggerSide::Second;
}

TriggerTree build_trigger_tree(std::span<const ScenarioModel> models) {
  TriggerTree tree;
  for (const auto& m : models) {
    if (m.primitive()) continue;
    if (!is_optimal(m)) throw OptimizeError("model " + m.name + " is not optimized");
    auto temporal = m.temporal_constraints();
    auto& slot = tree.triggers[m.name];
    if (temporal.empty()) {
      for (const auto& c : m.components) slot.push_back(c.variable);
    } else {
      const auto& t = temporal.front();
      slot.push_back(trigger_side(t.relation) == TriggerSide::First ? t.lhs : t.rhs);
    }
  }
  return tree;
}

}  // namespace grouptrack::screk
