#include "grouptrack/screk/ast.hpp"

#include <algorithm>
#include <array>
#include <set>

namespace grouptrack::screk {

namespace {

constexpr std::array<std::string_view, 4> scenario_names{"PrimitiveState", "CompositeState", "PrimitiveEvent",
                                                         "CompositeEvent"};
constexpr std::array<std::string_view, 3> alarm_names{"NOTURGENT", "URGENT", "VERYURGENT"};
constexpr std::array<std::string_view, allen_relation_count> allen_names{"before", "meets",    "overlaps", "starts",
                                                                        "during", "finishes", "equals"};

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == s) return static_cast<E>(i);
  return std::nullopt;
}

}  // namespace

std::string_view to_string(ScenarioType t) { return scenario_names[static_cast<std::size_t>(t)]; }
std::optional<ScenarioType> scenario_type_from_string(std::string_view s) {
  return lookup<ScenarioType>(scenario_names, s);
}

std::string_view to_string(AlarmLevel a) { return alarm_names[static_cast<std::size_t>(a)]; }
std::optional<AlarmLevel> alarm_level_from_string(std::string_view s) { return lookup<AlarmLevel>(alarm_names, s); }

std::string_view to_string(AllenRelation r) { return allen_names[static_cast<std::size_t>(r)]; }
std::optional<AllenRelation> allen_relation_from_string(std::string_view s) {
  return lookup<AllenRelation>(allen_names, s);
}

std::vector<SymbolicConstraint> ScenarioModel::symbolic_constraints() const {
  std::vector<SymbolicConstraint> out;
  for (const auto& c : constraints)
    if (auto s = std::get_if<SymbolicConstraint>(&c)) out.push_back(*s);
  return out;
}

std::vector<TemporalConstraint> ScenarioModel::temporal_constraints() const {
  std::vector<TemporalConstraint> out;
  for (const auto& c : constraints)
    if (auto t = std::get_if<TemporalConstraint>(&c)) out.push_back(*t);
  return out;
}

const Binding* ScenarioModel::find_binding(std::string_view variable) const {
  for (const auto& b : physical_objects)
    if (b.variable == variable) return &b;
  return nullptr;
}

const Component* ScenarioModel::find_component(std::string_view variable) const {
  for (const auto& c : components)
    if (c.variable == variable) return &c;
  return nullptr;
}

const ClassDecl* Ontology::find_class(std::string_view name) const {
  for (const auto& c : classes)
    if (c.name == name) return &c;
  return nullptr;
}

const ScenarioModel* Ontology::find_model(std::string_view name) const {
  for (const auto& m : models)
    if (m.name == name) return &m;
  return nullptr;
}

Ontology merge(const Ontology& base, const Ontology& over) {
  Ontology out = base;
  for (const auto& c : over.classes) {
    auto it = std::find_if(out.classes.begin(), out.classes.end(), [&](const ClassDecl& d) { return d.name == c.name; });
    if (it != out.classes.end()) *it = c;
    else out.classes.push_back(c);
  }
  for (const auto& m : over.models) {
    auto it = std::find_if(out.models.begin(), out.models.end(),
                           [&](const ScenarioModel& d) { return d.name == m.name; });
    if (it != out.models.end()) *it = m;
    else out.models.push_back(m);
  }
  return out;
}

bool is_subclass(const Ontology& ontology, std::string_view cls, std::string_view ancestor) {
  std::set<std::string_view> seen;
  std::string_view cur = cls;
  while (true) {
    if (cur == ancestor) return true;
    if (cur == root_class) return false;
    if (!seen.insert(cur).second) return false;
    const ClassDecl* d = ontology.find_class(cur);
    if (!d) return false;
    cur = d->parent;
  }
}

std::vector<Attribute> flatten_attributes(const Ontology& ontology, std::string_view cls) {
  std::vector<const ClassDecl*> chain;
  std::set<std::string_view> seen;
  std::string_view cur = cls;
  while (cur != root_class && seen.insert(cur).second) {
    const ClassDecl* d = ontology.find_class(cur);
    if (!d) break;
    chain.push_back(d);
    cur = d->parent;
  }
  std::vector<Attribute> out;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it)
    out.insert(out.end(), (*it)->attributes.begin(), (*it)->attributes.end());
  return out;
}

}  // namespace grouptrack::screk
