#pragma once

#include "grouptrack/screk/value.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace grouptrack::screk {

/// Name of the implicit root of every class hierarchy.
inline constexpr std::string_view root_class = "Object";

struct Attribute {
  std::string name;
  BasicType type = BasicType::Int;
  bool operator==(const Attribute&) const = default;
};

struct ClassDecl {
  std::string name;
  std::string parent;
  bool is_const = false;
  std::vector<Attribute> attributes;
  bool operator==(const ClassDecl&) const = default;
};

enum class ScenarioType { PrimitiveState, CompositeState, PrimitiveEvent, CompositeEvent };

std::string_view to_string(ScenarioType t);
std::optional<ScenarioType> scenario_type_from_string(std::string_view s);
inline bool is_primitive(ScenarioType t) { return t == ScenarioType::PrimitiveState || t == ScenarioType::PrimitiveEvent; }

enum class AlarmLevel { NotUrgent, Urgent, VeryUrgent };

std::string_view to_string(AlarmLevel a);
std::optional<AlarmLevel> alarm_level_from_string(std::string_view s);

enum class AllenRelation { Before, Meets, Overlaps, Starts, During, Finishes, Equals };

inline constexpr std::size_t allen_relation_count = 7;

std::string_view to_string(AllenRelation r);
std::optional<AllenRelation> allen_relation_from_string(std::string_view s);

/// `variable : Class`
struct Binding {
  std::string variable;
  std::string class_name;
  bool operator==(const Binding&) const = default;
};

/// `variable : Model(arg, ...)`
struct Component {
  std::string variable;
  std::string model;
  std::vector<std::string> arguments;
  bool operator==(const Component&) const = default;
};

/// `variable->Attribute`
struct AttributeRef {
  std::string variable;
  std::string attribute;
  bool operator==(const AttributeRef&) const = default;
};

using Operand = std::variant<AttributeRef, Value>;

struct SymbolicConstraint {
  Operand lhs;
  Comparator op = Comparator::Eq;
  Operand rhs;
  bool operator==(const SymbolicConstraint&) const = default;
};

/// `lhs relation rhs` between two component variables.
struct TemporalConstraint {
  std::string lhs;
  AllenRelation relation = AllenRelation::Before;
  std::string rhs;
  bool operator==(const TemporalConstraint&) const = default;
};

using Constraint = std::variant<SymbolicConstraint, TemporalConstraint>;

struct ScenarioModel {
  ScenarioType type = ScenarioType::PrimitiveState;
  std::string name;
  std::vector<Binding> physical_objects;
  std::vector<Component> components;
  std::vector<Constraint> constraints;
  AlarmLevel alarm = AlarmLevel::NotUrgent;

  bool primitive() const { return is_primitive(type); }
  std::vector<SymbolicConstraint> symbolic_constraints() const;
  std::vector<TemporalConstraint> temporal_constraints() const;
  const Binding* find_binding(std::string_view variable) const;
  const Component* find_component(std::string_view variable) const;
  bool operator==(const ScenarioModel&) const = default;
};

struct Ontology {
  std::vector<ClassDecl> classes;
  std::vector<ScenarioModel> models;

  const ClassDecl* find_class(std::string_view name) const;
  const ScenarioModel* find_model(std::string_view name) const;
  bool operator==(const Ontology&) const = default;
};

/// `base` with every class and model of `over` added; entries of `over`
/// replace same-named entries of `base` in place.
Ontology merge(const Ontology& base, const Ontology& over);

/// True when `cls` is `ancestor` or inherits from it (Object is the ancestor
/// of every class). Unknown classes and cycles yield false.
bool is_subclass(const Ontology& ontology, std::string_view cls, std::string_view ancestor);

/// Attributes of `cls` including inherited ones, root first. Stops at unknown
/// parents and cycles.
std::vector<Attribute> flatten_attributes(const Ontology& ontology, std::string_view cls);

}  // namespace grouptrack::screk
