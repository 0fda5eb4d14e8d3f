#include "grouptrack/screk/parser.hpp"

#include <sstream>

namespace grouptrack::screk {

namespace {

std::string operand_text(const Operand& op) {
  if (auto a = std::get_if<AttributeRef>(&op)) return a->variable + "->" + a->attribute;
  return format_value(std::get<Value>(op));
}

std::string constraint_text(const Constraint& c) {
  if (auto s = std::get_if<SymbolicConstraint>(&c))
    return operand_text(s->lhs) + " " + std::string(to_string(s->op)) + " " + operand_text(s->rhs);
  const auto& t = std::get<TemporalConstraint>(c);
  return t.lhs + " " + std::string(to_string(t.relation)) + " " + t.rhs;
}

}  // namespace

std::string print_class(const ClassDecl& cls) {
  std::string s = "class " + cls.name + ":" + cls.parent + " {\n";
  s += std::string("  const ") + (cls.is_const ? "true" : "false") + ";\n";
  for (const auto& a : cls.attributes) s += "  " + std::string(type_keyword(a.type)) + " " + a.name + ";\n";
  return s + "}\n";
}

std::string print_model(const ScenarioModel& m) {
  std::string s = std::string(to_string(m.type)) + "(" + m.name + ",";
  if (!m.physical_objects.empty()) {
    s += "\n  PhysicalObjects(";
    for (std::size_t i = 0; i < m.physical_objects.size(); ++i) {
      if (i) s += ", ";
      s += "(" + m.physical_objects[i].variable + ":" + m.physical_objects[i].class_name + ")";
    }
    s += ")";
  }
  if (!m.components.empty()) {
    s += "\n  Components(";
    for (std::size_t i = 0; i < m.components.size(); ++i) {
      const auto& c = m.components[i];
      if (i) s += "\n    ";
      s += "(" + c.variable + ":" + c.model + "(";
      for (std::size_t k = 0; k < c.arguments.size(); ++k) s += (k ? ", " : "") + c.arguments[k];
      s += "))";
    }
    s += ")";
  }
  if (!m.constraints.empty()) {
    s += "\n  Constraints(";
    for (std::size_t i = 0; i < m.constraints.size(); ++i) {
      if (i) s += "\n    ";
      s += "(" + constraint_text(m.constraints[i]) + ")";
    }
    s += ")";
  }
  s += "\n  Alarm((Level : " + std::string(to_string(m.alarm)) + ")))\n";
  return s;
}

void print_ontology(std::ostream& out, const Ontology& ontology) {
  bool first = true;
  for (const auto& c : ontology.classes) {
    out << (first ? "" : "\n") << print_class(c);
    first = false;
  }
  for (const auto& m : ontology.models) {
    out << (first ? "" : "\n") << print_model(m);
    first = false;
  }
}

std::string print_ontology(const Ontology& ontology) {
  std::ostringstream out;
  print_ontology(out, ontology);
  return out.str();
}

}  // namespace grouptrack::screk
