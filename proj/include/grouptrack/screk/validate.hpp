#pragma once

#include "grouptrack/screk/ast.hpp"

#include <string>
#include <vector>

namespace grouptrack::screk {

struct Diagnostic {
  /// Class or model the diagnostic is about.
  std::string subject;
  std::string message;
  bool operator==(const Diagnostic&) const = default;
};

/// Well-formedness checks over a complete ontology (prelude included). An
/// empty result means the ontology is valid.
///
/// Classes: unique names, known and acyclic parents, no attribute declared
/// twice along the inheritance chain.
/// Models: unique names and variables; known object classes; primitives have
/// no components and composites at least one; components reference existing
/// models other than the model itself, with matching arity and argument
/// classes; every physical object of a composite is passed to a component;
/// no cycles through component references; symbolic operands name existing
/// attributes of bound variables with comparable types; temporal operands are
/// two distinct components.
std::vector<Diagnostic> validate(const Ontology& ontology);

std::string format_diagnostic(const Diagnostic& d);

}  // namespace grouptrack::screk
