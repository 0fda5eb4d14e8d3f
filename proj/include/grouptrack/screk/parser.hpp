#pragma once

#include "grouptrack/screk/ast.hpp"

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace grouptrack::screk {

enum class TokenKind {
  Ident,
  Int,
  Real,
  String,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Comma,
  Semicolon,
  Colon,
  Arrow,
  At,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  End,
};

struct Token {
  TokenKind kind = TokenKind::End;
  /// Identifier or number spelling; unescaped contents for strings.
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

/// Splits scenario text into tokens; `//` comments run to end of line.
/// Throws ParseError with line and column on a lexical error.
std::vector<Token> tokenize(std::string_view text);

/// Parses classes and event models. Parents must be declared in `text`, in
/// `base`, or be the root Object. Throws ParseError on lexical or syntax
/// errors, unknown parents and unknown basic types. The result holds only the
/// declarations of `text`.
Ontology parse_ontology(std::string_view text, const Ontology& base);
/// Same, resolving parents against the built-in prelude.
Ontology parse_ontology(std::string_view text);

/// Parses a single literal, e.g. "(1.0,2.0)" or "@[3,9]".
Value parse_value(std::string_view text);

/// Scenario text that parses back to the same ontology.
void print_ontology(std::ostream& out, const Ontology& ontology);
std::string print_ontology(const Ontology& ontology);
std::string print_model(const ScenarioModel& model);
std::string print_class(const ClassDecl& cls);

/// Source text of the built-in classes and primitive models.
std::string_view builtin_prelude_text();
/// The parsed built-in prelude.
const Ontology& builtin_prelude();

}  // namespace grouptrack::screk
