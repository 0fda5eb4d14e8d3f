#include "grouptrack/screk/parser.hpp"

#include "../text_util.hpp"

#include <set>

namespace grouptrack::screk {

namespace {

// Result of parsing one constraint operand: a bare identifier is only legal
// as the operand of a temporal relation.
struct BareIdent {
  std::string name;
};
using RawOperand = std::variant<AttributeRef, Value, BareIdent>;

class Parser {
 public:
  Parser(std::string_view text) : tokens_(tokenize(text)) {}

  Ontology ontology(const Ontology& base) {
    Ontology out;
    std::vector<const Token*> class_tokens;
    while (!at(TokenKind::End)) {
      const Token& t = peek();
      if (t.kind == TokenKind::Ident && t.text == "class") {
        class_tokens.push_back(&t);
        out.classes.push_back(class_decl());
      } else if (t.kind == TokenKind::Ident && scenario_type_from_string(t.text)) {
        out.models.push_back(model_decl());
      } else {
        fail(t, "expected 'class' or a model type, found '" + t.text + "'");
      }
    }
    for (std::size_t i = 0; i < out.classes.size(); ++i) {
      const auto& parent = out.classes[i].parent;
      if (parent == root_class || out.find_class(parent) || base.find_class(parent)) continue;
      fail(*class_tokens[i], "unknown parent '" + parent + "' of class '" + out.classes[i].name + "'");
    }
    return out;
  }

  Value single_value() {
    auto op = operand();
    auto v = std::get_if<Value>(&op);
    if (!v) fail(tokens_.front(), "expected a literal");
    expect(TokenKind::End, "end of input");
    return *v;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  bool at(TokenKind k) const { return peek().kind == k; }
  bool at_ident(std::string_view word) const { return at(TokenKind::Ident) && peek().text == word; }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < tokens_.size() - 1) ++pos_;
    return t;
  }

  [[noreturn]] static void fail(const Token& t, const std::string& msg) { throw ParseError(msg, t.line, t.column); }

  static std::string describe(const Token& t) {
    return t.kind == TokenKind::End ? std::string("end of input") : "'" + t.text + "'";
  }

  const Token& expect(TokenKind k, std::string_view what) {
    if (!at(k)) fail(peek(), "expected " + std::string(what) + ", found " + describe(peek()));
    return next();
  }

  std::string ident(std::string_view what = "identifier") { return expect(TokenKind::Ident, what).text; }

  void keyword(std::string_view word) {
    if (!at_ident(word)) fail(peek(), "expected '" + std::string(word) + "', found " + describe(peek()));
    next();
  }

  bool accept(TokenKind k) {
    if (!at(k)) return false;
    next();
    return true;
  }

  ClassDecl class_decl() {
    keyword("class");
    ClassDecl c;
    c.name = ident("class name");
    expect(TokenKind::Colon, "':'");
    c.parent = ident("parent class name");
    expect(TokenKind::LBrace, "'{'");
    std::set<std::string> names;
    while (!accept(TokenKind::RBrace)) {
      const Token& t = expect(TokenKind::Ident, "'const' or a basic type");
      if (t.text == "const") {
        const Token& v = expect(TokenKind::Ident, "'true' or 'false'");
        if (v.text != "true" && v.text != "false") fail(v, "expected 'true' or 'false'");
        c.is_const = v.text == "true";
      } else {
        auto type = basic_type_from_keyword(t.text);
        if (!type) fail(t, "unknown basic type '" + t.text + "'");
        c.attributes.push_back({ident("attribute name"), *type});
      }
      expect(TokenKind::Semicolon, "';'");
    }
    return c;
  }

  ScenarioModel model_decl() {
    ScenarioModel m;
    m.type = *scenario_type_from_string(next().text);
    expect(TokenKind::LParen, "'('");
    m.name = ident("model name");
    expect(TokenKind::Comma, "','");
    std::set<std::string> seen;
    while (!accept(TokenKind::RParen)) {
      const Token& s = expect(TokenKind::Ident, "a section name or ')'");
      if (!seen.insert(s.text).second) fail(s, "duplicate section '" + s.text + "'");
      if (s.text == "PhysicalObjects") physical_objects(m);
      else if (s.text == "Components") components(m);
      else if (s.text == "Constraints") constraints(m);
      else if (s.text == "Alarm") alarm(m);
      else fail(s, "unknown section '" + s.text + "'");
    }
    return m;
  }

  void physical_objects(ScenarioModel& m) {
    expect(TokenKind::LParen, "'('");
    do {
      expect(TokenKind::LParen, "'('");
      Binding b;
      b.variable = ident("variable");
      expect(TokenKind::Colon, "':'");
      b.class_name = ident("class name");
      expect(TokenKind::RParen, "')'");
      m.physical_objects.push_back(std::move(b));
    } while (accept(TokenKind::Comma));
    expect(TokenKind::RParen, "')'");
  }

  void components(ScenarioModel& m) {
    expect(TokenKind::LParen, "'('");
    do {
      expect(TokenKind::LParen, "'('");
      Component c;
      c.variable = ident("component variable");
      expect(TokenKind::Colon, "':'");
      c.model = ident("model name");
      expect(TokenKind::LParen, "'('");
      do c.arguments.push_back(ident("argument"));
      while (accept(TokenKind::Comma));
      expect(TokenKind::RParen, "')'");
      expect(TokenKind::RParen, "')'");
      m.components.push_back(std::move(c));
      accept(TokenKind::Comma);
    } while (at(TokenKind::LParen));
    expect(TokenKind::RParen, "')'");
  }

  void constraints(ScenarioModel& m) {
    expect(TokenKind::LParen, "'('");
    do {
      expect(TokenKind::LParen, "'('");
      m.constraints.push_back(expression());
      expect(TokenKind::RParen, "')'");
      accept(TokenKind::Comma);
    } while (at(TokenKind::LParen));
    expect(TokenKind::RParen, "')'");
  }

  void alarm(ScenarioModel& m) {
    expect(TokenKind::LParen, "'('");
    expect(TokenKind::LParen, "'('");
    keyword("Level");
    expect(TokenKind::Colon, "':'");
    const Token& t = expect(TokenKind::Ident, "alarm level");
    auto level = alarm_level_from_string(t.text);
    if (!level) fail(t, "unknown alarm level '" + t.text + "'");
    m.alarm = *level;
    expect(TokenKind::RParen, "')'");
    expect(TokenKind::RParen, "')'");
  }

  Constraint expression() {
    const Token& start = peek();
    RawOperand lhs = operand();
    const Token& op = next();
    if (op.kind == TokenKind::Ident) {
      auto rel = allen_relation_from_string(op.text);
      if (!rel) fail(op, "expected a comparator or temporal relation, found '" + op.text + "'");
      const Token& rstart = peek();
      RawOperand rhs = operand();
      auto a = std::get_if<BareIdent>(&lhs);
      auto b = std::get_if<BareIdent>(&rhs);
      if (!a) fail(start, "temporal relation needs a component variable on the left");
      if (!b) fail(rstart, "temporal relation needs a component variable on the right");
      return TemporalConstraint{a->name, *rel, b->name};
    }
    Comparator cmp;
    switch (op.kind) {
      case TokenKind::Eq: cmp = Comparator::Eq; break;
      case TokenKind::Ne: cmp = Comparator::Ne; break;
      case TokenKind::Lt: cmp = Comparator::Lt; break;
      case TokenKind::Le: cmp = Comparator::Le; break;
      case TokenKind::Gt: cmp = Comparator::Gt; break;
      case TokenKind::Ge: cmp = Comparator::Ge; break;
      default: fail(op, "expected a comparator or temporal relation, found " + describe(op));
    }
    const Token& rstart = peek();
    RawOperand rhs = operand();
    return SymbolicConstraint{symbolic(lhs, start), cmp, symbolic(rhs, rstart)};
  }

  static Operand symbolic(const RawOperand& op, const Token& where) {
    if (auto a = std::get_if<AttributeRef>(&op)) return *a;
    if (auto v = std::get_if<Value>(&op)) return *v;
    fail(where, "expected 'variable->Attribute' or a literal, found '" + std::get<BareIdent>(op).name + "'");
  }

  RawOperand operand() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Ident: {
        next();
        if (t.text == "true" || t.text == "false") return Value{t.text == "true"};
        if (accept(TokenKind::Arrow)) return AttributeRef{t.text, ident("attribute name")};
        return BareIdent{t.text};
      }
      case TokenKind::Int:
      case TokenKind::Real:
      case TokenKind::String:
      case TokenKind::At:
      case TokenKind::LParen:
      case TokenKind::LBracket: return literal();
      default: fail(t, "expected an operand, found " + describe(t));
    }
  }

  Value literal() {
    const Token& t = next();
    switch (t.kind) {
      case TokenKind::Int: return integer(t);
      case TokenKind::Real: return real(t);
      case TokenKind::String: return t.text;
      case TokenKind::At: {
        if (accept(TokenKind::LBracket)) {
          FrameInterval iv;
          iv.start = integer(expect(TokenKind::Int, "interval start"));
          expect(TokenKind::Comma, "','");
          iv.end = integer(expect(TokenKind::Int, "interval end"));
          expect(TokenKind::RBracket, "']'");
          return iv;
        }
        return Timestamp{integer(expect(TokenKind::Int, "frame number"))};
      }
      case TokenKind::LParen: return point_body(t);
      case TokenKind::LBracket: {
        Point3DList list;
        if (accept(TokenKind::RBracket)) return list;
        do {
          const Token& open = expect(TokenKind::LParen, "'('");
          Value p = point_body(open);
          if (auto d = std::get_if<Point3D>(&p)) list.push_back(*d);
          else if (auto i = std::get_if<Point3I>(&p))
            list.push_back({static_cast<double>(i->x), static_cast<double>(i->y), static_cast<double>(i->z)});
          else fail(open, "list elements must be 3D points");
        } while (accept(TokenKind::Comma));
        expect(TokenKind::RBracket, "']'");
        return list;
      }
      default: fail(t, "expected a literal, found " + describe(t));
    }
  }

  // after '(' : 2 or 3 numbers and ')'
  Value point_body(const Token& open) {
    std::vector<const Token*> nums;
    do nums.push_back(&next());
    while (accept(TokenKind::Comma));
    expect(TokenKind::RParen, "')'");
    bool any_real = false;
    for (auto* n : nums) {
      if (n->kind == TokenKind::Real) any_real = true;
      else if (n->kind != TokenKind::Int) fail(*n, "expected a number, found " + describe(*n));
    }
    if (nums.size() != 2 && nums.size() != 3) fail(open, "points have 2 or 3 coordinates");
    if (any_real) {
      std::vector<double> c;
      for (auto* n : nums) c.push_back(n->kind == TokenKind::Real ? real(*n) : static_cast<double>(integer(*n)));
      if (c.size() == 2) return Point2D{c[0], c[1]};
      return Point3D{c[0], c[1], c[2]};
    }
    std::vector<std::int64_t> c;
    for (auto* n : nums) c.push_back(integer(*n));
    if (c.size() == 2) return Point2I{c[0], c[1]};
    return Point3I{c[0], c[1], c[2]};
  }

  static std::int64_t integer(const Token& t) {
    auto v = detail::parse_int(t.text);
    if (!v) fail(t, "integer out of range '" + t.text + "'");
    return *v;
  }

  static double real(const Token& t) {
    auto v = detail::parse_double(t.text);
    if (!v) fail(t, "malformed number '" + t.text + "'");
    return *v;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

Ontology parse_ontology(std::string_view text, const Ontology& base) { return Parser(text).ontology(base); }

Ontology parse_ontology(std::string_view text) { return parse_ontology(text, builtin_prelude()); }

Value parse_value(std::string_view text) { return Parser(text).single_value(); }

}  // namespace grouptrack::screk
