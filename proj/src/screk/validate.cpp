#include "grouptrack/screk/validate.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>

namespace grouptrack::screk {

namespace {

class Validator {
 public:
  explicit Validator(const Ontology& o) : o_(o) {}

  std::vector<Diagnostic> run() {
    classes();
    models();
    model_cycles();
    return std::move(out_);
  }

 private:
  void report(const std::string& subject, const std::string& message) { out_.push_back({subject, message}); }

  void classes() {
    std::set<std::string> names;
    for (const auto& c : o_.classes) {
      if (c.name == root_class) report(c.name, "class Object is built in and cannot be redeclared");
      if (!names.insert(c.name).second) report(c.name, "duplicate class " + c.name);
    }
    for (const auto& c : o_.classes) {
      if (c.parent != root_class && !o_.find_class(c.parent)) {
        report(c.name, "unknown parent " + c.parent);
        continue;
      }
      // walk the chain, detecting cycles and duplicate attributes
      std::set<std::string> seen_classes{c.name};
      std::map<std::string, std::string> attrs;
      const ClassDecl* cur = &c;
      bool cyclic = false;
      while (cur) {
        for (const auto& a : cur->attributes) {
          auto [it, inserted] = attrs.emplace(a.name, cur->name);
          if (!inserted) report(c.name, "duplicate attribute " + a.name + " (declared in " + it->second + ")");
        }
        if (cur->parent == root_class) break;
        if (!seen_classes.insert(cur->parent).second) {
          cyclic = true;
          break;
        }
        cur = o_.find_class(cur->parent);
      }
      if (cyclic) report(c.name, "cyclic inheritance through " + c.name);
    }
  }

  std::optional<BasicType> attribute_type(const std::string& cls, const std::string& attr) const {
    for (const auto& a : flatten_attributes(o_, cls))
      if (a.name == attr) return a.type;
    return std::nullopt;
  }

  bool class_exists(const std::string& cls) const { return cls == root_class || o_.find_class(cls); }

  void models() {
    std::set<std::string> names;
    for (const auto& m : o_.models) {
      if (!names.insert(m.name).second) report(m.name, "duplicate model " + m.name);
      if (m.name.find("__") != std::string::npos) report(m.name, "model names containing '__' are reserved");
      model(m);
    }
  }

  void model(const ScenarioModel& m) {
    std::set<std::string> vars;
    for (const auto& b : m.physical_objects) {
      if (!vars.insert(b.variable).second) report(m.name, "duplicate variable " + b.variable);
      if (!class_exists(b.class_name)) report(m.name, "unknown class " + b.class_name + " for " + b.variable);
    }
    if (m.primitive() && !m.components.empty()) report(m.name, "primitive model cannot have components");
    if (!m.primitive() && m.components.empty()) report(m.name, "composite model needs at least one component");

    std::set<std::string> comps;
    std::set<std::string> used_args;
    for (const auto& c : m.components) {
      if (!comps.insert(c.variable).second || vars.count(c.variable))
        report(m.name, "duplicate variable " + c.variable);
      for (const auto& a : c.arguments) {
        used_args.insert(a);
        if (!m.find_binding(a)) report(m.name, "unknown argument " + a + " in component " + c.variable);
      }
      if (c.model == m.name) {
        report(m.name, "component " + c.variable + " references its own model");
        continue;
      }
      const ScenarioModel* target = o_.find_model(c.model);
      if (!target) {
        report(m.name, "unresolved component model " + c.model);
        continue;
      }
      if (target->physical_objects.size() != c.arguments.size()) {
        report(m.name, "component " + c.variable + " passes " + std::to_string(c.arguments.size()) +
                           " arguments to " + c.model + " which expects " +
                           std::to_string(target->physical_objects.size()));
        continue;
      }
      for (std::size_t i = 0; i < c.arguments.size(); ++i) {
        const Binding* b = m.find_binding(c.arguments[i]);
        const auto& want = target->physical_objects[i].class_name;
        if (b && class_exists(b->class_name) && !is_subclass(o_, b->class_name, want))
          report(m.name, "argument " + b->variable + " of class " + b->class_name + " is not a " + want + " in " +
                             c.variable);
      }
    }
    if (!m.primitive())
      for (const auto& b : m.physical_objects)
        if (!used_args.count(b.variable))
          report(m.name, "physical object " + b.variable + " is not passed to any component");

    for (const auto& con : m.constraints) {
      if (auto s = std::get_if<SymbolicConstraint>(&con)) symbolic(m, *s);
      else temporal(m, std::get<TemporalConstraint>(con));
    }
  }

  std::optional<BasicType> operand_type(const ScenarioModel& m, const Operand& op) {
    if (auto v = std::get_if<Value>(&op)) return type_of(*v);
    const auto& ref = std::get<AttributeRef>(op);
    const Binding* b = m.find_binding(ref.variable);
    if (!b) {
      report(m.name, "unknown variable " + ref.variable + " in constraint");
      return std::nullopt;
    }
    if (!class_exists(b->class_name)) return std::nullopt;
    auto t = attribute_type(b->class_name, ref.attribute);
    if (!t) report(m.name, "unknown attribute " + ref.attribute + " in class " + b->class_name);
    return t;
  }

  void symbolic(const ScenarioModel& m, const SymbolicConstraint& s) {
    auto l = operand_type(m, s.lhs);
    auto r = operand_type(m, s.rhs);
    if (l && r && !comparable(*l, s.op, *r))
      report(m.name, "cannot compare " + std::string(type_keyword(*l)) + " " + std::string(to_string(s.op)) + " " +
                         std::string(type_keyword(*r)));
  }

  void temporal(const ScenarioModel& m, const TemporalConstraint& t) {
    for (const auto* v : {&t.lhs, &t.rhs})
      if (!m.find_component(*v)) report(m.name, "temporal operand " + *v + " is not a component");
    if (t.lhs == t.rhs) report(m.name, "temporal operands must be distinct components");
  }

  void model_cycles() {
    // 0 = unvisited, 1 = on stack, 2 = done
    std::map<std::string, int> state;
    std::set<std::string> reported;
    std::function<void(const ScenarioModel&)> visit = [&](const ScenarioModel& m) {
      state[m.name] = 1;
      for (const auto& c : m.components) {
        if (c.model == m.name) continue;  // reported as self reference
        const ScenarioModel* t = o_.find_model(c.model);
        if (!t) continue;
        int s = state[t->name];
        if (s == 1) {
          if (reported.insert(t->name).second) report(t->name, "cyclic model reference through " + m.name);
        } else if (s == 0) {
          visit(*t);
        }
      }
      state[m.name] = 2;
    };
    for (const auto& m : o_.models)
      if (state[m.name] == 0) visit(m);
  }

  const Ontology& o_;
  std::vector<Diagnostic> out_;
};

}  // namespace

std::vector<Diagnostic> validate(const Ontology& ontology) { return Validator(ontology).run(); }

std::string format_diagnostic(const Diagnostic& d) { return d.subject + ": " + d.message; }

}  // namespace grouptrack::screk
