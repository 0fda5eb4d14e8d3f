#include "grouptrack/engine.hpp"

#include "text_util.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <sstream>

namespace grouptrack {

bool allen(AllenRelation r, const Interval& a, const Interval& b) {
  switch (r) {
    case AllenRelation::Before: return a.end + 1 < b.start;
    case AllenRelation::Meets: return a.end + 1 == b.start;
    case AllenRelation::Overlaps: return a.start < b.start && b.start <= a.end && a.end < b.end;
    case AllenRelation::Starts: return a.start == b.start && a.end < b.end;
    case AllenRelation::During: return b.start < a.start && a.end < b.end;
    case AllenRelation::Finishes: return a.end == b.end && a.start > b.start;
    case AllenRelation::Equals: return a.start == b.start && a.end == b.end;
  }
  throw std::invalid_argument("unknown Allen relation");
}

Interval hull(const Interval& a, const Interval& b) { return {std::min(a.start, b.start), std::max(a.end, b.end)}; }

bool intersects(const Interval& a, const Interval& b) { return a.start <= b.end && b.start <= a.end; }

// ---------------------------------------------------------------------------

void ObjectStore::record(FrameId frame, const SceneObject& object) {
  auto& attrs = histories_[object.ref];
  for (const auto& [name, value] : object.attributes) {
    auto it = attrs.find(name);
    if (it == attrs.end()) it = attrs.emplace(name, screk::History(capacity_)).first;
    it->second.record(frame, value);
  }
}

const screk::History* ObjectStore::history(const ObjectRef& ref, const std::string& attribute) const {
  auto o = histories_.find(ref);
  if (o == histories_.end()) return nullptr;
  auto a = o->second.find(attribute);
  return a == o->second.end() ? nullptr : &a->second;
}

const screk::Value* ObjectStore::value_at(const ObjectRef& ref, const std::string& attribute, FrameId frame) const {
  const auto* h = history(ref, attribute);
  return h ? h->at_or_before(frame) : nullptr;
}

// ---------------------------------------------------------------------------

namespace {

struct Instance {
  std::vector<ObjectRef> binding;
  Interval interval;
  // Interval the next relation of an optimized chain is checked against.
  Interval anchor;
};

struct OpenInterval {
  FrameId start = 0;
  FrameId last_true = 0;
};

struct CompiledComponent {
  std::size_t model = 0;
  // parent variable slot of each argument
  std::vector<std::size_t> slots;
};

struct CompiledModel {
  const screk::ScenarioModel* def = nullptr;
  bool primitive = false;
  bool internal = false;
  std::vector<std::string> vars;
  std::vector<std::string> classes;
  PrimitiveEvaluator eval;
  std::vector<CompiledComponent> comps;
  std::optional<std::size_t> temporal_lhs;
  std::optional<std::size_t> temporal_rhs;
  AllenRelation relation = AllenRelation::Before;
  std::vector<std::size_t> triggers;
  std::vector<screk::SymbolicConstraint> symbolic;

  std::vector<Instance> instances;
  std::vector<std::size_t> fresh;
  std::map<std::vector<ObjectRef>, OpenInterval> open;
};

}  // namespace

struct EventEngine::Impl {
  screk::Ontology ontology;
  screk::Ontology optimized;
  screk::TriggerTree tree;
  PrimitiveRegistry registry;
  EngineParams params;
  ObjectStore store;
  std::vector<CompiledModel> models;
  std::map<std::string, std::size_t> index;
  std::vector<std::size_t> topo;
  std::optional<FrameId> last_frame;
  std::vector<RecognizedEvent> events, raw, primitives;
  std::size_t instantiations = 0;

  Impl(const screk::Ontology& o, PrimitiveRegistry reg, EngineParams p)
      : ontology(o), registry(std::move(reg)), params(p), store(p.history_capacity) {
    if (params.max_gap < 0) throw EngineError("max gap must be non-negative");
    if (auto diags = screk::validate(ontology); !diags.empty()) {
      std::string msg = "invalid ontology:";
      for (const auto& d : diags) msg += "\n  " + screk::format_diagnostic(d);
      throw EngineError(msg, diags);
    }
    try {
      optimized = screk::optimize_ontology(ontology);
      tree = screk::build_trigger_tree(optimized.models);
    } catch (const screk::OptimizeError& e) {
      throw EngineError(e.what());
    }
    compile();
  }

  void compile() {
    for (std::size_t i = 0; i < optimized.models.size(); ++i) index[optimized.models[i].name] = i;
    models.resize(optimized.models.size());
    for (std::size_t i = 0; i < optimized.models.size(); ++i) {
      const auto& def = optimized.models[i];
      auto& m = models[i];
      m.def = &def;
      m.primitive = def.primitive();
      m.internal = screk::is_internal_model(def.name);
      for (const auto& b : def.physical_objects) {
        m.vars.push_back(b.variable);
        m.classes.push_back(b.class_name);
      }
      m.symbolic = def.symbolic_constraints();
      if (m.primitive) {
        if (auto it = registry.find(def.name); it != registry.end()) m.eval = it->second;
        continue;
      }
      for (const auto& c : def.components) {
        CompiledComponent cc;
        cc.model = index.at(c.model);
        for (const auto& a : c.arguments) cc.slots.push_back(slot_of(m, a));
        m.comps.push_back(std::move(cc));
      }
      auto comp_index = [&](const std::string& var) {
        for (std::size_t k = 0; k < def.components.size(); ++k)
          if (def.components[k].variable == var) return k;
        throw EngineError("unknown component " + var);
      };
      if (auto t = def.temporal_constraints(); !t.empty()) {
        m.temporal_lhs = comp_index(t.front().lhs);
        m.temporal_rhs = comp_index(t.front().rhs);
        m.relation = t.front().relation;
      }
      for (const auto& v : tree.of(def.name)) m.triggers.push_back(comp_index(v));
    }

    // every primitive reachable from a composite needs an evaluator
    std::vector<int> state(models.size(), 0);
    std::function<void(std::size_t)> visit = [&](std::size_t i) {
      if (state[i]) return;
      state[i] = 1;
      for (const auto& c : models[i].comps) visit(c.model);
      if (!models[i].primitive) topo.push_back(i);
    };
    for (std::size_t i = 0; i < models.size(); ++i) visit(i);
    for (const auto& m : models)
      for (const auto& c : m.comps)
        if (models[c.model].primitive && !models[c.model].eval)
          throw EngineError("missing evaluator for primitive model " + models[c.model].def->name);
  }

  static std::size_t slot_of(const CompiledModel& m, const std::string& var) {
    for (std::size_t k = 0; k < m.vars.size(); ++k)
      if (m.vars[k] == var) return k;
    throw EngineError("unknown variable " + var);
  }

  std::optional<screk::Value> operand(const screk::Operand& op, const CompiledModel& m,
                                      const std::vector<ObjectRef>& binding, FrameId frame) const {
    if (auto v = std::get_if<screk::Value>(&op)) return *v;
    const auto& ref = std::get<screk::AttributeRef>(op);
    const auto* v = store.value_at(binding[slot_of(m, ref.variable)], ref.attribute, frame);
    if (!v) return std::nullopt;
    return *v;
  }

  bool symbolic_ok(const CompiledModel& m, const std::vector<ObjectRef>& binding, FrameId frame) const {
    for (const auto& s : m.symbolic) {
      auto l = operand(s.lhs, m, binding, frame);
      auto r = operand(s.rhs, m, binding, frame);
      if (!l || !r) return false;
      auto ok = screk::compare(*l, s.op, *r);
      if (!ok || !*ok) return false;
    }
    return true;
  }

  RecognizedEvent to_event(const CompiledModel& m, const Instance& inst) const {
    RecognizedEvent e;
    e.model = m.def->name;
    for (std::size_t k = 0; k < m.vars.size(); ++k) e.bindings.emplace_back(m.vars[k], inst.binding[k].key);
    e.interval = inst.interval;
    e.alarm = m.def->alarm;
    return e;
  }

  void close(std::size_t mi, const std::vector<ObjectRef>& binding, const OpenInterval& open) {
    auto& m = models[mi];
    Interval iv{open.start, open.last_true};
    m.instances.push_back({binding, iv, iv});
    m.fresh.push_back(m.instances.size() - 1);
    primitives.push_back(to_event(m, m.instances.back()));
  }

  void evaluate_primitives(const FrameInput& in) {
    instantiations = 0;
    PrimitiveContext ctx{in.frame, params.frame_rate, store, in.lifecycle};
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
      auto& m = models[mi];
      if (!m.primitive || !m.eval) continue;
      std::vector<std::vector<const SceneObject*>> candidates(m.vars.size());
      for (std::size_t k = 0; k < m.vars.size(); ++k)
        for (const auto& o : in.objects)
          if (screk::is_subclass(ontology, o.ref.class_name, m.classes[k])) candidates[k].push_back(&o);

      std::set<std::vector<ObjectRef>> truths;
      std::vector<const SceneObject*> tuple(m.vars.size());
      std::vector<ObjectRef> binding(m.vars.size());
      std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == m.vars.size()) {
          if (!symbolic_ok(m, binding, in.frame)) return;
          ++instantiations;
          if (m.eval(ctx, tuple)) truths.insert(binding);
          return;
        }
        for (const auto* o : candidates[k]) {
          tuple[k] = o;
          binding[k] = o->ref;
          rec(k + 1);
        }
      };
      if (!m.vars.empty()) rec(0);

      for (const auto& b : truths) {
        auto it = m.open.find(b);
        if (it != m.open.end() && in.frame - it->second.last_true - 1 > params.max_gap) {
          close(mi, b, it->second);
          m.open.erase(it);
          it = m.open.end();
        }
        if (it == m.open.end()) m.open.emplace(b, OpenInterval{in.frame, in.frame});
        else it->second.last_true = in.frame;
      }
      for (auto it = m.open.begin(); it != m.open.end();) {
        if (!truths.count(it->first) && in.frame - it->second.last_true > params.max_gap) {
          close(mi, it->first, it->second);
          it = m.open.erase(it);
        } else {
          ++it;
        }
      }
    }
  }

  Interval effective(std::size_t model, const Instance& inst) const {
    return models[model].internal ? inst.anchor : inst.interval;
  }

  std::vector<RecognizedEvent> recognize(FrameId frame) {
    std::vector<RecognizedEvent> out;
    for (auto mi : topo) {
      auto& m = models[mi];
      std::set<std::pair<std::size_t, std::size_t>> tried;
      for (auto t : m.triggers) {
        const auto fresh = models[m.comps[t].model].fresh;
        for (auto fi : fresh) {
          if (m.comps.size() == 1) {
            combine(mi, {fi}, frame, out);
            continue;
          }
          const std::size_t other = 1 - t;
          const std::size_t count = models[m.comps[other].model].instances.size();
          for (std::size_t oi = 0; oi < count; ++oi) {
            auto key = t == 0 ? std::make_pair(fi, oi) : std::make_pair(oi, fi);
            if (!tried.insert(key).second) continue;
            combine(mi, {key.first, key.second}, frame, out);
          }
        }
      }
    }
    return out;
  }

  void combine(std::size_t mi, std::vector<std::size_t> picks, FrameId frame, std::vector<RecognizedEvent>& out) {
    auto& m = models[mi];
    std::vector<const Instance*> insts;
    for (std::size_t k = 0; k < picks.size(); ++k) insts.push_back(&models[m.comps[k].model].instances[picks[k]]);

    std::vector<std::optional<ObjectRef>> slots(m.vars.size());
    for (std::size_t k = 0; k < insts.size(); ++k) {
      const auto& cc = m.comps[k];
      for (std::size_t j = 0; j < cc.slots.size(); ++j) {
        auto& s = slots[cc.slots[j]];
        if (s && *s != insts[k]->binding[j]) return;
        s = insts[k]->binding[j];
      }
    }
    std::vector<ObjectRef> binding;
    for (std::size_t k = 0; k < slots.size(); ++k) {
      if (!slots[k] || !screk::is_subclass(ontology, slots[k]->class_name, m.classes[k])) return;
      binding.push_back(*slots[k]);
    }

    auto eff = [&](std::size_t k) { return effective(m.comps[k].model, *insts[k]); };
    if (m.temporal_lhs) {
      if (!allen(m.relation, eff(*m.temporal_lhs), eff(*m.temporal_rhs))) return;
    } else if (insts.size() == 2 && !intersects(insts[0]->interval, insts[1]->interval)) {
      return;
    }
    if (!symbolic_ok(m, binding, frame)) return;

    Instance inst;
    inst.binding = std::move(binding);
    inst.interval = insts[0]->interval;
    for (std::size_t k = 1; k < insts.size(); ++k) inst.interval = hull(inst.interval, insts[k]->interval);
    inst.anchor = eff(insts.size() - 1);
    m.instances.push_back(std::move(inst));
    m.fresh.push_back(m.instances.size() - 1);
    if (m.internal) return;
    auto e = to_event(m, m.instances.back());
    raw.push_back(e);
    events = dedupe(std::move(events), e, params.max_gap);
    out.push_back(std::move(e));
  }

  std::vector<RecognizedEvent> step(const FrameInput& in) {
    if (last_frame && in.frame <= *last_frame)
      throw std::invalid_argument("engine frames must increase (got " + std::to_string(in.frame) + ")");
    last_frame = in.frame;
    for (auto& m : models) m.fresh.clear();
    for (const auto& o : in.objects) store.record(in.frame, o);
    evaluate_primitives(in);
    return recognize(in.frame);
  }

  std::vector<RecognizedEvent> flush() {
    if (!last_frame) return {};
    for (auto& m : models) m.fresh.clear();
    const FrameId frame = *last_frame + params.max_gap + 1;
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
      auto& m = models[mi];
      for (const auto& [b, open] : m.open) close(mi, b, open);
      m.open.clear();
    }
    last_frame = frame;
    return recognize(frame);
  }
};

EventEngine::EventEngine(const screk::Ontology& ontology, PrimitiveRegistry registry, EngineParams params)
    : impl_(std::make_unique<Impl>(ontology, std::move(registry), params)) {}
EventEngine::~EventEngine() = default;
EventEngine::EventEngine(EventEngine&&) noexcept = default;
EventEngine& EventEngine::operator=(EventEngine&&) noexcept = default;

std::vector<RecognizedEvent> EventEngine::step(const FrameInput& input) { return impl_->step(input); }
std::vector<RecognizedEvent> EventEngine::flush() { return impl_->flush(); }
const std::vector<RecognizedEvent>& EventEngine::events() const { return impl_->events; }
const std::vector<RecognizedEvent>& EventEngine::raw_events() const { return impl_->raw; }
const std::vector<RecognizedEvent>& EventEngine::primitive_events() const { return impl_->primitives; }
const screk::Ontology& EventEngine::optimized_ontology() const { return impl_->optimized; }
const screk::TriggerTree& EventEngine::trigger_tree() const { return impl_->tree; }
std::size_t EventEngine::last_instantiation_count() const { return impl_->instantiations; }

// ---------------------------------------------------------------------------

std::vector<RecognizedEvent> dedupe(std::vector<RecognizedEvent> events, const RecognizedEvent& e, FrameId max_gap) {
  auto reaches = [max_gap](const Interval& a, const Interval& b) {
    return a.start <= b.end + max_gap + 1 && b.start <= a.end + max_gap + 1;
  };
  RecognizedEvent merged = e;
  std::vector<bool> absorbed(events.size(), false);
  bool grew = true;
  // absorb until no further event is reachable from the merged interval
  while (grew) {
    grew = false;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const auto& x = events[i];
      if (absorbed[i] || x.model != merged.model || x.bindings != merged.bindings ||
          !reaches(x.interval, merged.interval))
        continue;
      merged.interval = hull(merged.interval, x.interval);
      absorbed[i] = true;
      grew = true;
    }
  }
  std::vector<RecognizedEvent> out;
  bool placed = false;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (!absorbed[i]) {
      out.push_back(std::move(events[i]));
    } else if (!placed) {
      out.push_back(merged);
      placed = true;
    }
  }
  if (!placed) out.push_back(merged);
  return out;
}

std::vector<RecognizedEvent> filter_by_alarm(const std::vector<RecognizedEvent>& events, AlarmLevel min) {
  std::vector<RecognizedEvent> out;
  for (const auto& e : events)
    if (e.alarm >= min) out.push_back(e);
  return out;
}

void write_events(std::ostream& out, const std::vector<RecognizedEvent>& events) {
  for (const auto& e : events) {
    out << e.model << ',' << e.interval.start << ',' << e.interval.end << ',' << screk::to_string(e.alarm) << ',';
    for (std::size_t i = 0; i < e.bindings.size(); ++i)
      out << (i ? ";" : "") << e.bindings[i].first << '=' << e.bindings[i].second;
    out << '\n';
  }
}

std::vector<RecognizedEvent> parse_events(std::string_view text) {
  std::vector<RecognizedEvent> out;
  std::size_t lineno = 0;
  for (auto line : detail::split(text, '\n')) {
    ++lineno;
    line = detail::trim(detail::strip_comment(line, '#'));
    if (line.empty()) continue;
    auto f = detail::split(line, ',');
    if (f.size() != 5) throw ParseError("expected 5 fields", lineno);
    RecognizedEvent e;
    e.model = std::string(detail::trim(f[0]));
    auto s = detail::parse_int(detail::trim(f[1]));
    auto t = detail::parse_int(detail::trim(f[2]));
    auto a = screk::alarm_level_from_string(detail::trim(f[3]));
    if (!s || !t || !a) throw ParseError("malformed event line", lineno);
    e.interval = {*s, *t};
    e.alarm = *a;
    auto b = detail::trim(f[4]);
    if (!b.empty())
      for (auto kv : detail::split(b, ';')) {
        auto eq = kv.find('=');
        if (eq == std::string_view::npos) throw ParseError("malformed binding", lineno);
        e.bindings.emplace_back(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
      }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace grouptrack
