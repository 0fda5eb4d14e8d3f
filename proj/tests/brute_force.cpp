#include "brute_force.hpp"

#include "grouptrack/primitives.hpp"
#include "grouptrack/screk/parser.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>

namespace grouptrack::oracle {

std::vector<std::vector<MobileId>> connected_components(std::span<const FeaturePoint> points, double radius) {
  const std::size_t n = points.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> root = [&](std::size_t i) {
    return parent[i] == i ? i : parent[i] = root(parent[i]);
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < points[i].coords.size(); ++k) {
        const double d = points[i].coords[k] - points[j].coords[k];
        d2 += d * d;
      }
      if (std::sqrt(d2) < radius) parent[root(i)] = root(j);
    }
  std::map<std::size_t, std::vector<MobileId>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[root(i)].push_back(points[i].owner);
  std::vector<std::vector<MobileId>> out;
  for (auto& [_, g] : groups) {
    std::sort(g.begin(), g.end());
    out.push_back(std::move(g));
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool allen_by_frames(AllenRelation r, const Interval& a, const Interval& b) {
  auto in = [](FrameId f, const Interval& i) { return f >= i.start && f <= i.end; };
  const FrameId lo = std::min(a.start, b.start) - 1;
  const FrameId hi = std::max(a.end, b.end) + 1;
  bool shared = false, a_only_before = false, a_only_after = false, b_only_before = false, b_only_after = false;
  bool gap_between = false;
  for (FrameId f = lo; f <= hi; ++f) {
    const bool ia = in(f, a), ib = in(f, b);
    shared = shared || (ia && ib);
    if (ia && !ib && f < b.start) a_only_before = true;
    if (ia && !ib && f > b.end) a_only_after = true;
    if (ib && !ia && f < a.start) b_only_before = true;
    if (ib && !ia && f > a.end) b_only_after = true;
    if (!ia && !ib && f > a.end && f < b.start) gap_between = true;
  }
  switch (r) {
    case AllenRelation::Before: return gap_between;
    case AllenRelation::Meets: return !shared && a.end < b.start && !gap_between;
    case AllenRelation::Overlaps: return shared && a_only_before && b_only_after;
    case AllenRelation::Starts: return shared && !a_only_before && !b_only_before && b_only_after && !a_only_after;
    case AllenRelation::During: return shared && b_only_before && b_only_after && !a_only_before && !a_only_after;
    case AllenRelation::Finishes: return shared && b_only_before && !a_only_before && !a_only_after && !b_only_after;
    case AllenRelation::Equals:
      return shared && !a_only_before && !a_only_after && !b_only_before && !b_only_after;
  }
  return false;
}

RecognitionFixture random_fixture(std::mt19937_64& rng) {
  RecognitionFixture fx;
  fx.frames = 10 + static_cast<FrameId>(rng() % 41);
  fx.max_gap = static_cast<FrameId>(rng() % 3);
  const int n_objects = 1 + static_cast<int>(rng() % 2);
  for (int i = 1; i <= n_objects; ++i) fx.objects.push_back(std::to_string(i));

  for (const char* p : {"P1", "P2", "P3"}) {
    screk::ScenarioModel m;
    m.type = screk::ScenarioType::PrimitiveState;
    m.name = p;
    m.physical_objects = {{"g", "Group"}};
    fx.ontology.models.push_back(m);
    // runs of true frames from a two-state chain
    for (const auto& key : fx.objects) {
      bool on = rng() % 2;
      for (FrameId f = 0; f < fx.frames; ++f) {
        if (rng() % 100 < 25) on = !on;
        if (on) fx.truth[p].insert({key, f});
      }
    }
  }

  const std::size_t k = 1 + rng() % 3;
  const std::size_t n_vars = k == 1 ? 1 : 1 + rng() % 2;
  const std::vector<std::string> vars{"g", "h"};
  screk::ScenarioModel x;
  x.type = rng() % 2 ? screk::ScenarioType::CompositeEvent : screk::ScenarioType::CompositeState;
  x.name = "X";
  for (std::size_t v = 0; v < n_vars; ++v) x.physical_objects.push_back({vars[v], "Group"});
  for (std::size_t c = 0; c < k; ++c) {
    const auto& var = c < n_vars ? vars[c] : vars[rng() % n_vars];
    x.components.push_back({"c" + std::to_string(c + 1), "P" + std::to_string(1 + rng() % 3), {var}});
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i = 0; i + 1 < k; ++i) {
    x.constraints.push_back(screk::TemporalConstraint{x.components[order[i]].variable,
                                                      static_cast<AllenRelation>(rng() % 7),
                                                      x.components[order[i + 1]].variable});
  }
  std::shuffle(x.constraints.begin(), x.constraints.end(), rng);
  x.alarm = static_cast<AlarmLevel>(rng() % 3);
  fx.ontology.models.push_back(x);
  return fx;
}

std::vector<Interval> truth_intervals(const std::set<FrameId>& true_frames, FrameId max_gap) {
  std::vector<Interval> out;
  for (auto f : true_frames) {
    if (!out.empty() && f - out.back().end - 1 <= max_gap) out.back().end = f;
    else out.push_back({f, f});
  }
  return out;
}

namespace {

std::vector<Interval> intervals_of(const RecognitionFixture& fx, const std::string& model, const std::string& key) {
  std::set<FrameId> frames;
  auto it = fx.truth.find(model);
  if (it != fx.truth.end())
    for (const auto& [k, f] : it->second)
      if (k == key) frames.insert(f);
  return truth_intervals(frames, fx.max_gap);
}

void sort_events(std::vector<RecognizedEvent>& v) {
  std::sort(v.begin(), v.end(), [](const RecognizedEvent& a, const RecognizedEvent& b) {
    return std::tie(a.model, a.bindings, a.interval.start, a.interval.end) <
           std::tie(b.model, b.bindings, b.interval.start, b.interval.end);
  });
}

}  // namespace

std::vector<RecognizedEvent> brute_force_recognize(const RecognitionFixture& fx) {
  const auto& x = fx.ontology.models.back();
  const std::size_t nv = x.physical_objects.size();
  const std::size_t k = x.components.size();
  std::vector<RecognizedEvent> out;

  std::vector<std::size_t> assign(nv, 0);
  while (true) {
    std::map<std::string, std::string> key_of;
    for (std::size_t v = 0; v < nv; ++v) key_of[x.physical_objects[v].variable] = fx.objects[assign[v]];

    std::vector<std::vector<Interval>> options(k);
    for (std::size_t c = 0; c < k; ++c)
      options[c] = intervals_of(fx, x.components[c].model, key_of[x.components[c].arguments[0]]);

    std::vector<std::size_t> pick(k, 0);
    bool any = std::all_of(options.begin(), options.end(), [](const auto& o) { return !o.empty(); });
    while (any) {
      std::map<std::string, Interval> iv;
      for (std::size_t c = 0; c < k; ++c) iv[x.components[c].variable] = options[c][pick[c]];
      bool ok = true;
      for (const auto& t : x.temporal_constraints()) ok = ok && allen_by_frames(t.relation, iv[t.lhs], iv[t.rhs]);
      if (ok) {
        RecognizedEvent e;
        e.model = x.name;
        for (const auto& b : x.physical_objects) e.bindings.emplace_back(b.variable, key_of[b.variable]);
        e.interval = options[0][pick[0]];
        for (std::size_t c = 1; c < k; ++c)
          e.interval = {std::min(e.interval.start, options[c][pick[c]].start),
                        std::max(e.interval.end, options[c][pick[c]].end)};
        e.alarm = x.alarm;
        out.push_back(e);
      }
      std::size_t c = 0;
      while (c < k && ++pick[c] == options[c].size()) pick[c++] = 0;
      if (c == k) break;
    }

    std::size_t v = 0;
    while (v < nv && ++assign[v] == fx.objects.size()) assign[v++] = 0;
    if (v == nv) break;
  }
  sort_events(out);
  return out;
}

std::vector<RecognizedEvent> brute_force_primitives(const RecognitionFixture& fx) {
  std::vector<RecognizedEvent> out;
  for (const auto& m : fx.ontology.models) {
    if (!m.primitive()) continue;
    for (const auto& key : fx.objects)
      for (const auto& iv : intervals_of(fx, m.name, key)) {
        RecognizedEvent e;
        e.model = m.name;
        e.bindings = {{"g", key}};
        e.interval = iv;
        e.alarm = m.alarm;
        out.push_back(e);
      }
  }
  sort_events(out);
  return out;
}

std::pair<std::vector<RecognizedEvent>, std::vector<RecognizedEvent>> engine_recognize(const RecognitionFixture& fx) {
  auto truth = std::make_shared<const std::map<std::string, std::set<std::pair<std::string, FrameId>>>>(fx.truth);
  PrimitiveRegistry reg;
  for (const auto& m : fx.ontology.models) {
    if (!m.primitive()) continue;
    reg[m.name] = [truth, name = m.name](const PrimitiveContext& ctx, std::span<const SceneObject* const> args) {
      auto it = truth->find(name);
      return it != truth->end() && it->second.count({args[0]->ref.key, ctx.frame}) > 0;
    };
  }
  EngineParams params;
  params.max_gap = fx.max_gap;
  EventEngine engine(screk::merge(screk::builtin_prelude(), fx.ontology), std::move(reg), params);

  std::vector<SceneObject> objects;
  for (const auto& key : fx.objects) {
    GroupFeatures g;
    g.id = std::stoll(key);
    objects.push_back(group_object(g));
  }
  for (FrameId f = 0; f < fx.frames; ++f) engine.step({f, objects, {}});
  engine.flush();

  std::vector<RecognizedEvent> raw;
  for (const auto& e : engine.raw_events())
    if (e.model == "X") raw.push_back(e);
  auto prims = engine.primitive_events();
  sort_events(raw);
  sort_events(prims);
  return {raw, prims};
}

}  // namespace grouptrack::oracle
