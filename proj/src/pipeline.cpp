#include "grouptrack/pipeline.hpp"

#include "grouptrack/screk/parser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace grouptrack {

DetectionIndex::DetectionIndex(const DetectionStream& stream) {
  for (const auto& fr : stream.frames)
    for (const auto& m : fr.mobiles) by_id_[m.id][fr.frame] = &m;
}

const Mobile* DetectionIndex::find(FrameId frame, MobileId id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return nullptr;
  auto jt = it->second.find(frame);
  return jt == it->second.end() ? nullptr : jt->second;
}

const Mobile* DetectionIndex::previous(FrameId frame, MobileId id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return nullptr;
  auto jt = it->second.lower_bound(frame);
  if (jt == it->second.begin()) return nullptr;
  return std::prev(jt)->second;
}

GroupFeatures group_features(const GroupSnapshot& s, const DetectionIndex& index, double frame_rate) {
  GroupFeatures g;
  g.id = s.group;
  std::vector<const Mobile*> ms;
  for (auto id : s.members)
    if (auto m = index.find(s.frame, id)) ms.push_back(m);
  g.member_count = static_cast<std::int64_t>(s.members.size());
  if (ms.empty()) return g;

  const double inf = std::numeric_limits<double>::infinity();
  Vec3 lo{inf, inf, inf}, hi{-inf, -inf, -inf};
  double top = 0.0;
  for (auto m : ms) {
    g.position.x += m->position.x;
    g.position.y += m->position.y;
    g.position.z += m->position.z;
    lo.x = std::min(lo.x, m->position.x - m->size.x / 2);
    lo.y = std::min(lo.y, m->position.y - m->size.y / 2);
    hi.x = std::max(hi.x, m->position.x + m->size.x / 2);
    hi.y = std::max(hi.y, m->position.y + m->size.y / 2);
    top = std::max(top, m->size.z);
  }
  const double n = static_cast<double>(ms.size());
  g.position = {g.position.x / n, g.position.y / n, g.position.z / n};
  g.size = {hi.x - lo.x, hi.y - lo.y, top};

  Vec2 mean_v;
  std::vector<double> speeds;
  for (auto m : ms) {
    auto p = index.previous(s.frame, m->id);
    if (!p) continue;
    const double dt = static_cast<double>(s.frame - p->frame) / frame_rate;
    const Vec2 v{(m->position.x - p->position.x) / dt, (m->position.y - p->position.y) / dt};
    mean_v.x += v.x;
    mean_v.y += v.y;
    speeds.push_back(std::hypot(v.x, v.y));
  }
  if (!speeds.empty()) {
    const double k = static_cast<double>(speeds.size());
    g.speed = std::hypot(mean_v.x / k, mean_v.y / k);
    double mu = 0.0;
    for (double v : speeds) mu += v;
    mu /= k;
    double var = 0.0;
    for (double v : speeds) var += (v - mu) * (v - mu);
    g.member_speed_stddev = std::sqrt(var / k);
  }

  if (ms.size() > 1) {
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < ms.size(); ++i)
      for (std::size_t j = i + 1; j < ms.size(); ++j, ++pairs)
        sum += distance(ms[i]->position.ground(), ms[j]->position.ground());
    g.average_distance = sum / static_cast<double>(pairs);
  }
  return g;
}

std::vector<FrameInput> build_frame_inputs(const DetectionStream& detections, const SceneContext& context,
                                           const std::vector<GroupSnapshot>& snapshots,
                                           const std::vector<GroupLifecycleEvent>& lifecycle) {
  std::map<FrameId, std::vector<const GroupSnapshot*>> groups;
  std::map<FrameId, std::vector<GroupLifecycleEvent>> events;
  for (const auto& s : snapshots) groups[s.frame].push_back(&s);
  for (const auto& e : lifecycle) events[e.frame].push_back(e);
  if (groups.empty() && events.empty()) return {};

  FrameId first = std::numeric_limits<FrameId>::max(), last = std::numeric_limits<FrameId>::min();
  if (!groups.empty()) {
    first = groups.begin()->first;
    last = groups.rbegin()->first;
  }
  if (!events.empty()) {
    first = std::min(first, events.begin()->first);
    last = std::max(last, events.rbegin()->first);
  }

  std::vector<SceneObject> fixed;
  for (const auto& z : context.zones) fixed.push_back(zone_object(z));
  for (const auto& e : context.equipment) fixed.push_back(equipment_object(e));

  const DetectionIndex index(detections);
  std::vector<FrameInput> out;
  out.reserve(static_cast<std::size_t>(last - first + 1));
  for (FrameId f = first; f <= last; ++f) {
    FrameInput in;
    in.frame = f;
    if (auto it = groups.find(f); it != groups.end()) {
      auto gs = it->second;
      std::sort(gs.begin(), gs.end(), [](auto a, auto b) { return a->group < b->group; });
      for (auto s : gs) in.objects.push_back(group_object(group_features(*s, index, context.frame_rate)));
    }
    in.objects.insert(in.objects.end(), fixed.begin(), fixed.end());
    if (auto it = events.find(f); it != events.end()) in.lifecycle = it->second;
    out.push_back(std::move(in));
  }
  return out;
}

screk::Ontology load_ontology(std::span<const std::string> texts, const screk::Ontology& prelude) {
  screk::Ontology all = prelude;
  for (const auto& t : texts) all = screk::merge(all, screk::parse_ontology(t, all));
  return all;
}

RecognizeResult recognize(const screk::Ontology& ontology, const DetectionStream& detections,
                          const SceneContext& context, const std::vector<GroupSnapshot>& snapshots,
                          const std::vector<GroupLifecycleEvent>& lifecycle, const RecognizeParams& params) {
  EngineParams ep;
  ep.max_gap = params.max_gap;
  ep.frame_rate = context.frame_rate;
  EventEngine engine(ontology, builtin_primitives(params.primitives), ep);
  for (const auto& in : build_frame_inputs(detections, context, snapshots, lifecycle)) engine.step(in);
  engine.flush();

  RecognizeResult r;
  r.events = filter_by_alarm(engine.events(), params.min_alarm);
  std::sort(r.events.begin(), r.events.end());
  r.primitives = engine.primitive_events();
  std::sort(r.primitives.begin(), r.primitives.end());
  return r;
}

}  // namespace grouptrack
