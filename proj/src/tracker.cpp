#include "grouptrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace grouptrack {

void TrackerParams::validate() const {
  if (window < 2) throw std::invalid_argument("window T must be >= 2");
  if (!(tolerance > 0)) throw std::invalid_argument("tolerance must be positive");
  if (!(link_threshold > 0 && link_threshold <= 1)) throw std::invalid_argument("link threshold must be in (0,1]");
  if (!(max_speed > 0)) throw std::invalid_argument("max speed must be positive");
  if (w_distance < 0 || w_speed < 0 || w_direction < 0) throw std::invalid_argument("weights must be non-negative");
  if (stale_factor < 1) throw std::invalid_argument("stale factor must be >= 1");
  if (min_heading_speed < 0) throw std::invalid_argument("min heading speed must be non-negative");
}

// ---------------------------------------------------------------------------
// Window trajectories and features

std::optional<WindowTrajectory> build_window(const TrackSamples& samples, FrameId start, const TrackerParams& params,
                                             const SceneContext& context) {
  const auto T = static_cast<std::size_t>(params.window);
  WindowTrajectory w;
  w.start = start;
  w.positions.assign(T, Vec2{});
  w.observed_mask.assign(T, false);

  std::vector<std::size_t> observed;
  for (const auto& [frame, pos] : samples) {
    if (frame < start || frame >= start + static_cast<FrameId>(T)) continue;
    auto i = static_cast<std::size_t>(frame - start);
    w.positions[i] = pos;
    if (!w.observed_mask[i]) observed.push_back(i);
    w.observed_mask[i] = true;
  }
  if (observed.size() < 2) return std::nullopt;
  std::sort(observed.begin(), observed.end());

  w.first_observed = observed.front();
  w.last_observed = observed.back();
  for (std::size_t i = 0; i < w.first_observed; ++i) w.positions[i] = w.positions[w.first_observed];
  for (std::size_t i = w.last_observed + 1; i < T; ++i) w.positions[i] = w.positions[w.last_observed];
  for (std::size_t k = 0; k + 1 < observed.size(); ++k) {
    const std::size_t a = observed[k], b = observed[k + 1];
    const Vec2 pa = w.positions[a], pb = w.positions[b];
    for (std::size_t i = a + 1; i < b; ++i) {
      const double t = static_cast<double>(i - a) / static_cast<double>(b - a);
      w.positions[i] = {pa.x + t * (pb.x - pa.x), pa.y + t * (pb.y - pa.y)};
    }
  }

  w.speeds.resize(T - 1);
  for (std::size_t i = 0; i + 1 < T; ++i)
    w.speeds[i] = {(w.positions[i + 1].x - w.positions[i].x) * context.frame_rate,
                   (w.positions[i + 1].y - w.positions[i].y) * context.frame_rate};
  return w;
}

namespace {

double unit_range(double v, double lo, double hi) { return std::clamp((v - lo) / (hi - lo), 0.0, 1.0); }

}  // namespace

FeaturePoint normalize(const WindowTrajectory& w, const SceneContext& context, const TrackerParams& params) {
  const auto& b = context.ground_bounds;
  FeaturePoint f;
  f.owner = w.owner;
  f.coords.reserve(2 * w.positions.size() + 2 * w.speeds.size());
  for (const auto& p : w.positions) {
    f.coords.push_back(unit_range(p.x, b.min.x, b.max.x));
    f.coords.push_back(unit_range(p.y, b.min.y, b.max.y));
  }
  const double vmax = params.max_speed;
  for (auto s : w.speeds) {
    const double mag = std::hypot(s.x, s.y);
    if (mag > vmax) s = {s.x * vmax / mag, s.y * vmax / mag};
    f.coords.push_back(unit_range(s.x, -vmax, vmax));
    f.coords.push_back(unit_range(s.y, -vmax, vmax));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Group incoherence

double circular_stddev(std::span<const Vec2> unit_vectors) {
  if (unit_vectors.size() < 2) return 0.0;
  double sx = 0.0, sy = 0.0;
  for (const auto& u : unit_vectors) {
    sx += u.x;
    sy += u.y;
  }
  const double r = std::hypot(sx, sy) / static_cast<double>(unit_vectors.size());
  if (r >= 1.0 - 1e-12) return 0.0;
  if (r <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(-2.0 * std::log(r));
}

GroupStats group_statistics(std::span<const WindowTrajectory> trajs, const TrackerParams& params) {
  GroupStats stats;
  if (trajs.empty()) return stats;
  const std::size_t T = trajs.front().positions.size();

  double dist_sum = 0.0;
  std::size_t dist_frames = 0;
  std::vector<Vec2> pts;
  for (std::size_t i = 0; i < T; ++i) {
    pts.clear();
    for (const auto& w : trajs)
      if (w.valid_position(i)) pts.push_back(w.positions[i]);
    if (pts.size() < 2) continue;
    double s = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < pts.size(); ++a)
      for (std::size_t b = a + 1; b < pts.size(); ++b) {
        s += distance(pts[a], pts[b]);
        ++pairs;
      }
    dist_sum += s / static_cast<double>(pairs);
    ++dist_frames;
  }
  if (dist_frames) stats.distance_avg = dist_sum / static_cast<double>(dist_frames);

  double speed_sum = 0.0, dir_sum = 0.0;
  std::size_t speed_frames = 0, dir_frames = 0;
  std::vector<double> mags;
  std::vector<Vec2> headings;
  for (std::size_t i = 0; i + 1 < T; ++i) {
    mags.clear();
    headings.clear();
    for (const auto& w : trajs) {
      if (!w.valid_speed(i)) continue;
      const Vec2 v = w.speeds[i];
      const double mag = std::hypot(v.x, v.y);
      mags.push_back(mag);
      if (mag >= params.min_heading_speed) headings.push_back({v.x / mag, v.y / mag});
    }
    if (!mags.empty()) {
      // shifted by the first sample so equal speeds give exactly 0
      double mean = 0.0;
      for (double m : mags) mean += m - mags.front();
      mean /= static_cast<double>(mags.size());
      double var = 0.0;
      for (double m : mags) var += (m - mags.front() - mean) * (m - mags.front() - mean);
      speed_sum += std::sqrt(var / static_cast<double>(mags.size()));
      ++speed_frames;
    }
    if (!headings.empty()) {
      dir_sum += circular_stddev(headings);
      ++dir_frames;
    }
  }
  if (speed_frames) stats.speed_stddev = speed_sum / static_cast<double>(speed_frames);
  if (dir_frames) stats.direction_stddev = dir_sum / static_cast<double>(dir_frames);
  return stats;
}

double group_incoherence(const GroupStats& s, const TrackerParams& p) {
  return p.w_distance * s.distance_avg + p.w_speed * s.speed_stddev + p.w_direction * s.direction_stddev;
}

double group_incoherence(std::span<const WindowTrajectory> trajs, const TrackerParams& params) {
  return group_incoherence(group_statistics(trajs, params), params);
}

// ---------------------------------------------------------------------------
// Tracker state

TrackerState::TrackerState(TrackerParams params, SceneContext context)
    : params_(params), context_(std::move(context)) {
  params_.validate();
}

void TrackerState::add_frame(const DetectionFrame& frame) {
  auto& slot = frames_[frame.frame];
  for (auto m : frame.mobiles) {
    for (auto& f : m.fathers) {
      if (f.frame >= 0) continue;
      auto it = tracks_.find(f.id);
      if (it == tracks_.end()) continue;
      auto before = it->second.lower_bound(frame.frame);
      if (before != it->second.begin()) f.frame = std::prev(before)->first;
    }
    tracks_[m.id][frame.frame] = m.position.ground();
    slot[m.id] = std::move(m);
  }
  latest_frame_ = std::max(latest_frame_, frame.frame);
}

const Mobile* TrackerState::find_mobile(FrameId frame, MobileId id) const {
  auto f = frames_.find(frame);
  if (f == frames_.end()) return nullptr;
  auto m = f->second.find(id);
  return m == f->second.end() ? nullptr : &m->second;
}

const std::map<MobileId, Mobile>* TrackerState::frame_mobiles(FrameId frame) const {
  auto f = frames_.find(frame);
  return f == frames_.end() ? nullptr : &f->second;
}

std::optional<GroupId> TrackerState::membership(FrameId frame, MobileId id) const {
  auto f = membership_.find(frame);
  if (f == membership_.end()) return std::nullopt;
  auto m = f->second.find(id);
  if (m == f->second.end()) return std::nullopt;
  return m->second;
}

std::optional<GroupId> TrackerState::probable_group(FrameId frame, MobileId id) const {
  const Mobile* start = find_mobile(frame, id);
  if (!start) return std::nullopt;
  const FrameId horizon = frame - params_.window;

  // ancestors visited nearest-first; value = best path probability
  std::map<std::pair<FrameId, MobileId>, double, std::greater<>> frontier;
  auto expand = [&](const Mobile& m, double path) {
    for (const auto& f : m.fathers) {
      if (f.probability < params_.link_threshold || f.frame < horizon || f.frame >= m.frame) continue;
      auto key = std::make_pair(f.frame, f.id);
      double p = path * f.probability;
      auto [it, inserted] = frontier.emplace(key, p);
      if (!inserted) it->second = std::max(it->second, p);
    }
  };
  expand(*start, 1.0);

  std::optional<FrameId> found_frame;
  std::optional<GroupId> best;
  double best_prob = -1.0;
  while (!frontier.empty()) {
    auto [key, path] = *frontier.begin();
    frontier.erase(frontier.begin());
    const auto [f, mid] = key;
    if (found_frame && f < *found_frame) break;
    if (decided_until_ && f <= *decided_until_) {
      if (auto g = membership(f, mid); g && groups_.count(*g)) {
        if (!found_frame || path > best_prob || (path == best_prob && *g < *best)) {
          best = *g;
          best_prob = path;
        }
        found_frame = f;
        continue;
      }
    }
    if (const Mobile* m = find_mobile(f, mid)) expand(*m, path);
  }
  return best;
}

std::optional<GroupId> TrackerState::group_at(FrameId frame, MobileId id) const {
  if (decided_until_ && frame <= *decided_until_)
    if (auto g = membership(frame, id); g && groups_.count(*g)) return g;
  return probable_group(frame, id);
}

TrackSamples TrackerState::track_samples(MobileId id, FrameId from, FrameId to) const {
  TrackSamples out;
  auto it = tracks_.find(id);
  if (it == tracks_.end()) return out;
  for (auto s = it->second.lower_bound(from); s != it->second.end() && s->first <= to; ++s)
    out.emplace_back(s->first, s->second);
  return out;
}

std::optional<WindowTrajectory> TrackerState::window_for(MobileId id, FrameId start) const {
  auto w = build_window(track_samples(id, start, start + params_.window - 1), start, params_, context_);
  if (w) w->owner = id;
  return w;
}

GroupId TrackerState::create_group(FrameId frame, const std::set<MobileId>& members) {
  Group g;
  g.id = next_group_id_++;
  g.created_at = frame;
  g.last_member_frame = frame;
  auto [it, _] = groups_.emplace(g.id, std::move(g));
  for (auto m : members) add_member(it->first, frame, m);
  it->second.previous_members = members;
  return it->first;
}

void TrackerState::add_member(GroupId gid, FrameId frame, MobileId m) {
  auto& g = groups_.at(gid);
  g.members_by_frame[frame].insert(m);
  g.last_member_frame = std::max(g.last_member_frame, frame);
  g.last_coherent.try_emplace(m, frame);
  membership_[frame][m] = gid;
}

void TrackerState::merge_into(GroupId survivor, GroupId absorbed, FrameId frame) {
  auto& s = groups_.at(survivor);
  auto& a = groups_.at(absorbed);
  for (const auto& [f, ms] : a.members_by_frame) {
    s.members_by_frame[f].insert(ms.begin(), ms.end());
    auto mf = membership_.find(f);
    if (mf == membership_.end()) continue;
    for (auto m : ms) {
      auto e = mf->second.find(m);
      if (e != mf->second.end() && e->second == absorbed) e->second = survivor;
    }
  }
  s.created_at = std::min(s.created_at, a.created_at);
  s.last_member_frame = std::max(s.last_member_frame, a.last_member_frame);
  s.previous_members.insert(a.previous_members.begin(), a.previous_members.end());
  for (const auto& [m, _] : a.last_coherent) s.last_coherent[m] = frame;
  for (auto& [m, f] : s.last_coherent) f = frame;
  groups_.erase(absorbed);
}

void TrackerState::erase_group(GroupId gid) {
  auto it = groups_.find(gid);
  if (it == groups_.end()) return;
  for (const auto& [f, ms] : it->second.members_by_frame) {
    auto mf = membership_.find(f);
    if (mf == membership_.end()) continue;
    for (auto m : ms) {
      auto e = mf->second.find(m);
      if (e != mf->second.end() && e->second == gid) mf->second.erase(e);
    }
  }
  groups_.erase(it);
}

void TrackerState::forget_before(FrameId frame) {
  frames_.erase(frames_.begin(), frames_.lower_bound(frame));
  membership_.erase(membership_.begin(), membership_.lower_bound(frame));
  for (auto it = tracks_.begin(); it != tracks_.end();) {
    it->second.erase(it->second.begin(), it->second.lower_bound(frame));
    it = it->second.empty() ? tracks_.erase(it) : std::next(it);
  }
}

// ---------------------------------------------------------------------------
// Lifecycle operations

namespace {

bool older(const Group& a, const Group& b) {
  return a.created_at != b.created_at ? a.created_at < b.created_at : a.id < b.id;
}

std::vector<WindowTrajectory> windows_of(const TrackerState& state, const std::vector<MobileId>& ids, FrameId frame) {
  std::vector<WindowTrajectory> out;
  for (auto id : ids)
    if (auto w = state.window_for(id, frame)) out.push_back(std::move(*w));
  return out;
}

}  // namespace

UpdateResult update_groups(TrackerState& state, std::span<const MobileCluster> clusters, FrameId frame) {
  const auto& params = state.params();
  UpdateResult result;
  result.association.resize(clusters.size());
  result.creation_candidates.resize(clusters.size());

  struct Admission {
    std::size_t cluster;
    std::vector<MobileId> members;
  };
  std::map<GroupId, std::vector<Admission>> per_group;

  for (std::size_t c = 0; c < clusters.size(); ++c) {
    std::map<GroupId, int> votes;
    std::vector<std::pair<MobileId, std::optional<GroupId>>> pgs;
    for (auto m : clusters[c].members) {
      auto pg = state.probable_group(frame, m);
      pgs.emplace_back(m, pg);
      if (pg) ++votes[*pg];
      else result.creation_candidates[c].push_back(m);
    }
    if (votes.empty()) continue;
    std::optional<GroupId> chosen;
    int best = 0;
    for (const auto& [g, n] : votes) {
      if (n > best || (n == best && older(state.groups().at(g), state.groups().at(*chosen)))) {
        chosen = g;
        best = n;
      }
    }
    result.association[c] = chosen;
    Admission adm{c, {}};
    for (const auto& [m, pg] : pgs)
      if (pg == chosen) adm.members.push_back(m);
    per_group[*chosen].push_back(std::move(adm));
  }

  for (auto& [gid, admissions] : per_group) {
    std::sort(admissions.begin(), admissions.end(), [](const Admission& a, const Admission& b) {
      if (a.members.size() != b.members.size()) return a.members.size() > b.members.size();
      return *std::min_element(a.members.begin(), a.members.end()) <
             *std::min_element(b.members.begin(), b.members.end());
    });
    const auto& main = admissions.front().members;
    auto& group = state.group(gid);
    for (auto m : main) {
      state.add_member(gid, frame, m);
      group.last_coherent[m] = frame;
      result.admitted.insert(m);
    }
    const auto main_windows = windows_of(state, main, frame);
    for (std::size_t k = 1; k < admissions.size(); ++k) {
      const auto& extra = admissions[k].members;
      auto combined = main_windows;
      auto extra_windows = windows_of(state, extra, frame);
      bool coherent = extra_windows.empty();
      if (!coherent) {
        combined.insert(combined.end(), extra_windows.begin(), extra_windows.end());
        coherent = group_incoherence(combined, params) < params.incoherence_threshold;
      }
      for (auto m : extra) {
        auto lc = group.last_coherent.find(m);
        const bool in_grace = lc == group.last_coherent.end() || frame - lc->second <= params.window;
        if (!coherent && !in_grace) continue;
        state.add_member(gid, frame, m);
        if (coherent) group.last_coherent[m] = frame;
        result.admitted.insert(m);
      }
    }
  }
  return result;
}

std::vector<GroupLifecycleEvent> merge_groups(TrackerState& state, FrameId frame) {
  const auto& params = state.params();
  std::vector<GroupLifecycleEvent> events;
  for (FrameId sf = frame + 1; sf <= frame + params.window - 1; ++sf) {
    const auto* mobiles = state.frame_mobiles(sf);
    if (!mobiles) continue;
    for (const auto& [sid, son] : *mobiles) {
      std::vector<GroupId> fathers_groups;
      for (const auto& f : son.fathers) {
        if (f.probability < params.link_threshold || f.frame < frame || f.frame >= sf) continue;
        if (auto g = state.group_at(f.frame, f.id))
          if (std::find(fathers_groups.begin(), fathers_groups.end(), *g) == fathers_groups.end())
            fathers_groups.push_back(*g);
      }
      if (fathers_groups.size() < 2) continue;
      std::sort(fathers_groups.begin(), fathers_groups.end(), [&](GroupId a, GroupId b) {
        return older(state.groups().at(a), state.groups().at(b));
      });
      const GroupId survivor = fathers_groups.front();
      for (std::size_t k = 1; k < fathers_groups.size(); ++k) {
        state.merge_into(survivor, fathers_groups[k], frame);
        events.push_back({LifecycleKind::Merged, frame, {survivor, fathers_groups[k]}, {}});
      }
    }
  }
  return events;
}

std::vector<GroupLifecycleEvent> create_groups(TrackerState& state, const UpdateResult& update,
                                               std::span<const MobileCluster> clusters, FrameId frame) {
  const auto& params = state.params();
  const auto& ctx = state.context();
  std::vector<GroupLifecycleEvent> events;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const auto& cands = update.creation_candidates[c];
    if (cands.empty()) continue;
    auto windows = windows_of(state, cands, frame);
    if (windows.empty()) continue;

    if (cands.size() == 1) {
      const MobileId id = cands.front();
      const Mobile* m = state.find_mobile(frame, id);
      if (!m || m->cls != ObjectClass::GroupOfPersons) continue;
      const auto& w = windows.front();
      std::size_t observed = 0, group_sized = 0;
      for (std::size_t i = 0; i < w.observed_mask.size(); ++i) {
        if (!w.observed_mask[i]) continue;
        ++observed;
        const Mobile* s = state.find_mobile(w.start + static_cast<FrameId>(i), id);
        if (s && s->cls == ObjectClass::GroupOfPersons) ++group_sized;
      }
      bool stays_group_sized = 2 * group_sized > observed;
      bool near_others = false;
      if (const auto* all = state.frame_mobiles(frame))
        for (const auto& [oid, o] : *all)
          if (oid != id && distance(o.position.ground(), m->position.ground()) <
                               0.1 * ctx.ground_bounds.diagonal())
            near_others = true;
      if (!stays_group_sized && !near_others) continue;
    } else if (windows.size() < 2) {
      continue;
    }

    const double inc = group_incoherence(windows, params);
    if (!(inc < params.incoherence_threshold)) continue;
    std::set<MobileId> members;
    for (const auto& w : windows) members.insert(w.owner);
    GroupId gid = state.create_group(frame, members);
    events.push_back({LifecycleKind::Created, frame, {gid}, {members.begin(), members.end()}});
  }
  return events;
}

std::vector<GroupLifecycleEvent> terminate_groups(TrackerState& state, FrameId frame) {
  const auto& params = state.params();
  const FrameId horizon = static_cast<FrameId>(params.stale_factor) * params.window;
  std::vector<GroupLifecycleEvent> events;
  std::vector<GroupId> stale;
  for (const auto& [gid, g] : state.groups())
    if (frame - g.last_member_frame > horizon) stale.push_back(gid);
  for (auto gid : stale) {
    state.erase_group(gid);
    events.push_back({LifecycleKind::Terminated, frame, {gid}, {}});
  }
  for (const auto& [gid, g] : state.groups()) {
    auto& mutable_group = state.group(gid);
    auto& byf = mutable_group.members_by_frame;
    byf.erase(byf.begin(), byf.lower_bound(frame - horizon));
  }
  state.forget_before(frame - params.window);
  return events;
}

// ---------------------------------------------------------------------------
// Streaming driver

GroupTracker::GroupTracker(TrackerParams params, SceneContext context) : state_(params, std::move(context)) {}

StepOutput GroupTracker::push(const DetectionFrame& frame) {
  if (!state_.empty() && frame.frame <= state_.latest_frame())
    throw std::invalid_argument("out-of-order frame " + std::to_string(frame.frame));
  if (!first_frame_) {
    first_frame_ = frame.frame;
    next_working_ = frame.frame;
  }
  state_.add_frame(frame);
  StepOutput out;
  while (*next_working_ + state_.params().window <= frame.frame) process((*next_working_)++, out);
  return out;
}

StepOutput GroupTracker::flush() {
  StepOutput out;
  if (!next_working_) return out;
  while (*next_working_ <= state_.latest_frame()) process((*next_working_)++, out);
  return out;
}

void GroupTracker::process(FrameId frame, StepOutput& out) {
  const auto& params = state_.params();
  std::vector<MobileCluster> clusters;
  if (const auto* mobiles = state_.frame_mobiles(frame)) {
    std::vector<FeaturePoint> features;
    for (const auto& [id, m] : *mobiles) {
      if (auto w = state_.window_for(id, frame))
        features.push_back(normalize(*w, state_.context(), params));
      else
        clusters.push_back({{id}});
    }
    if (!features.empty())
      for (auto& c : mean_shift(features, {params.tolerance}))
        clusters.push_back({std::move(c.members)});
    std::sort(clusters.begin(), clusters.end(),
              [](const MobileCluster& a, const MobileCluster& b) { return a.members.front() < b.members.front(); });
  }

  auto update = update_groups(state_, clusters, frame);
  state_.mark_decided(frame);
  auto merged = merge_groups(state_, frame);
  auto created = create_groups(state_, update, clusters, frame);
  out.events.insert(out.events.end(), merged.begin(), merged.end());
  out.events.insert(out.events.end(), created.begin(), created.end());

  const auto* mobiles = state_.frame_mobiles(frame);
  std::vector<GroupId> ids;
  for (const auto& [gid, _] : state_.groups()) ids.push_back(gid);
  for (auto gid : ids) {
    auto& g = state_.group(gid);
    auto it = g.members_by_frame.find(frame);
    if (it == g.members_by_frame.end() || it->second.empty()) continue;
    const auto& current = it->second;

    std::vector<MobileId> left;
    for (auto m : g.previous_members)
      if (!current.count(m) && mobiles && mobiles->count(m)) left.push_back(m);
    if (!left.empty()) out.events.push_back({LifecycleKind::Split, frame, {gid}, left});
    g.previous_members = current;

    std::vector<MobileId> members(current.begin(), current.end());
    auto windows = windows_of(state_, members, frame);
    g.stats = group_statistics(windows, params);
    g.incoherence = group_incoherence(g.stats, params);
    out.snapshots.push_back({frame, gid, g.incoherence, members});
  }

  auto terminated = terminate_groups(state_, frame);
  out.events.insert(out.events.end(), terminated.begin(), terminated.end());
}

TrackingResult track_stream(const DetectionStream& stream, const TrackerParams& params, const SceneContext& context,
                            bool flush) {
  GroupTracker tracker(params, context);
  TrackingResult result;
  auto take = [&](StepOutput&& o) {
    result.snapshots.insert(result.snapshots.end(), o.snapshots.begin(), o.snapshots.end());
    result.events.insert(result.events.end(), o.events.begin(), o.events.end());
  };
  for (const auto& f : stream.frames) take(tracker.push(f));
  if (flush) take(tracker.flush());
  return result;
}

}  // namespace grouptrack
