#include "grouptrack/classifier.hpp"
#include "grouptrack/synth.hpp"
#include "grouptrack/tracker.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace grouptrack;

namespace {

SceneContext ctx(double fps = 10.0) {
  SceneContext c;
  c.ground_bounds = {{0, 0}, {80, 40}};
  c.frame_rate = fps;
  return c;
}

TrackerParams params(int T) {
  TrackerParams p;
  p.window = T;
  return p;
}

Mobile mob(MobileId id, FrameId f, double x, double y, std::vector<FatherLink> fathers = {}) {
  return {id, f, {x, y, 0}, {0.5, 0.5, 1.7}, ObjectClass::Person, std::move(fathers)};
}

WindowTrajectory straight(MobileId id, int T, Vec2 p0, Vec2 v, double fps = 10.0) {
  TrackSamples s;
  for (int i = 0; i < T; ++i) s.push_back({i, {p0.x + v.x * i / fps, p0.y + v.y * i / fps}});
  auto w = *build_window(s, 0, params(T), ctx(fps));
  w.owner = id;
  return w;
}

TrackingResult run(SynthScenario sc, std::uint64_t seed = 1) {
  SynthParams sp;
  sp.scenario = sc;
  sp.seed = seed;
  auto out = synthesize(sp);
  classify_all(out.detections, default_class_models());
  return track_stream(out.detections, TrackerParams{}, out.context);
}

std::size_t count(const TrackingResult& r, LifecycleKind k) {
  std::size_t n = 0;
  for (const auto& e : r.events) n += e.kind == k;
  return n;
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(TrackerParams{}.validate());
  auto p = TrackerParams{};
  p.window = 1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.link_threshold = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.tolerance = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.w_speed = -1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.stale_factor = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("defaults") {
  TrackerParams p;
  CHECK(p.window == 20);
  CHECK(p.link_threshold == 0.6);
  CHECK(p.max_speed == 10.0);
  CHECK(p.w_distance == 7.0);
  CHECK(p.w_speed == 5.0);
  CHECK(p.w_direction == 5.0);
  CHECK(p.incoherence_threshold == 15.0);
  CHECK(p.stale_factor == 5);
}

TEST_CASE("window interpolates missing positions") {
  TrackSamples s{{0, {1, 1}}, {2, {3, 5}}};
  auto w = build_window(s, 0, params(3), ctx());
  REQUIRE(w);
  CHECK(w->positions[1] == Vec2{2, 3});
  CHECK(w->observed_mask == std::vector<bool>{true, false, true});
  CHECK(w->speeds[0].x == doctest::Approx(10.0));
  CHECK(w->speeds[0].y == doctest::Approx(20.0));
}

TEST_CASE("fully observed window") {
  auto w = straight(1, 5, {1, 1}, {1.2, 0});
  CHECK(w.observed_mask == std::vector<bool>(5, true));
  CHECK(w.speeds.size() == 4);
  for (const auto& v : w.speeds) CHECK(std::isfinite(v.x));
}

TEST_CASE("window needs two observations") {
  CHECK_FALSE(build_window({{1, {1, 1}}}, 0, params(3), ctx()));
  CHECK_FALSE(build_window({{5, {1, 1}}, {6, {1, 1}}}, 0, params(3), ctx()));
}

TEST_CASE("normalization") {
  auto p = params(20);
  SceneContext c = ctx();
  TrackSamples s;
  s.push_back({0, {0, 0}});
  s.push_back({19, {80, 40}});
  auto w = build_window(s, 0, p, c);
  REQUIRE(w);
  auto f = normalize(*w, c, p);
  CHECK(f.coords.size() == 78);
  CHECK(f.coords[0] == 0.0);
  CHECK(f.coords[1] == 0.0);
  CHECK(f.coords[38] == 1.0);
  CHECK(f.coords[39] == 1.0);

  // speed components are mapped from [-max_speed, max_speed]
  auto slow = straight(1, 3, {10, 10}, {5, 0});
  auto g = normalize(slow, c, params(3));
  REQUIRE(g.coords.size() == 10);
  CHECK(g.coords[6] == doctest::Approx(0.75));
  CHECK(g.coords[7] == doctest::Approx(0.5));
  auto fast = straight(1, 3, {10, 10}, {-40, 0});
  CHECK(normalize(fast, c, params(3)).coords[6] == doctest::Approx(0.0));
}

TEST_CASE("incoherence of one trajectory is zero") {
  std::vector<WindowTrajectory> one{straight(1, 20, {5, 5}, {1, 0.5})};
  CHECK(group_incoherence(one, TrackerParams{}) == 0.0);
}

TEST_CASE("pair one meter apart with equal velocity") {
  std::vector<WindowTrajectory> pair{straight(1, 20, {5, 5}, {1.2, 0}), straight(2, 20, {5, 6}, {1.2, 0})};
  auto st = group_statistics(pair, TrackerParams{});
  CHECK(st.distance_avg == doctest::Approx(1.0));
  CHECK(st.speed_stddev == doctest::Approx(0.0));
  CHECK(st.direction_stddev == doctest::Approx(0.0));
  CHECK(group_incoherence(pair, TrackerParams{}) == doctest::Approx(7.0));
}

TEST_CASE("circular standard deviation") {
  std::vector<Vec2> same{{1, 0}, {1, 0}};
  CHECK(circular_stddev(same) == 0.0);
  std::vector<Vec2> one{{0, 1}};
  CHECK(circular_stddev(one) == 0.0);
  // R = cos(pi/4) for two headings pi/2 apart
  std::vector<Vec2> right{{1, 0}, {0, 1}};
  CHECK(circular_stddev(right) == doctest::Approx(std::sqrt(-2 * std::log(std::cos(std::numbers::pi / 4)))));
  // opposite headings cancel: R = 0
  std::vector<Vec2> opposite{{1, 0}, {-1, 0}};
  CHECK(circular_stddev(opposite) == std::numeric_limits<double>::infinity());
}

TEST_CASE("opposite walkers are never coherent") {
  std::vector<WindowTrajectory> pair{straight(1, 20, {5, 5}, {1, 0}), straight(2, 20, {5, 5}, {-1, 0})};
  CHECK(group_incoherence(pair, TrackerParams{}) > 15.0);
}

TEST_CASE("stationary members have no heading") {
  std::vector<WindowTrajectory> pair{straight(1, 20, {5, 5}, {0, 0}), straight(2, 20, {5, 5.5}, {0.01, 0})};
  auto st = group_statistics(pair, TrackerParams{});
  CHECK(st.direction_stddev == 0.0);
  CHECK(st.distance_avg == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("probable group through a direct father") {
  TrackerState st(params(20), ctx());
  st.add_frame({0, {mob(1, 0, 1, 1)}});
  st.add_frame({1, {mob(2, 1, 1, 1, {{1, 0.8, -1}})}});
  auto g = st.create_group(0, {1});
  st.mark_decided(0);
  CHECK(st.probable_group(1, 2) == g);
}

TEST_CASE("weak father link gives no probable group") {
  TrackerState st(params(20), ctx());
  st.add_frame({0, {mob(1, 0, 1, 1)}});
  st.add_frame({1, {mob(2, 1, 1, 1, {{1, 0.5, -1}})}});
  st.create_group(0, {1});
  st.mark_decided(0);
  CHECK_FALSE(st.probable_group(1, 2));
}

TEST_CASE("probable group through an ungrouped father") {
  TrackerState st(params(20), ctx());
  st.add_frame({0, {mob(1, 0, 1, 1)}});
  st.add_frame({1, {mob(2, 1, 1, 1, {{1, 0.9, -1}})}});
  st.add_frame({2, {mob(3, 2, 1, 1, {{2, 0.9, -1}})}});
  auto g = st.create_group(0, {1});
  st.mark_decided(1);
  CHECK(st.probable_group(2, 3) == g);
}

TEST_CASE("ancestors beyond the window are ignored") {
  TrackerState st(params(2), ctx());
  st.add_frame({0, {mob(1, 0, 1, 1)}});
  st.add_frame({1, {mob(2, 1, 1, 1, {{1, 0.9, -1}})}});
  st.add_frame({2, {mob(3, 2, 1, 1, {{2, 0.9, -1}})}});
  st.add_frame({3, {mob(4, 3, 1, 1, {{3, 0.9, -1}})}});
  st.create_group(0, {1});
  st.mark_decided(2);
  CHECK(st.probable_group(2, 3));
  CHECK_FALSE(st.probable_group(3, 4));
}

TEST_CASE("update admits only the mobiles of the majority group") {
  TrackerState st(params(3), ctx());
  st.add_frame({0, {mob(1, 0, 10, 10), mob(2, 0, 10, 10.5)}});
  st.add_frame({1, {mob(1, 1, 10.1, 10, {{1, 0.9, -1}}), mob(2, 1, 10.1, 10.5, {{2, 0.9, -1}}), mob(3, 1, 10.1, 11)}});
  st.add_frame({2, {mob(1, 2, 10.2, 10, {{1, 0.9, -1}}), mob(2, 2, 10.2, 10.5, {{2, 0.9, -1}}),
                    mob(3, 2, 10.2, 11, {{3, 0.9, -1}})}});
  st.add_frame({3, {mob(1, 3, 10.3, 10, {{1, 0.9, -1}}), mob(2, 3, 10.3, 10.5, {{2, 0.9, -1}}),
                    mob(3, 3, 10.3, 11, {{3, 0.9, -1}})}});
  auto g = st.create_group(0, {1, 2});
  st.mark_decided(0);
  std::vector<MobileCluster> clusters{{{1, 2, 3}}};
  auto u = update_groups(st, clusters, 1);
  CHECK(u.association.at(0) == g);
  CHECK(u.admitted == std::set<MobileId>{1, 2});
  CHECK(u.creation_candidates.at(0) == std::vector<MobileId>{3});
}

TEST_CASE("cluster without probable groups goes to creation") {
  TrackerState st(params(3), ctx());
  st.add_frame({0, {mob(1, 0, 10, 10), mob(2, 0, 10, 10.5)}});
  std::vector<MobileCluster> clusters{{{1, 2}}};
  auto u = update_groups(st, clusters, 0);
  CHECK_FALSE(u.association.at(0));
  CHECK(u.admitted.empty());
  CHECK(u.creation_candidates.at(0) == std::vector<MobileId>{1, 2});
}

TEST_CASE("two clusters may feed one group") {
  TrackerState st(params(3), ctx());
  st.add_frame({0, {mob(1, 0, 10, 10), mob(2, 0, 10, 10.5)}});
  st.add_frame({1, {mob(1, 1, 10, 10, {{1, 0.9, -1}}), mob(2, 1, 10, 10.5, {{2, 0.9, -1}})}});
  auto g = st.create_group(0, {1, 2});
  st.mark_decided(0);
  std::vector<MobileCluster> clusters{{{1}}, {{2}}};
  auto u = update_groups(st, clusters, 1);
  CHECK(u.association.at(0) == g);
  CHECK(u.association.at(1) == g);
  CHECK(u.admitted == std::set<MobileId>{1, 2});
}

TEST_CASE("termination after stale_factor windows") {
  TrackerState st(params(20), ctx());
  st.add_frame({100, {mob(1, 100, 1, 1)}});
  st.add_frame({150, {mob(2, 150, 5, 5)}});
  auto old_g = st.create_group(100, {1});
  auto new_g = st.create_group(150, {2});
  auto ev = terminate_groups(st, 201);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].kind == LifecycleKind::Terminated);
  CHECK(ev[0].groups == std::vector<GroupId>{old_g});
  CHECK(st.groups().count(old_g) == 0);
  CHECK(st.groups().count(new_g) == 1);
}

TEST_CASE("frames must increase") {
  GroupTracker t(TrackerParams{}, ctx());
  t.push({5, {mob(1, 5, 1, 1)}});
  CHECK_THROWS_AS(t.push({5, {mob(1, 5, 1, 1)}}), std::invalid_argument);
  CHECK_THROWS_AS(t.push({3, {mob(1, 3, 1, 1)}}), std::invalid_argument);
}

TEST_CASE("empty stream") {
  auto r = track_stream(DetectionStream{}, TrackerParams{}, ctx());
  CHECK(r.snapshots.empty());
  CHECK(r.events.empty());
}

TEST_CASE("figure 4 bundles give one group") {
  auto r = run(SynthScenario::Fig4);
  std::set<GroupId> ids;
  for (const auto& s : r.snapshots) ids.insert(s.group);
  CHECK(ids.size() == 1);
  CHECK(count(r, LifecycleKind::Created) == 1);
  for (const auto& s : r.snapshots) CHECK(s.members == std::vector<MobileId>{1, 2});
}

TEST_CASE("diverging pair is split off") {
  auto r = run(SynthScenario::SplitAfterN);
  REQUIRE(count(r, LifecycleKind::Split) >= 1);
  for (const auto& e : r.events)
    if (e.kind == LifecycleKind::Split) {
      CHECK(e.mobiles == std::vector<MobileId>{3, 4});
      CHECK(e.frame > 60);
      CHECK(e.frame <= 100);
    }
}

TEST_CASE("merging blobs keep the older group") {
  auto r = run(SynthScenario::MergeAtN);
  REQUIRE(count(r, LifecycleKind::Merged) == 1);
  for (const auto& e : r.events)
    if (e.kind == LifecycleKind::Merged) {
      CHECK(e.groups == std::vector<GroupId>{1, 2});
      CHECK(e.survivor() == 1);
    }
  for (const auto& s : r.snapshots)
    if (s.frame > 61) CHECK(s.group == 1);
}

TEST_CASE("property: a mobile is in at most one group per frame") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed)
    for (auto sc : {SynthScenario::SplitAfterN, SynthScenario::MergeAtN, SynthScenario::Fig4}) {
      auto r = run(sc, seed);
      std::map<FrameId, std::set<MobileId>> seen;
      for (const auto& s : r.snapshots)
        for (auto m : s.members) CHECK(seen[s.frame].insert(m).second);
    }
}

TEST_CASE("property: ids grow with creation time and merges keep the oldest") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto r = run(SynthScenario::MergeAtN, seed);
    std::map<GroupId, FrameId> created;
    GroupId last = 0;
    for (const auto& e : r.events) {
      if (e.kind == LifecycleKind::Created) {
        CHECK(e.groups[0] > last);
        last = e.groups[0];
        created[e.groups[0]] = e.frame;
      }
      if (e.kind == LifecycleKind::Merged) CHECK(created.at(e.groups[0]) <= created.at(e.groups[1]));
    }
  }
}

TEST_CASE("property: outputs at frame f do not depend on frames after f + T") {
  SynthParams sp;
  sp.scenario = SynthScenario::SplitAfterN;
  auto out = synthesize(sp);
  classify_all(out.detections, default_class_models());
  const auto full = track_stream(out.detections, TrackerParams{}, out.context, false);
  for (FrameId f : {10, 59, 75, 90, 120}) {
    DetectionStream cut;
    for (const auto& fr : out.detections.frames)
      if (fr.frame <= f + 20) cut.frames.push_back(fr);
    const auto part = track_stream(cut, TrackerParams{}, out.context, false);
    std::vector<GroupSnapshot> a, b;
    for (const auto& s : full.snapshots)
      if (s.frame <= f) a.push_back(s);
    for (const auto& s : part.snapshots)
      if (s.frame <= f) b.push_back(s);
    CHECK(a == b);
  }
}

TEST_CASE("property: tracking is deterministic") {
  for (auto sc : {SynthScenario::WalkTogether, SynthScenario::SplitAfterN, SynthScenario::MergeAtN}) {
    auto a = run(sc, 9);
    auto b = run(sc, 9);
    CHECK(a.snapshots == b.snapshots);
    CHECK(a.events == b.events);
  }
}

TEST_CASE("property: incoherence is translation invariant") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1, 1);
  const TrackerParams p;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 4);
    std::vector<TrackSamples> tracks(n);
    for (auto& t : tracks) {
      Vec2 pos{40 + 10 * u(rng), 20 + 10 * u(rng)};
      for (FrameId f = 0; f < 20; ++f) {
        pos.x += 0.2 * u(rng);
        pos.y += 0.2 * u(rng);
        if (rng() % 5) t.push_back({f, pos});
      }
    }
    const Vec2 off{30 * u(rng), 30 * u(rng)};
    std::vector<WindowTrajectory> a, b;
    for (const auto& t : tracks) {
      auto moved = t;
      for (auto& [f, q] : moved) q = {q.x + off.x, q.y + off.y};
      auto wa = build_window(t, 0, p, ctx());
      auto wb = build_window(moved, 0, p, ctx());
      REQUIRE(wa.has_value() == wb.has_value());
      if (wa) a.push_back(*wa), b.push_back(*wb);
    }
    if (a.empty()) continue;
    const auto sa = group_statistics(a, p), sb = group_statistics(b, p);
    CHECK(sa.distance_avg == doctest::Approx(sb.distance_avg).epsilon(1e-9));
    CHECK(sa.speed_stddev == doctest::Approx(sb.speed_stddev).epsilon(1e-6));
    CHECK(sa.direction_stddev == doctest::Approx(sb.direction_stddev).epsilon(1e-6));
    CHECK(group_incoherence(a, p) >= 0.0);
  }
}

TEST_CASE("property: update admits a mobile only into its probable group") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    TrackerState st(params(4), ctx());
    const int n = 6;
    for (FrameId f = 0; f < 8; ++f) {
      DetectionFrame fr{f, {}};
      for (MobileId id = 1; id <= n; ++id) {
        std::vector<FatherLink> fathers;
        if (f > 0) {
          fathers.push_back({id, 0.3 + 0.7 * u(rng), f - 1});
          if (rng() % 4 == 0) fathers.push_back({1 + static_cast<MobileId>(rng() % n), u(rng), f - 1});
          std::sort(fathers.begin(), fathers.end(), [](auto& a, auto& b) { return a.id < b.id; });
          fathers.erase(std::unique(fathers.begin(), fathers.end(), [](auto& a, auto& b) { return a.id == b.id; }),
                        fathers.end());
        }
        fr.mobiles.push_back(mob(id, f, 10 + 2 * u(rng) + 0.1 * f, 10 + 2 * u(rng), fathers));
      }
      st.add_frame(fr);
    }
    for (FrameId f = 0; f < 3; ++f) {
      std::set<MobileId> a, b;
      for (MobileId id = 1; id <= n; ++id) {
        auto r = rng() % 3;
        if (r == 0) a.insert(id);
        if (r == 1) b.insert(id);
      }
      if (!a.empty()) st.create_group(f, a);
      if (!b.empty()) st.create_group(f, b);
    }
    st.mark_decided(2);
    std::vector<MobileCluster> clusters(3);
    for (MobileId id = 1; id <= n; ++id) clusters[rng() % 3].members.push_back(id);
    std::erase_if(clusters, [](const MobileCluster& c) { return c.members.empty(); });
    std::map<MobileId, std::optional<GroupId>> pg;
    for (MobileId id = 1; id <= n; ++id) pg[id] = st.probable_group(3, id);
    auto res = update_groups(st, clusters, 3);
    for (std::size_t c = 0; c < clusters.size(); ++c)
      for (auto m : clusters[c].members)
        if (res.admitted.count(m)) {
          CHECK(res.association[c].has_value());
          CHECK(pg[m] == res.association[c]);
        }
  }
}
