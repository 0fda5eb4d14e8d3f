#include "grouptrack/engine.hpp"
#include "grouptrack/primitives.hpp"
#include "grouptrack/screk/parser.hpp"

#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

using namespace grouptrack;
using screk::Ontology;

namespace {

/// Truth of scripted primitives per (group key, frame).
using Schedule = std::map<std::string, std::set<std::pair<std::string, FrameId>>>;

PrimitiveRegistry scripted(std::shared_ptr<Schedule> s, std::initializer_list<std::string> names) {
  PrimitiveRegistry r;
  for (const auto& n : names)
    r[n] = [s, n](const PrimitiveContext& ctx, std::span<const SceneObject* const> args) {
      return (*s)[n].count({args[0]->ref.key, ctx.frame}) > 0;
    };
  return r;
}

void set_true(Schedule& s, const std::string& model, const std::string& key, FrameId from, FrameId to) {
  for (FrameId f = from; f <= to; ++f) s[model].insert({key, f});
}

SceneObject group(const std::string& key, double x = 0, double y = 0) {
  GroupFeatures g;
  g.id = std::stoll(key);
  g.position = {x, y, 0};
  return group_object(g);
}

Ontology with_prelude(std::string_view text) {
  return screk::merge(screk::builtin_prelude(), screk::parse_ontology(text));
}

constexpr std::string_view before_model = R"(
PrimitiveState(B, PhysicalObjects((g:Group)))
PrimitiveState(C, PhysicalObjects((g:Group)))
CompositeEvent(A, PhysicalObjects((g:Group)) Components((b:B(g)) (c:C(g))) Constraints((b before c)))
)";

std::vector<RecognizedEvent> run(EventEngine& e, FrameId last, std::vector<SceneObject> objects,
                                 std::vector<std::pair<FrameId, std::vector<RecognizedEvent>>>* per_step = nullptr) {
  for (FrameId f = 0; f <= last; ++f) {
    auto got = e.step({f, objects, {}});
    if (per_step) per_step->push_back({f, got});
  }
  e.flush();
  return e.events();
}

std::string read(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("allen relations on inclusive intervals") {
  CHECK(allen(AllenRelation::Before, {0, 5}, {7, 10}));
  CHECK(allen(AllenRelation::Meets, {0, 5}, {6, 10}));
  CHECK_FALSE(allen(AllenRelation::Before, {0, 5}, {6, 10}));
  CHECK(allen(AllenRelation::During, {3, 4}, {0, 9}));
  CHECK(allen(AllenRelation::Overlaps, {0, 5}, {3, 9}));
  CHECK(allen(AllenRelation::Starts, {0, 5}, {0, 9}));
  CHECK(allen(AllenRelation::Finishes, {4, 9}, {0, 9}));
  CHECK(allen(AllenRelation::Equals, {4, 9}, {4, 9}));
  CHECK_THROWS_AS(allen(static_cast<AllenRelation>(42), {0, 1}, {2, 3}), std::invalid_argument);
}

TEST_CASE("cartesian instantiation") {
  auto s = std::make_shared<Schedule>();
  EventEngine e(screk::builtin_prelude(), scripted(s, {"Group_Stays_Inside_Zone"}));
  std::vector<SceneObject> objs{group("1"), group("2")};
  for (int z = 0; z < 3; ++z)
    objs.push_back(zone_object({"z" + std::to_string(z), {{0, 0}, {1, 0}, {1, 1}}}));
  e.step({0, objs, {}});
  CHECK(e.last_instantiation_count() == 6);
}

TEST_CASE("stop primitive from the position history") {
  auto reg = builtin_primitives();
  ObjectStore store;
  auto at = [&](double speed, FrameId f) {
    auto g = group("1", 10 + speed * static_cast<double>(f) / 10.0, 5);
    return g;
  };
  for (double speed : {0.1, 0.5}) {
    ObjectStore st;
    for (FrameId f = 0; f < 10; ++f) st.record(f, at(speed, f));
    const auto now = at(speed, 10);
    st.record(10, now);
    const SceneObject* args[] = {&now};
    PrimitiveContext ctx{10, 10.0, st, {}};
    CHECK(reg.at("Group_Stop")(ctx, args) == (speed < 0.3));
  }
}

TEST_CASE("near equipment primitive") {
  auto reg = builtin_primitives();
  ObjectStore st;
  const auto g = group("1", 10, 10);
  const auto close = equipment_object({"shop_window", {10, 11.2}});
  const auto far = equipment_object({"door", {10, 12.5}});
  PrimitiveContext ctx{0, 10.0, st, {}};
  const SceneObject* a[] = {&g, &close};
  const SceneObject* b[] = {&g, &far};
  CHECK(reg.at("Group_Near_Equipment")(ctx, a));
  CHECK_FALSE(reg.at("Group_Near_Equipment")(ctx, b));
}

TEST_CASE("zone primitives") {
  auto reg = builtin_primitives();
  ObjectStore st;
  const auto in = group("1", 5, 4), out = group("2", 11, 4);
  const auto z = zone_object({"hall", {{0, 0}, {10, 0}, {10, 8}, {0, 8}}});
  PrimitiveContext ctx{0, 10.0, st, {}};
  const SceneObject* a[] = {&in, &z};
  const SceneObject* b[] = {&out, &z};
  CHECK(reg.at("Group_Stays_Inside_Zone")(ctx, a));
  CHECK_FALSE(reg.at("Group_Stays_Inside_Zone")(ctx, b));
  CHECK_FALSE(reg.at("Group_Outside_Zone")(ctx, a));
  CHECK(reg.at("Group_Outside_Zone")(ctx, b));
}

TEST_CASE("lifecycle primitives") {
  auto reg = builtin_primitives();
  ObjectStore st;
  std::vector<GroupLifecycleEvent> ev{{LifecycleKind::Merged, 7, {1, 2}, {}}, {LifecycleKind::Created, 7, {3}, {3, 4}}};
  PrimitiveContext ctx{7, 10.0, st, ev};
  const auto g1 = group("1"), g2 = group("2"), g3 = group("3");
  const SceneObject* a1[] = {&g1};
  const SceneObject* a2[] = {&g2};
  const SceneObject* a3[] = {&g3};
  CHECK(reg.at("Group_Merge")(ctx, a1));
  CHECK_FALSE(reg.at("Group_Merge")(ctx, a2));
  CHECK(reg.at("Group_Created")(ctx, a3));
  CHECK_FALSE(reg.at("Group_Split")(ctx, a3));
}

TEST_CASE("lively primitive") {
  auto reg = builtin_primitives();
  ObjectStore st;
  GroupFeatures f;
  f.id = 1;
  f.member_speed_stddev = 1.5;
  const auto g = group_object(f);
  f.member_speed_stddev = 0.5;
  const auto h = group_object(f);
  PrimitiveContext ctx{0, 10.0, st, {}};
  const SceneObject* a[] = {&g};
  const SceneObject* b[] = {&h};
  CHECK(reg.at("Group_Lively")(ctx, a));
  CHECK_FALSE(reg.at("Group_Lively")(ctx, b));
}

TEST_CASE("primitive intervals") {
  const auto onto = with_prelude("PrimitiveState(B, PhysicalObjects((g:Group)))");
  SUBCASE("contiguous run") {
    auto s = std::make_shared<Schedule>();
    set_true(*s, "B", "1", 5, 9);
    EventEngine e(onto, scripted(s, {"B"}));
    run(e, 15, {group("1")});
    REQUIRE(e.primitive_events().size() == 1);
    CHECK(e.primitive_events()[0].interval == Interval{5, 9});
  }
  SUBCASE("gap bridged by max_gap") {
    auto s = std::make_shared<Schedule>();
    set_true(*s, "B", "1", 3, 3);
    set_true(*s, "B", "1", 5, 5);
    EngineParams p;
    p.max_gap = 1;
    EventEngine e(onto, scripted(s, {"B"}), p);
    run(e, 10, {group("1")});
    REQUIRE(e.primitive_events().size() == 1);
    CHECK(e.primitive_events()[0].interval == Interval{3, 5});
  }
  SUBCASE("gap without bridging") {
    auto s = std::make_shared<Schedule>();
    set_true(*s, "B", "1", 3, 3);
    set_true(*s, "B", "1", 5, 5);
    EventEngine e(onto, scripted(s, {"B"}));
    run(e, 10, {group("1")});
    CHECK(e.primitive_events().size() == 2);
  }
  SUBCASE("never true") {
    auto s = std::make_shared<Schedule>();
    EventEngine e(onto, scripted(s, {"B"}));
    run(e, 10, {group("1")});
    CHECK(e.primitive_events().empty());
  }
}

TEST_CASE("composite with before") {
  auto s = std::make_shared<Schedule>();
  set_true(*s, "B", "1", 0, 5);
  set_true(*s, "C", "1", 7, 9);
  EventEngine e(with_prelude(before_model), scripted(s, {"B", "C"}));
  std::vector<std::pair<FrameId, std::vector<RecognizedEvent>>> steps;
  auto ev = run(e, 20, {group("1")}, &steps);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].model == "A");
  CHECK(ev[0].interval == Interval{0, 9});
  CHECK(ev[0].bindings == std::vector<std::pair<std::string, std::string>>{{"g", "1"}});
  // fired when C closes
  for (const auto& [f, got] : steps) CHECK(got.empty() == (f != 10));
}

TEST_CASE("composite with the wrong order") {
  auto s = std::make_shared<Schedule>();
  set_true(*s, "B", "1", 7, 9);
  set_true(*s, "C", "1", 0, 5);
  EventEngine e(with_prelude(before_model), scripted(s, {"B", "C"}));
  CHECK(run(e, 20, {group("1")}).empty());
}

TEST_CASE("bindings must agree") {
  auto s = std::make_shared<Schedule>();
  set_true(*s, "B", "1", 0, 5);
  set_true(*s, "C", "2", 7, 9);
  EventEngine e(with_prelude(before_model), scripted(s, {"B", "C"}));
  CHECK(run(e, 20, {group("1"), group("2")}).empty());
}

TEST_CASE("browsing over scripted primitives") {
  const auto onto = with_prelude(read(GROUPTRACK_DATA_DIR "/group_events.screk"));
  for (const std::string name : {"shop_window", "kiosk"}) {
    auto s = std::make_shared<Schedule>();
    set_true(*s, "Group_Stop", "1", 40, 80);
    set_true(*s, "Group_Near_Equipment", "1", 35, 90);
    auto reg = scripted(s, {"Group_Stop", "Group_Near_Equipment"});
    for (auto& [k, v] : builtin_primitives())
      if (!reg.count(k)) reg[k] = v;
    EventEngine e(onto, reg);
    auto ev = run(e, 120, {group("1"), equipment_object({name, {0, 0}})});
    if (name == "shop_window") {
      REQUIRE(ev.size() == 1);
      CHECK(ev[0].model == "browsing");
      CHECK(ev[0].interval == Interval{35, 90});
      CHECK(ev[0].alarm == AlarmLevel::Urgent);
      CHECK(ev[0].bindings == std::vector<std::pair<std::string, std::string>>{{"g", "1"}, {"e", "shop_window"}});
    } else {
      CHECK(ev.empty());
    }
  }
}

TEST_CASE("missing evaluators are reported at construction") {
  CHECK_THROWS_AS(EventEngine(with_prelude(before_model), PrimitiveRegistry{}), EngineError);
  const auto unsupported = with_prelude(read(GROUPTRACK_DATA_DIR "/unsupported_events.screk"));
  try {
    EventEngine e(unsupported, builtin_primitives());
    FAIL("expected EngineError");
  } catch (const EngineError& ex) {
    CHECK(std::string(ex.what()).find("missing evaluator") != std::string::npos);
  }
}

TEST_CASE("invalid ontologies are rejected with diagnostics") {
  auto bad = with_prelude("CompositeEvent(x, PhysicalObjects((g:Group)) Components((c1:Nope(g))))");
  try {
    EventEngine e(bad, builtin_primitives());
    FAIL("expected EngineError");
  } catch (const EngineError& ex) {
    CHECK_FALSE(ex.diagnostics().empty());
  }
}

TEST_CASE("frames must increase") {
  EventEngine e(screk::builtin_prelude(), builtin_primitives());
  e.step({3, {}, {}});
  CHECK_THROWS_AS(e.step({3, {}, {}}), std::invalid_argument);
}

TEST_CASE("dedupe") {
  const RecognizedEvent a{"browsing", {{"g", "1"}}, {35, 90}, AlarmLevel::Urgent};
  auto ev = dedupe({a}, {"browsing", {{"g", "1"}}, {35, 91}, AlarmLevel::Urgent});
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].interval == Interval{35, 91});
  CHECK(dedupe({a}, {"browsing", {{"g", "2"}}, {35, 90}, AlarmLevel::Urgent}).size() == 2);
  CHECK(dedupe({a}, {"browsing", {{"g", "1"}}, {141, 150}, AlarmLevel::Urgent}).size() == 2);
  CHECK(dedupe({a}, {"browsing", {{"g", "1"}}, {141, 150}, AlarmLevel::Urgent}, 50).size() == 1);
  // a new recognition bridging two instances joins them
  std::vector<RecognizedEvent> two{{"m", {}, {0, 5}, AlarmLevel::NotUrgent}, {"m", {}, {10, 12}, AlarmLevel::NotUrgent}};
  auto joined = dedupe(two, {"m", {}, {4, 11}, AlarmLevel::NotUrgent});
  REQUIRE(joined.size() == 1);
  CHECK(joined[0].interval == Interval{0, 12});
}

TEST_CASE("alarm filter") {
  std::vector<RecognizedEvent> ev{{"a", {}, {0, 1}, AlarmLevel::NotUrgent},
                                  {"b", {}, {0, 1}, AlarmLevel::Urgent},
                                  {"c", {}, {0, 1}, AlarmLevel::VeryUrgent}};
  CHECK(filter_by_alarm(ev, AlarmLevel::Urgent).size() == 2);
  CHECK(filter_by_alarm(ev, AlarmLevel::NotUrgent).size() == 3);
  CHECK(filter_by_alarm({}, AlarmLevel::Urgent).empty());
}

TEST_CASE("event files round trip") {
  std::vector<RecognizedEvent> ev{{"browsing", {{"g", "1"}, {"e", "shop_window"}}, {35, 90}, AlarmLevel::Urgent},
                                  {"split_up", {{"g", "4"}}, {0, 80}, AlarmLevel::NotUrgent}};
  std::ostringstream o;
  write_events(o, ev);
  CHECK(o.str().starts_with("browsing,35,90,URGENT,g=1;e=shop_window\n"));
  CHECK(parse_events(o.str()) == ev);
}

TEST_CASE("property: the seven relations are mutually exclusive") {
  std::mt19937_64 rng(53);
  std::uniform_int_distribution<FrameId> u(0, 12);
  for (int trial = 0; trial < 1000; ++trial) {
    FrameId a0 = u(rng), a1 = u(rng), b0 = u(rng), b1 = u(rng);
    const Interval a{std::min(a0, a1), std::max(a0, a1)}, b{std::min(b0, b1), std::max(b0, b1)};
    int forward = 0, total = 0;
    for (std::size_t r = 0; r < screk::allen_relation_count; ++r) {
      const auto rel = static_cast<AllenRelation>(r);
      forward += allen(rel, a, b);
      total += allen(rel, a, b);
      if (rel != AllenRelation::Equals) total += allen(rel, b, a);
    }
    CHECK(forward <= 1);
    // with inverses the thirteen relations partition all pairs
    CHECK(total == 1);
  }
}

TEST_CASE("property: recognitions never end after the current frame, dedupe is idempotent") {
  std::mt19937_64 rng(59);
  const auto onto = with_prelude(before_model);
  for (int trial = 0; trial < 100; ++trial) {
    auto s = std::make_shared<Schedule>();
    for (const char* m : {"B", "C"})
      for (FrameId f = 0; f < 50; ++f)
        for (const char* g : {"1", "2"})
          if (rng() % 3 == 0) (*s)[m].insert({g, f});
    EngineParams p;
    p.max_gap = static_cast<FrameId>(rng() % 3);
    EventEngine e(onto, scripted(s, {"B", "C"}), p);
    for (FrameId f = 0; f < 50; ++f)
      for (const auto& ev : e.step({f, {group("1"), group("2")}, {}})) CHECK(ev.interval.end <= f);
    e.flush();
    auto events = e.events();
    for (const auto& ev : e.raw_events()) CHECK(dedupe(events, ev, p.max_gap) == events);
  }
}
