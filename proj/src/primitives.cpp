#include "grouptrack/primitives.hpp"

#include <cmath>

namespace grouptrack {

namespace {

using screk::Point3D;
using screk::Value;

template <typename T>
const T* attr(const SceneObject& o, const std::string& name) {
  auto it = o.attributes.find(name);
  return it == o.attributes.end() ? nullptr : std::get_if<T>(&it->second);
}

std::optional<Vec2> ground(const SceneObject& o) {
  if (auto p = attr<Point3D>(o, "Position")) return Vec2{p->x, p->y};
  return std::nullopt;
}

std::optional<Zone> zone_of(const SceneObject& o) {
  auto v = attr<screk::Point3DList>(o, "Vertices");
  if (!v || v->size() < 3) return std::nullopt;
  Zone z;
  for (const auto& p : *v) z.polygon.push_back({p.x, p.y});
  return z;
}

bool lifecycle_has(const PrimitiveContext& ctx, LifecycleKind kind, const SceneObject& g) {
  for (const auto& e : ctx.lifecycle)
    if (e.kind == kind && !e.groups.empty() && group_key(e.groups.front()) == g.ref.key) return true;
  return false;
}

}  // namespace

void PrimitiveParams::validate() const {
  if (!(stop_speed > 0)) throw std::invalid_argument("stop speed must be positive");
  if (stop_lookback < 1) throw std::invalid_argument("stop lookback must be >= 1");
  if (!(near_distance > 0)) throw std::invalid_argument("near distance must be positive");
  if (!(lively_stddev >= 0)) throw std::invalid_argument("lively stddev must be non-negative");
}

PrimitiveRegistry builtin_primitives(const PrimitiveParams& p) {
  p.validate();
  PrimitiveRegistry r;

  r["Group_Stop"] = [p](const PrimitiveContext& ctx, std::span<const SceneObject* const> args) {
    const SceneObject& g = *args[0];
    auto now = ground(g);
    if (!now) return false;
    // displacement from the oldest position within the lookback
    if (const auto* h = ctx.store.history(g.ref, "Position")) {
      for (const auto& [f, v] : h->entries()) {
        if (f < ctx.frame - p.stop_lookback || f >= ctx.frame) continue;
        const auto* then = std::get_if<Point3D>(&v);
        if (!then) break;
        const double dt = static_cast<double>(ctx.frame - f) / ctx.frame_rate;
        return distance(*now, {then->x, then->y}) / dt < p.stop_speed;
      }
    }
    if (auto s = attr<double>(g, "Speed")) return *s < p.stop_speed;
    return false;
  };

  r["Group_Near_Equipment"] = [p](const PrimitiveContext&, std::span<const SceneObject* const> args) {
    auto g = ground(*args[0]);
    auto e = ground(*args[1]);
    return g && e && distance(*g, *e) < p.near_distance;
  };

  r["Group_Stays_Inside_Zone"] = [](const PrimitiveContext&, std::span<const SceneObject* const> args) {
    auto g = ground(*args[0]);
    auto z = zone_of(*args[1]);
    return g && z && point_in_polygon(*g, *z);
  };

  r["Group_Outside_Zone"] = [](const PrimitiveContext&, std::span<const SceneObject* const> args) {
    auto g = ground(*args[0]);
    auto z = zone_of(*args[1]);
    return g && z && !point_in_polygon(*g, *z);
  };

  r["Group_Lively"] = [p](const PrimitiveContext&, std::span<const SceneObject* const> args) {
    auto s = attr<double>(*args[0], "MemberSpeedStdDev");
    return s && *s > p.lively_stddev;
  };

  r["Group_Created"] = [](const PrimitiveContext& ctx, std::span<const SceneObject* const> args) {
    return lifecycle_has(ctx, LifecycleKind::Created, *args[0]);
  };
  r["Group_Split"] = [](const PrimitiveContext& ctx, std::span<const SceneObject* const> args) {
    return lifecycle_has(ctx, LifecycleKind::Split, *args[0]);
  };
  r["Group_Merge"] = [](const PrimitiveContext& ctx, std::span<const SceneObject* const> args) {
    return lifecycle_has(ctx, LifecycleKind::Merged, *args[0]);
  };
  return r;
}

std::string group_key(GroupId id) { return std::to_string(id); }

SceneObject group_object(const GroupFeatures& g) {
  SceneObject o;
  o.ref = {"Group", group_key(g.id)};
  o.attributes["Position"] = Point3D{g.position.x, g.position.y, g.position.z};
  o.attributes["Size"] = Point3D{g.size.x, g.size.y, g.size.z};
  o.attributes["Speed"] = g.speed;
  o.attributes["NumberOfMobiles"] = g.member_count;
  o.attributes["AverageDistMobiles"] = g.average_distance;
  o.attributes["MemberSpeedStdDev"] = g.member_speed_stddev;
  return o;
}

SceneObject zone_object(const Zone& z) {
  SceneObject o;
  o.ref = {"Zone", z.name};
  o.attributes["Name"] = z.name;
  screk::Point3DList vertices;
  for (const auto& p : z.polygon) vertices.push_back({p.x, p.y, 0.0});
  o.attributes["Vertices"] = std::move(vertices);
  return o;
}

SceneObject equipment_object(const Equipment& e) {
  SceneObject o;
  o.ref = {"Equipment", e.name};
  o.attributes["Name"] = e.name;
  o.attributes["Position"] = Point3D{e.position.x, e.position.y, 0.0};
  return o;
}

}  // namespace grouptrack
