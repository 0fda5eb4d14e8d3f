#include "grouptrack/scene.hpp"

#include "text_util.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace grouptrack {

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error("line " + std::to_string(line) +
                         (column > 0 ? ", column " + std::to_string(column) : std::string()) + ": " +
                         message),
      line_(line),
      column_(column),
      bare_(message) {}

std::string_view to_string(ObjectClass c) {
  switch (c) {
    case ObjectClass::Person: return "PERSON";
    case ObjectClass::GroupOfPersons: return "GROUP_OF_PERSONS";
    case ObjectClass::Noise: return "NOISE";
    case ObjectClass::Unclassified: return "UNCLASSIFIED";
  }
  return "UNCLASSIFIED";
}

std::optional<ObjectClass> object_class_from_string(std::string_view s) {
  if (s == "PERSON") return ObjectClass::Person;
  if (s == "GROUP_OF_PERSONS") return ObjectClass::GroupOfPersons;
  if (s == "NOISE") return ObjectClass::Noise;
  if (s == "UNCLASSIFIED") return ObjectClass::Unclassified;
  return std::nullopt;
}

std::string_view to_string(LifecycleKind k) {
  switch (k) {
    case LifecycleKind::Created: return "CREATED";
    case LifecycleKind::Split: return "SPLIT";
    case LifecycleKind::Merged: return "MERGED";
    case LifecycleKind::Terminated: return "TERMINATED";
  }
  return "CREATED";
}

std::optional<LifecycleKind> lifecycle_kind_from_string(std::string_view s) {
  if (s == "CREATED") return LifecycleKind::Created;
  if (s == "SPLIT") return LifecycleKind::Split;
  if (s == "MERGED") return LifecycleKind::Merged;
  if (s == "TERMINATED") return LifecycleKind::Terminated;
  return std::nullopt;
}

std::size_t DetectionStream::mobile_count() const {
  std::size_t n = 0;
  for (const auto& f : frames) n += f.mobiles.size();
  return n;
}

double Bounds::diagonal() const { return distance(min, max); }

const Zone* SceneContext::find_zone(std::string_view name) const {
  for (const auto& z : zones)
    if (z.name == name) return &z;
  return nullptr;
}

const Equipment* SceneContext::find_equipment(std::string_view name) const {
  for (const auto& e : equipment)
    if (e.name == name) return &e;
  return nullptr;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

using detail::parse_double;
using detail::parse_int;
using detail::split;
using detail::strip_comment;
using detail::trim;

template <class Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body = trim(strip_comment(line, '#'));
    if (body.empty()) continue;
    fn(body, lineno);
  }
}

std::vector<std::int64_t> parse_id_list(std::string_view field, std::size_t lineno, const char* what) {
  std::vector<std::int64_t> ids;
  field = trim(field);
  if (field.empty()) return ids;
  for (auto part : split(field, ';')) {
    auto v = parse_int(trim(part));
    if (!v) throw ParseError(std::string("malformed ") + what + " '" + std::string(part) + "'", lineno);
    ids.push_back(*v);
  }
  return ids;
}

void write_id_list(std::ostream& out, const std::vector<std::int64_t>& ids) {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out << ';';
    out << ids[i];
  }
}

template <class T>
T parse_field(std::string_view s, std::size_t lineno, const char* what);

template <>
std::int64_t parse_field<std::int64_t>(std::string_view s, std::size_t lineno, const char* what) {
  auto v = parse_int(trim(s));
  if (!v) throw ParseError(std::string("malformed ") + what + " '" + std::string(s) + "'", lineno);
  return *v;
}

template <>
double parse_field<double>(std::string_view s, std::size_t lineno, const char* what) {
  auto v = parse_double(trim(s));
  if (!v) throw ParseError(std::string("malformed ") + what + " '" + std::string(s) + "'", lineno);
  return *v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Detections

DetectionStream parse_detections(std::istream& in) {
  DetectionStream stream;
  // id -> latest frame strictly before the frame currently being read
  std::unordered_map<MobileId, FrameId> seen_before;
  std::vector<MobileId> pending;  // ids of the frame currently being read
  FrameId current = -1;
  bool have_frame = false;

  auto commit_pending = [&] {
    for (auto id : pending) seen_before[id] = current;
    pending.clear();
  };

  for_each_line(in, [&](std::string_view body, std::size_t lineno) {
    auto fields = split(body, ',');
    if (fields.size() < 8 || fields.size() > 9)
      throw ParseError("expected 8 or 9 comma-separated fields, got " + std::to_string(fields.size()), lineno);

    Mobile m;
    m.frame = parse_field<std::int64_t>(fields[0], lineno, "frame");
    m.id = parse_field<std::int64_t>(fields[1], lineno, "id");
    m.position = {parse_field<double>(fields[2], lineno, "x"), parse_field<double>(fields[3], lineno, "y"),
                  parse_field<double>(fields[4], lineno, "z")};
    m.size = {parse_field<double>(fields[5], lineno, "width"), parse_field<double>(fields[6], lineno, "depth"),
              parse_field<double>(fields[7], lineno, "height")};
    if (m.frame < 0) throw ParseError("negative frame", lineno);
    if (!(m.size.x > 0 && m.size.y > 0 && m.size.z > 0)) throw ParseError("size components must be positive", lineno);

    if (have_frame && m.frame < current) throw ParseError("non-monotone frame", lineno);
    if (!have_frame || m.frame != current) {
      commit_pending();
      current = m.frame;
      have_frame = true;
      stream.frames.push_back({m.frame, {}});
    }
    if (std::find(pending.begin(), pending.end(), m.id) != pending.end())
      throw ParseError("duplicate id " + std::to_string(m.id) + " in frame " + std::to_string(m.frame), lineno);
    pending.push_back(m.id);

    if (fields.size() == 9 && !trim(fields[8]).empty()) {
      for (auto link : split(trim(fields[8]), ';')) {
        auto parts = split(trim(link), ':');
        if (parts.size() != 2) throw ParseError("malformed father link '" + std::string(link) + "'", lineno);
        FatherLink f;
        f.id = parse_field<std::int64_t>(parts[0], lineno, "father id");
        f.probability = parse_field<double>(parts[1], lineno, "link probability");
        if (!(f.probability >= 0.0 && f.probability <= 1.0))
          throw ParseError("link probability outside [0,1]", lineno);
        auto it = seen_before.find(f.id);
        if (it == seen_before.end()) {
          stream.warnings.push_back("line " + std::to_string(lineno) + ": unknown father id " +
                                    std::to_string(f.id) + " dropped");
          continue;
        }
        f.frame = it->second;
        m.fathers.push_back(f);
      }
    }
    stream.frames.back().mobiles.push_back(std::move(m));
  });

  for (auto& f : stream.frames)
    std::sort(f.mobiles.begin(), f.mobiles.end(), [](const Mobile& a, const Mobile& b) { return a.id < b.id; });
  return stream;
}

DetectionStream parse_detections(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_detections(in);
}

void write_detections(std::ostream& out, const DetectionStream& stream) {
  for (const auto& f : stream.frames) {
    for (const auto& m : f.mobiles) {
      out << m.frame << ',' << m.id << ',' << format_double(m.position.x) << ',' << format_double(m.position.y) << ','
          << format_double(m.position.z) << ',' << format_double(m.size.x) << ',' << format_double(m.size.y) << ','
          << format_double(m.size.z);
      if (!m.fathers.empty()) {
        out << ',';
        for (std::size_t i = 0; i < m.fathers.size(); ++i) {
          if (i) out << ';';
          out << m.fathers[i].id << ':' << format_double(m.fathers[i].probability);
        }
      }
      out << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Context

namespace {

std::vector<Vec2> parse_point_list(std::string_view rest, std::size_t lineno) {
  auto open = rest.find('(');
  auto close = rest.rfind(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open)
    throw ParseError("expected parenthesized point list", lineno);
  if (!trim(rest.substr(close + 1)).empty()) throw ParseError("trailing characters after point list", lineno);
  std::vector<Vec2> pts;
  auto inner = trim(rest.substr(open + 1, close - open - 1));
  if (inner.empty()) return pts;
  for (auto item : split(inner, ',')) {
    auto coords = detail::split_ws(trim(item));
    if (coords.size() != 2) throw ParseError("point must have two coordinates: '" + std::string(item) + "'", lineno);
    pts.push_back({parse_field<double>(coords[0], lineno, "coordinate"),
                   parse_field<double>(coords[1], lineno, "coordinate")});
  }
  return pts;
}

double cross(Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool on_segment(Vec2 p, Vec2 a, Vec2 b) {
  double scale = std::max({1.0, std::abs(a.x), std::abs(a.y), std::abs(b.x), std::abs(b.y)});
  if (std::abs(cross(a, b, p)) > 1e-12 * scale * scale) return false;
  return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) && p.y >= std::min(a.y, b.y) &&
         p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  double d1 = cross(q1, q2, p1), d2 = cross(q1, q2, p2), d3 = cross(p1, p2, q1), d4 = cross(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  return (d1 == 0 && on_segment(p1, q1, q2)) || (d2 == 0 && on_segment(p2, q1, q2)) ||
         (d3 == 0 && on_segment(q1, p1, p2)) || (d4 == 0 && on_segment(q2, p1, p2));
}

bool is_simple(const std::vector<Vec2>& poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

}  // namespace

SceneContext parse_context(std::istream& in) {
  SceneContext ctx;
  bool have_bounds = false;
  for_each_line(in, [&](std::string_view body, std::size_t lineno) {
    auto ws = body.find_first_of(" \t");
    std::string_view keyword = body.substr(0, ws);
    std::string_view rest = ws == std::string_view::npos ? std::string_view{} : trim(body.substr(ws));
    if (keyword == "bounds") {
      auto v = detail::split_ws(rest);
      if (v.size() != 4) throw ParseError("bounds expects 4 numbers", lineno);
      ctx.ground_bounds = {{parse_field<double>(v[0], lineno, "xmin"), parse_field<double>(v[1], lineno, "ymin")},
                           {parse_field<double>(v[2], lineno, "xmax"), parse_field<double>(v[3], lineno, "ymax")}};
      if (!(ctx.ground_bounds.max.x > ctx.ground_bounds.min.x && ctx.ground_bounds.max.y > ctx.ground_bounds.min.y))
        throw ParseError("degenerate ground bounds", lineno);
      have_bounds = true;
    } else if (keyword == "fps") {
      ctx.frame_rate = parse_field<double>(rest, lineno, "fps");
      if (!(ctx.frame_rate > 0)) throw ParseError("fps must be positive", lineno);
    } else if (keyword == "zone" || keyword == "equipment") {
      auto name_end = rest.find_first_of(" \t(");
      if (name_end == 0 || rest.empty()) throw ParseError("missing name", lineno);
      std::string name(rest.substr(0, name_end));
      auto pts = parse_point_list(rest.substr(name_end == std::string_view::npos ? rest.size() : name_end), lineno);
      if (ctx.find_zone(name) || ctx.find_equipment(name)) throw ParseError("duplicate name '" + name + "'", lineno);
      if (keyword == "zone") {
        if (pts.size() < 3) throw ParseError("zone '" + name + "' needs at least 3 vertices", lineno);
        if (!is_simple(pts)) throw ParseError("zone '" + name + "' is self-intersecting", lineno);
        ctx.zones.push_back({std::move(name), std::move(pts)});
      } else {
        if (pts.size() != 1) throw ParseError("equipment '" + name + "' needs exactly one point", lineno);
        ctx.equipment.push_back({std::move(name), pts.front()});
      }
    } else {
      throw ParseError("unknown keyword '" + std::string(keyword) + "'", lineno);
    }
  });
  if (!have_bounds) throw ParseError("missing 'bounds' line", 0);
  return ctx;
}

SceneContext parse_context(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_context(in);
}

void write_context(std::ostream& out, const SceneContext& ctx) {
  const auto& b = ctx.ground_bounds;
  out << "bounds " << format_double(b.min.x) << ' ' << format_double(b.min.y) << ' ' << format_double(b.max.x) << ' '
      << format_double(b.max.y) << '\n';
  out << "fps " << format_double(ctx.frame_rate) << '\n';
  for (const auto& z : ctx.zones) {
    out << "zone " << z.name << " (";
    for (std::size_t i = 0; i < z.polygon.size(); ++i) {
      if (i) out << ", ";
      out << format_double(z.polygon[i].x) << ' ' << format_double(z.polygon[i].y);
    }
    out << ")\n";
  }
  for (const auto& e : ctx.equipment)
    out << "equipment " << e.name << " (" << format_double(e.position.x) << ' ' << format_double(e.position.y)
        << ")\n";
}

// ---------------------------------------------------------------------------
// Ground truth

std::vector<GroundTruthGroup> parse_ground_truth(std::istream& in) {
  std::map<std::int64_t, GroundTruthGroup> by_id;
  FrameId last = -1;
  for_each_line(in, [&](std::string_view body, std::size_t lineno) {
    auto fields = split(body, ',');
    if (fields.size() != 3) throw ParseError("expected frame,gt_id,members", lineno);
    FrameId frame = parse_field<std::int64_t>(fields[0], lineno, "frame");
    auto gt = parse_field<std::int64_t>(fields[1], lineno, "gt_id");
    if (frame < last) throw ParseError("non-monotone frame", lineno);
    last = frame;
    auto members = parse_id_list(fields[2], lineno, "member id");
    if (members.empty()) throw ParseError("empty member list", lineno);
    auto& g = by_id[gt];
    g.gt_id = gt;
    g.members[frame].insert(members.begin(), members.end());
  });
  std::vector<GroundTruthGroup> out;
  for (auto& [id, g] : by_id) out.push_back(std::move(g));
  return out;
}

std::vector<GroundTruthGroup> parse_ground_truth(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_ground_truth(in);
}

void write_ground_truth(std::ostream& out, const std::vector<GroundTruthGroup>& groups) {
  std::map<FrameId, std::vector<const GroundTruthGroup*>> by_frame;
  for (const auto& g : groups)
    for (const auto& [f, _] : g.members) by_frame[f].push_back(&g);
  for (const auto& [f, gs] : by_frame) {
    for (const auto* g : gs) {
      const auto& m = g->members.at(f);
      out << f << ',' << g->gt_id << ',';
      write_id_list(out, std::vector<std::int64_t>(m.begin(), m.end()));
      out << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Group snapshots

std::vector<GroupSnapshot> parse_groups(std::istream& in) {
  std::vector<GroupSnapshot> out;
  for_each_line(in, [&](std::string_view body, std::size_t lineno) {
    auto fields = split(body, ',');
    if (fields.size() != 4) throw ParseError("expected frame,group_id,incoherence,members", lineno);
    GroupSnapshot s;
    s.frame = parse_field<std::int64_t>(fields[0], lineno, "frame");
    s.group = parse_field<std::int64_t>(fields[1], lineno, "group id");
    s.incoherence = parse_field<double>(fields[2], lineno, "incoherence");
    if (!out.empty() && s.frame < out.back().frame) throw ParseError("non-monotone frame", lineno);
    s.members = parse_id_list(fields[3], lineno, "member id");
    if (s.members.empty()) throw ParseError("empty member list", lineno);
    std::sort(s.members.begin(), s.members.end());
    out.push_back(std::move(s));
  });
  return out;
}

std::vector<GroupSnapshot> parse_groups(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_groups(in);
}

void write_groups(std::ostream& out, const std::vector<GroupSnapshot>& snapshots) {
  for (const auto& s : snapshots) {
    out << s.frame << ',' << s.group << ',' << format_double(s.incoherence) << ',';
    write_id_list(out, s.members);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Lifecycle events

std::vector<GroupLifecycleEvent> parse_lifecycle(std::istream& in) {
  std::vector<GroupLifecycleEvent> out;
  for_each_line(in, [&](std::string_view body, std::size_t lineno) {
    auto fields = split(body, ',');
    if (fields.size() != 4) throw ParseError("expected frame,kind,groups,mobiles", lineno);
    GroupLifecycleEvent e;
    e.frame = parse_field<std::int64_t>(fields[0], lineno, "frame");
    auto kind = lifecycle_kind_from_string(trim(fields[1]));
    if (!kind) throw ParseError("unknown lifecycle kind '" + std::string(fields[1]) + "'", lineno);
    e.kind = *kind;
    e.groups = parse_id_list(fields[2], lineno, "group id");
    e.mobiles = parse_id_list(fields[3], lineno, "mobile id");
    if (e.groups.empty()) throw ParseError("lifecycle event without group", lineno);
    if (e.kind == LifecycleKind::Merged && e.groups.size() != 2)
      throw ParseError("MERGED needs exactly two groups", lineno);
    out.push_back(std::move(e));
  });
  return out;
}

std::vector<GroupLifecycleEvent> parse_lifecycle(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_lifecycle(in);
}

void write_lifecycle(std::ostream& out, const std::vector<GroupLifecycleEvent>& events) {
  for (const auto& e : events) {
    out << e.frame << ',' << to_string(e.kind) << ',';
    write_id_list(out, e.groups);
    out << ',';
    write_id_list(out, e.mobiles);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------

bool point_in_polygon(Vec2 p, const Zone& zone) {
  const auto& poly = zone.polygon;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i)
    if (on_segment(p, poly[i], poly[(i + 1) % n])) return true;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

}  // namespace grouptrack
