#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace grouptrack {

/// Frame index. Every timestamp in the system is expressed in frames;
/// seconds are derived through SceneContext::frame_rate.
using FrameId = std::int64_t;
using MobileId = std::int64_t;
using GroupId = std::int64_t;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2&) const = default;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  bool operator==(const Vec3&) const = default;
  Vec2 ground() const { return {x, y}; }
};

double distance(Vec2 a, Vec2 b);

/// Raised by every text parser in the project. `line` is 1-based; `column`
/// is 1-based or 0 when the error concerns the whole line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column = 0);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& bare_message() const { return bare_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string bare_;
};

enum class ObjectClass { Person, GroupOfPersons, Noise, Unclassified };

std::string_view to_string(ObjectClass c);
std::optional<ObjectClass> object_class_from_string(std::string_view s);

struct FatherLink {
  MobileId id = 0;
  double probability = 0.0;
  /// Frame of the father record; resolved by the parser to the latest
  /// earlier frame where `id` was seen. Not serialized.
  FrameId frame = -1;
  bool operator==(const FatherLink&) const = default;
};

struct Mobile {
  MobileId id = 0;
  FrameId frame = 0;
  Vec3 position;
  /// width, depth, height in meters
  Vec3 size;
  ObjectClass cls = ObjectClass::Unclassified;
  std::vector<FatherLink> fathers;
  bool operator==(const Mobile&) const = default;
};

struct DetectionFrame {
  FrameId frame = 0;
  std::vector<Mobile> mobiles;  // sorted by id
};

struct DetectionStream {
  std::vector<DetectionFrame> frames;  // strictly increasing frame ids
  std::vector<std::string> warnings;

  std::size_t mobile_count() const;
};

struct Zone {
  std::string name;
  std::vector<Vec2> polygon;
};

struct Equipment {
  std::string name;
  Vec2 position;
};

struct Bounds {
  Vec2 min;
  Vec2 max;
  double diagonal() const;
};

struct SceneContext {
  Bounds ground_bounds{{0.0, 0.0}, {1.0, 1.0}};
  double frame_rate = 25.0;
  std::vector<Zone> zones;
  std::vector<Equipment> equipment;

  const Zone* find_zone(std::string_view name) const;
  const Equipment* find_equipment(std::string_view name) const;
};

struct GroundTruthGroup {
  std::int64_t gt_id = 0;
  std::map<FrameId, std::set<MobileId>> members;
};

/// One row of the group output: the members of a tracked group at a frame.
struct GroupSnapshot {
  FrameId frame = 0;
  GroupId group = 0;
  double incoherence = 0.0;
  std::vector<MobileId> members;  // sorted
  bool operator==(const GroupSnapshot&) const = default;
};

enum class LifecycleKind { Created, Split, Merged, Terminated };

std::string_view to_string(LifecycleKind k);
std::optional<LifecycleKind> lifecycle_kind_from_string(std::string_view s);

struct GroupLifecycleEvent {
  LifecycleKind kind = LifecycleKind::Created;
  FrameId frame = 0;
  /// For MERGED: the two source groups, survivor first. Otherwise one id.
  std::vector<GroupId> groups;
  /// For SPLIT: the mobiles that left the group.
  std::vector<MobileId> mobiles;
  GroupId survivor() const { return groups.empty() ? -1 : groups.front(); }
  bool operator==(const GroupLifecycleEvent&) const = default;
};

// Detection stream: `frame,id,x,y,z,w,d,h[,father:prob[;father:prob]...]`
DetectionStream parse_detections(std::istream& in);
DetectionStream parse_detections(std::string_view text);
void write_detections(std::ostream& out, const DetectionStream& stream);

// Scene context: `bounds`, `fps`, `zone`, `equipment` lines.
SceneContext parse_context(std::istream& in);
SceneContext parse_context(std::string_view text);
void write_context(std::ostream& out, const SceneContext& ctx);

// Ground truth: `frame,gt_id,member;member;...`
std::vector<GroundTruthGroup> parse_ground_truth(std::istream& in);
std::vector<GroundTruthGroup> parse_ground_truth(std::string_view text);
void write_ground_truth(std::ostream& out, const std::vector<GroundTruthGroup>& groups);

// Group output: `frame,group_id,incoherence,member;member;...`
std::vector<GroupSnapshot> parse_groups(std::istream& in);
std::vector<GroupSnapshot> parse_groups(std::string_view text);
void write_groups(std::ostream& out, const std::vector<GroupSnapshot>& snapshots);

// Lifecycle output: `frame,kind,groups,mobiles` (ids `;`-separated)
std::vector<GroupLifecycleEvent> parse_lifecycle(std::istream& in);
std::vector<GroupLifecycleEvent> parse_lifecycle(std::string_view text);
void write_lifecycle(std::ostream& out, const std::vector<GroupLifecycleEvent>& events);

/// Even-odd rule; points on the boundary count as inside.
bool point_in_polygon(Vec2 p, const Zone& zone);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

}  // namespace grouptrack
