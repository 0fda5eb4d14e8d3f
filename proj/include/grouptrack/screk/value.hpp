#pragma once

#include "grouptrack/scene.hpp"

#include <compare>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace grouptrack::screk {

/// The 11 predefined attribute types, in the order of Value's alternatives.
enum class BasicType {
  Bool,
  Int,
  Double,
  String,
  Timestamp,
  Interval,
  Point2I,
  Point2D,
  Point3I,
  Point3D,
  Point3DList,
};

inline constexpr std::size_t basic_type_count = 11;

/// Keyword used in class declarations, e.g. "CSInt".
std::string_view type_keyword(BasicType t);
std::optional<BasicType> basic_type_from_keyword(std::string_view keyword);

struct Timestamp {
  FrameId frame = 0;
  auto operator<=>(const Timestamp&) const = default;
};

struct FrameInterval {
  FrameId start = 0;
  FrameId end = 0;
  bool operator==(const FrameInterval&) const = default;
};

struct Point2I {
  std::int64_t x = 0, y = 0;
  bool operator==(const Point2I&) const = default;
};
struct Point2D {
  double x = 0, y = 0;
  bool operator==(const Point2D&) const = default;
};
struct Point3I {
  std::int64_t x = 0, y = 0, z = 0;
  bool operator==(const Point3I&) const = default;
};
struct Point3D {
  double x = 0, y = 0, z = 0;
  bool operator==(const Point3D&) const = default;
};
using Point3DList = std::vector<Point3D>;

using Value = std::variant<bool, std::int64_t, double, std::string, Timestamp, FrameInterval, Point2I, Point2D, Point3I,
                           Point3D, Point3DList>;

BasicType type_of(const Value& v);

/// Literal syntax understood by the scenario parser:
/// true, 12, 1.5, "s", @12, @[3,9], (1,2), (1.0,2.0), (1,2,3), (1.0,2.0,3.0),
/// [(1.0,2.0,3.0),...]. Doubles always carry a '.' or an exponent.
std::string format_value(const Value& v);

enum class Comparator { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view to_string(Comparator c);

/// Int, Double and Timestamp compare numerically with each other; strings
/// lexicographically; everything else supports only = and !=. Returns nothing
/// when the operands cannot be compared with `c`.
std::optional<bool> compare(const Value& lhs, Comparator c, const Value& rhs);

/// True when values of the two types can be compared with `c`.
bool comparable(BasicType lhs, Comparator c, BasicType rhs);

/// Bounded per-attribute history of (frame, value); the oldest entry is
/// evicted first. Recording twice at the same frame replaces the value.
class History {
 public:
  explicit History(std::size_t capacity = 128);

  void record(FrameId frame, Value value);
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }

  /// Latest value recorded at or before `frame`.
  const Value* at_or_before(FrameId frame) const;
  const Value* latest() const;
  const std::deque<std::pair<FrameId, Value>>& entries() const { return entries_; }

 private:
  std::size_t capacity_;
  std::deque<std::pair<FrameId, Value>> entries_;
};

}  // namespace grouptrack::screk
