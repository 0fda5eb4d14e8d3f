#pragma once

#include "grouptrack/scene.hpp"
#include "grouptrack/screk/ast.hpp"
#include "grouptrack/screk/optimize.hpp"
#include "grouptrack/screk/validate.hpp"

#include <compare>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace grouptrack {

using screk::AlarmLevel;
using screk::AllenRelation;

/// Inclusive frame interval.
struct Interval {
  FrameId start = 0;
  FrameId end = 0;
  bool operator==(const Interval&) const = default;
};

/// Allen relation between inclusive intervals:
///   before   a.end + 1 < b.start (at least one frame between)
///   meets    a.end + 1 = b.start
///   overlaps a.start < b.start <= a.end < b.end
///   starts   a.start = b.start, a.end < b.end
///   during   b.start < a.start, a.end < b.end
///   finishes a.end = b.end, a.start > b.start
///   equals   a = b
/// Throws std::invalid_argument for a value outside the enumeration.
bool allen(AllenRelation r, const Interval& a, const Interval& b);

Interval hull(const Interval& a, const Interval& b);
bool intersects(const Interval& a, const Interval& b);

struct ObjectRef {
  std::string class_name;
  /// Group id for groups, name for zones and equipment.
  std::string key;
  auto operator<=>(const ObjectRef&) const = default;
};

/// An object of the scene at one frame with its current attribute values.
struct SceneObject {
  ObjectRef ref;
  std::map<std::string, screk::Value> attributes;
};

struct FrameInput {
  FrameId frame = 0;
  std::vector<SceneObject> objects;
  std::vector<GroupLifecycleEvent> lifecycle;
};

struct RecognizedEvent {
  std::string model;
  /// variable -> object key, in the order of the model's physical objects
  std::vector<std::pair<std::string, std::string>> bindings;
  Interval interval;
  AlarmLevel alarm = AlarmLevel::NotUrgent;
  auto operator<=>(const RecognizedEvent& o) const {
    if (auto c = model <=> o.model; c != 0) return c;
    if (auto c = bindings <=> o.bindings; c != 0) return c;
    if (auto c = interval.start <=> o.interval.start; c != 0) return c;
    if (auto c = interval.end <=> o.interval.end; c != 0) return c;
    return alarm <=> o.alarm;
  }
  bool operator==(const RecognizedEvent&) const = default;
};

/// Attribute histories of every object seen so far.
class ObjectStore {
 public:
  explicit ObjectStore(std::size_t capacity = 128) : capacity_(capacity) {}

  void record(FrameId frame, const SceneObject& object);
  const screk::History* history(const ObjectRef& ref, const std::string& attribute) const;
  /// Latest value recorded at or before `frame`.
  const screk::Value* value_at(const ObjectRef& ref, const std::string& attribute, FrameId frame) const;

 private:
  std::size_t capacity_;
  std::map<ObjectRef, std::map<std::string, screk::History>> histories_;
};

struct PrimitiveContext {
  FrameId frame = 0;
  double frame_rate = 25.0;
  const ObjectStore& store;
  std::span<const GroupLifecycleEvent> lifecycle;
};

/// Truth of a primitive model for one tuple of bound objects at one frame.
using PrimitiveEvaluator = std::function<bool(const PrimitiveContext&, std::span<const SceneObject* const>)>;
using PrimitiveRegistry = std::map<std::string, PrimitiveEvaluator, std::less<>>;

struct EngineParams {
  /// False runs of at most max_gap frames do not split an interval.
  FrameId max_gap = 0;
  std::size_t history_capacity = 128;
  double frame_rate = 25.0;
};

class EngineError : public std::runtime_error {
 public:
  explicit EngineError(const std::string& what, std::vector<screk::Diagnostic> diagnostics = {})
      : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}
  const std::vector<screk::Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<screk::Diagnostic> diagnostics_;
};

/// Frame-by-frame scenario recognition. Primitive models are instantiated
/// with every class-compatible tuple of objects (symbolic constraints filter
/// tuples first) and their truth values form intervals. An interval is closed
/// once it has been false for more than max_gap frames; closing a trigger
/// component evaluates its parent against the closed intervals of the other
/// component, and recognitions cascade up the model tree within the frame.
class EventEngine {
 public:
  /// `ontology` must contain every class and model used (prelude included).
  /// Throws EngineError when validation or optimization fails, or when a
  /// primitive model used by a composite has no evaluator.
  EventEngine(const screk::Ontology& ontology, PrimitiveRegistry registry, EngineParams params = {});
  ~EventEngine();
  EventEngine(EventEngine&&) noexcept;
  EventEngine& operator=(EventEngine&&) noexcept;

  /// Frames must strictly increase. Returns the composite recognitions of
  /// this frame, before merging.
  std::vector<RecognizedEvent> step(const FrameInput& input);
  /// Closes all open intervals and completes the pending recognitions.
  std::vector<RecognizedEvent> flush();

  /// Merged recognitions of the user-visible composite models.
  const std::vector<RecognizedEvent>& events() const;
  /// Every composite recognition of user-visible models, unmerged.
  const std::vector<RecognizedEvent>& raw_events() const;
  /// Closed intervals of primitive models.
  const std::vector<RecognizedEvent>& primitive_events() const;

  const screk::Ontology& optimized_ontology() const;
  const screk::TriggerTree& trigger_tree() const;
  /// Primitive instantiations evaluated during the last step.
  std::size_t last_instantiation_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Adds `e` to `events`: an event of the same model and bindings whose
/// interval overlaps or lies within max_gap frames is extended (absorbing any
/// other it now reaches), otherwise `e` is appended. Idempotent.
std::vector<RecognizedEvent> dedupe(std::vector<RecognizedEvent> events, const RecognizedEvent& e, FrameId max_gap = 0);

/// Events whose alarm is at least `min` (NOTURGENT < URGENT < VERYURGENT).
std::vector<RecognizedEvent> filter_by_alarm(const std::vector<RecognizedEvent>& events, AlarmLevel min);

/// `name,start_frame,end_frame,alarm,var=key;var=key`
void write_events(std::ostream& out, const std::vector<RecognizedEvent>& events);
std::vector<RecognizedEvent> parse_events(std::string_view text);

}  // namespace grouptrack
