#pragma once

#include "grouptrack/engine.hpp"
#include "grouptrack/primitives.hpp"
#include "grouptrack/scene.hpp"
#include "grouptrack/screk/ast.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace grouptrack {

/// Detections indexed by frame and mobile id.
class DetectionIndex {
 public:
  explicit DetectionIndex(const DetectionStream& stream);
  const Mobile* find(FrameId frame, MobileId id) const;
  /// Latest detection of `id` strictly before `frame`.
  const Mobile* previous(FrameId frame, MobileId id) const;

 private:
  std::map<MobileId, std::map<FrameId, const Mobile*>> by_id_;
};

/// Features of a tracked group from the detections of its members: centroid,
/// extent of the member boxes, speed of the mean member velocity, spread of
/// member speeds, member count and mean pairwise ground distance. Velocities
/// come from each member's previous detection; members seen for the first
/// time do not contribute to speeds.
GroupFeatures group_features(const GroupSnapshot& snapshot, const DetectionIndex& index, double frame_rate);

/// Engine input for every frame from the first to the last frame of
/// `snapshots` and `lifecycle`: the groups present, every zone and equipment,
/// and the lifecycle events of the frame.
std::vector<FrameInput> build_frame_inputs(const DetectionStream& detections, const SceneContext& context,
                                           const std::vector<GroupSnapshot>& snapshots,
                                           const std::vector<GroupLifecycleEvent>& lifecycle);

/// `prelude` merged with every scenario text parsed in order; later files may
/// use the classes and models of earlier ones.
screk::Ontology load_ontology(std::span<const std::string> scenario_texts, const screk::Ontology& prelude);

struct RecognizeParams {
  FrameId max_gap = 0;
  PrimitiveParams primitives;
  AlarmLevel min_alarm = AlarmLevel::NotUrgent;
};

struct RecognizeResult {
  /// Merged composite events at or above min_alarm, sorted.
  std::vector<RecognizedEvent> events;
  /// Closed primitive intervals, sorted.
  std::vector<RecognizedEvent> primitives;
};

/// Feeds the tracked groups to the event engine and flushes it.
RecognizeResult recognize(const screk::Ontology& ontology, const DetectionStream& detections,
                          const SceneContext& context, const std::vector<GroupSnapshot>& snapshots,
                          const std::vector<GroupLifecycleEvent>& lifecycle, const RecognizeParams& params = {});

}  // namespace grouptrack
