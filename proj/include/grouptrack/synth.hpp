#pragma once

#include "grouptrack/scene.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace grouptrack {

enum class SynthScenario { WalkTogether, SplitAfterN, MergeAtN, StopNearEquipment, Fig4 };

std::string_view to_string(SynthScenario s);
std::optional<SynthScenario> synth_scenario_from_string(std::string_view s);

struct SynthParams {
  SynthScenario scenario = SynthScenario::WalkTogether;
  std::uint64_t seed = 1;
  /// Split frame for split-after-N, meeting frame for merge-at-N.
  FrameId n = 60;
  /// Sequence length; 0 selects the scenario default.
  FrameId frames = 0;
  /// Agents of walk-together.
  int agents = 2;
  /// Name of the equipment in stop-near-equipment.
  std::string equipment_name = "shop_window";
  /// Standard deviation of the ground position noise (m).
  double noise = 0.005;

  void validate() const;
};

struct SynthOutput {
  DetectionStream detections;
  SceneContext context;
  std::vector<GroundTruthGroup> ground_truth;
};

/// Deterministic for a given parameter set. Scenes are 80 x 40 m at 10 fps;
/// consecutive detections of an id are linked with probability 0.95.
///
///  walk-together       `agents` people 0.5 m apart walking at 1.2 m/s
///  split-after-N       a 2x2 formation; ids 3 and 4 turn 90 degrees at N
///  merge-at-N          two group-sized blobs meet at frame N and continue as
///                      blob 3, linked to both
///  stop-near-equipment a pair walks to the equipment, stops 1.2 m from it
///                      for 40 frames and walks on
///  fig4                a pair, a lone walker, and two walkers using the same
///                      path one after the other
SynthOutput synthesize(const SynthParams& params);

}  // namespace grouptrack
