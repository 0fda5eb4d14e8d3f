#pragma once

#include "grouptrack/scene.hpp"

#include <span>
#include <vector>

namespace grouptrack {

struct FeaturePoint {
  std::vector<double> coords;
  MobileId owner = 0;
};

struct Cluster {
  std::vector<double> mode;
  std::vector<MobileId> members;  // sorted
};

struct MeanShiftParams {
  /// Flat-kernel bandwidth in normalized feature space.
  double tolerance = 0.1;
  double epsilon = 1e-4;
  int max_iter = 100;
};

constexpr double tolerance_default() { return 0.1; }

/// Flat-kernel Mean-Shift. Every point climbs to the mean of the input points
/// within `tolerance` until the shift drops below `epsilon`; converged modes
/// closer than tolerance/2 share a cluster. Points are shifted in parallel;
/// the result is bit-identical to mean_shift_reference.
///
/// Throws std::invalid_argument on empty input, mismatched dimensions or a
/// non-positive tolerance.
std::vector<Cluster> mean_shift(std::span<const FeaturePoint> points, const MeanShiftParams& params = {});

/// Single-threaded implementation kept as the reference for mean_shift.
std::vector<Cluster> mean_shift_reference(std::span<const FeaturePoint> points, const MeanShiftParams& params = {});

}  // namespace grouptrack
