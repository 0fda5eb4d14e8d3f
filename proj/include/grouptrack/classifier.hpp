#pragma once

#include "grouptrack/scene.hpp"

#include <array>
#include <istream>
#include <span>
#include <string_view>
#include <vector>

namespace grouptrack {

struct DimensionModel {
  double mean = 0.0;
  double sigma = 1.0;
  double min = 0.0;
  double max = 0.0;
};

/// Gaussian size model of one object class over (width, depth, height).
struct ClassModel {
  ObjectClass cls = ObjectClass::Noise;
  std::array<DimensionModel, 3> dims{};

  /// Throws std::invalid_argument unless min <= mean <= max and sigma > 0.
  void validate() const;
};

/// 0 outside [min,max] on any axis, otherwise the geometric mean of the
/// three per-axis Gaussians exp(-((v-mean)/sigma)^2 / 2).
double class_score(const Vec3& size, const ClassModel& model);
double class_score(const Mobile& m, const ClassModel& model);

/// Best-scoring class. NOISE when every score is 0. Ties resolve in the order
/// GROUP_OF_PERSONS, PERSON, NOISE.
ObjectClass classify(const Vec3& size, std::span<const ClassModel> models);
ObjectClass classify(const Mobile& m, std::span<const ClassModel> models);

void classify_all(DetectionStream& stream, std::span<const ClassModel> models);

std::vector<ClassModel> default_class_models();

/// Reads `class <NAME> mean(w d h) sigma(w d h) min(w d h) max(w d h)` lines;
/// other lines (blank, `#` comments) are ignored.
std::vector<ClassModel> parse_class_models(std::istream& in);
std::vector<ClassModel> parse_class_models(std::string_view text);

}  // namespace grouptrack
