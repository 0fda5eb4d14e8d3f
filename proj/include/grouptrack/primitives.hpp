#pragma once

#include "grouptrack/engine.hpp"
#include "grouptrack/scene.hpp"

#include <string>
#include <vector>

namespace grouptrack {

struct PrimitiveParams {
  /// Group_Stop: ground speed below this (m/s).
  double stop_speed = 0.3;
  /// Group_Stop: frames of Position history used to measure the speed.
  int stop_lookback = 5;
  /// Group_Near_Equipment: center-to-equipment distance below this (m).
  double near_distance = 2.0;
  /// Group_Lively: member speed standard deviation above this (m/s).
  double lively_stddev = 1.0;

  void validate() const;
};

/// Evaluators for Group_Stop, Group_Near_Equipment, Group_Stays_Inside_Zone,
/// Group_Outside_Zone, Group_Lively, Group_Created, Group_Split and
/// Group_Merge (true for the surviving group).
PrimitiveRegistry builtin_primitives(const PrimitiveParams& params = {});

/// Measurements of a tracked group at one frame.
struct GroupFeatures {
  GroupId id = 0;
  Vec3 position;
  Vec3 size;
  /// Ground speed of the member centroid (m/s).
  double speed = 0.0;
  /// Standard deviation of the member ground speeds (m/s).
  double member_speed_stddev = 0.0;
  std::int64_t member_count = 0;
  double average_distance = 0.0;
};

std::string group_key(GroupId id);

/// Group object with Position, Size, Speed, NumberOfMobiles,
/// AverageDistMobiles and MemberSpeedStdDev.
SceneObject group_object(const GroupFeatures& g);
/// Zone object with Name and Vertices (z = 0).
SceneObject zone_object(const Zone& z);
/// Equipment object with Name and Position (z = 0).
SceneObject equipment_object(const Equipment& e);

}  // namespace grouptrack
