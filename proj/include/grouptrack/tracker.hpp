#pragma once

#include "grouptrack/meanshift.hpp"
#include "grouptrack/scene.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

namespace grouptrack {

struct TrackerParams {
  /// Window length T in frames; the tracker reports at t_c - T.
  int window = 20;
  double tolerance = tolerance_default();
  double link_threshold = 0.6;
  /// m/s
  double max_speed = 10.0;
  double w_distance = 7.0;
  double w_speed = 5.0;
  double w_direction = 5.0;
  double incoherence_threshold = 15.0;
  /// Groups without members for stale_factor * T frames are erased.
  int stale_factor = 5;
  /// Below this speed (m/s) a member has no heading.
  double min_heading_speed = 0.05;

  /// Throws std::invalid_argument when a parameter is out of range.
  void validate() const;
};

/// Positions of one track over the T frames of a window, with gaps filled by
/// linear interpolation. Frames outside [first_observed, last_observed] hold
/// the nearest observed position and are excluded from group statistics.
struct WindowTrajectory {
  MobileId owner = 0;
  FrameId start = 0;
  std::vector<Vec2> positions;     // T entries
  std::vector<Vec2> speeds;        // T-1 entries, m/s; speeds[i] spans positions i..i+1
  std::vector<bool> observed_mask; // T entries
  std::size_t first_observed = 0;
  std::size_t last_observed = 0;

  bool valid_position(std::size_t i) const { return i >= first_observed && i <= last_observed; }
  bool valid_speed(std::size_t i) const { return i >= first_observed && i + 1 <= last_observed; }
};

/// Observed (frame, ground position) samples of one track.
using TrackSamples = std::vector<std::pair<FrameId, Vec2>>;

/// Trajectory of a track over [start, start + T - 1]; nothing when fewer than
/// two samples fall inside the window.
std::optional<WindowTrajectory> build_window(const TrackSamples& samples, FrameId start, const TrackerParams& params,
                                             const SceneContext& context);

/// Feature of dimension 2(2T-1) in [0,1]: positions scaled by the ground
/// bounds, speed components clamped to max_speed in magnitude and scaled from
/// [-max_speed, max_speed].
FeaturePoint normalize(const WindowTrajectory& w, const SceneContext& context, const TrackerParams& params);

struct GroupStats {
  double distance_avg = 0.0;
  double speed_stddev = 0.0;
  double direction_stddev = 0.0;
  bool operator==(const GroupStats&) const = default;
};

GroupStats group_statistics(std::span<const WindowTrajectory> trajs, const TrackerParams& params);

/// w_distance*distanceAvg + w_speed*speedStdDev + w_direction*directionStdDev.
double group_incoherence(std::span<const WindowTrajectory> trajs, const TrackerParams& params);
double group_incoherence(const GroupStats& stats, const TrackerParams& params);

/// Circular standard deviation sqrt(-2 ln R) of the unit vectors; 0 for fewer
/// than two vectors, +inf when they cancel out.
double circular_stddev(std::span<const Vec2> unit_vectors);

struct Group {
  GroupId id = 0;
  std::map<FrameId, std::set<MobileId>> members_by_frame;
  FrameId created_at = 0;
  FrameId last_member_frame = 0;
  GroupStats stats;
  double incoherence = 0.0;
  /// Last working frame at which each member was coherent with the group.
  std::map<MobileId, FrameId> last_coherent;
  /// Members at the last working frame, used to detect splits.
  std::set<MobileId> previous_members;
};

/// Membership and detection history visible to the lifecycle operations.
class TrackerState {
 public:
  explicit TrackerState(TrackerParams params = {}, SceneContext context = {});

  const TrackerParams& params() const { return params_; }
  const SceneContext& context() const { return context_; }
  const std::map<GroupId, Group>& groups() const { return groups_; }

  /// Record a detection frame. Frames must arrive in increasing order.
  void add_frame(const DetectionFrame& frame);

  const Mobile* find_mobile(FrameId frame, MobileId id) const;
  const std::map<MobileId, Mobile>* frame_mobiles(FrameId frame) const;

  /// Group a mobile belongs to at `frame`, if its membership is decided.
  std::optional<GroupId> membership(FrameId frame, MobileId id) const;
  /// Last frame whose memberships have been decided.
  std::optional<FrameId> decided_until() const { return decided_until_; }

  /// Group of the nearest ancestor (every traversed link >= link_threshold,
  /// at most T frames back) whose membership is decided and non-empty.
  std::optional<GroupId> probable_group(FrameId frame, MobileId id) const;

  /// probable_group, or the decided membership itself when `frame` is decided.
  std::optional<GroupId> group_at(FrameId frame, MobileId id) const;

  TrackSamples track_samples(MobileId id, FrameId from, FrameId to) const;
  std::optional<WindowTrajectory> window_for(MobileId id, FrameId start) const;

  // Mutators used by the lifecycle operations.
  GroupId create_group(FrameId frame, const std::set<MobileId>& members);
  void add_member(GroupId g, FrameId frame, MobileId m);
  void mark_decided(FrameId frame) { decided_until_ = frame; }
  /// Moves every member record of `absorbed` into `survivor`.
  void merge_into(GroupId survivor, GroupId absorbed, FrameId frame);
  void erase_group(GroupId g);
  void forget_before(FrameId frame);
  Group& group(GroupId g) { return groups_.at(g); }

  FrameId latest_frame() const { return latest_frame_; }
  bool empty() const { return frames_.empty(); }

 private:
  TrackerParams params_;
  SceneContext context_;
  std::map<FrameId, std::map<MobileId, Mobile>> frames_;
  std::map<MobileId, std::map<FrameId, Vec2>> tracks_;
  std::map<FrameId, std::map<MobileId, GroupId>> membership_;
  std::map<GroupId, Group> groups_;
  std::optional<FrameId> decided_until_;
  FrameId latest_frame_ = -1;
  GroupId next_group_id_ = 1;
};

/// A cluster as seen by the lifecycle operations: its members at the working
/// frame. Mobiles without a usable window form singleton clusters.
struct MobileCluster {
  std::vector<MobileId> members;
};

struct UpdateResult {
  /// Cluster index -> associated group, when any member has a probable group.
  std::vector<std::optional<GroupId>> association;
  std::set<MobileId> admitted;
  /// Mobiles of each cluster left for the creation step (no probable group).
  std::vector<std::vector<MobileId>> creation_candidates;
};

/// Associates each cluster with the majority probable group of its members
/// (ties -> oldest group) and admits the mobiles whose probable group is that
/// group. Clusters that are not the group's largest are admitted only while
/// coherent with it, or within T frames of their last coherent frame.
UpdateResult update_groups(TrackerState& state, std::span<const MobileCluster> clusters, FrameId frame);

/// Shared-son merges over the window [frame, frame + T - 1].
std::vector<GroupLifecycleEvent> merge_groups(TrackerState& state, FrameId frame);

std::vector<GroupLifecycleEvent> create_groups(TrackerState& state, const UpdateResult& update,
                                               std::span<const MobileCluster> clusters, FrameId frame);

std::vector<GroupLifecycleEvent> terminate_groups(TrackerState& state, FrameId frame);

struct StepOutput {
  std::vector<GroupSnapshot> snapshots;
  std::vector<GroupLifecycleEvent> events;
};

/// Streaming group tracker. Each pushed frame t_c finalizes frame t_c - T.
class GroupTracker {
 public:
  explicit GroupTracker(TrackerParams params = {}, SceneContext context = {});

  /// Throws std::invalid_argument when frames go backwards.
  StepOutput push(const DetectionFrame& frame);
  /// Processes the trailing frames whose window is cut by the end of stream.
  StepOutput flush();

  const TrackerState& state() const { return state_; }

 private:
  void process(FrameId working, StepOutput& out);

  TrackerState state_;
  std::optional<FrameId> first_frame_;
  std::optional<FrameId> next_working_;
};

struct TrackingResult {
  std::vector<GroupSnapshot> snapshots;
  std::vector<GroupLifecycleEvent> events;
};

/// Runs the tracker over a whole stream, including the trailing flush.
TrackingResult track_stream(const DetectionStream& stream, const TrackerParams& params, const SceneContext& context,
                            bool flush = true);

}  // namespace grouptrack
