#pragma once

#include "grouptrack/scene.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

namespace grouptrack {

struct MatchConfig {
  /// Minimum member-set Jaccard index for a tracked group to match a GT group.
  double jaccard_threshold = 0.5;
  /// Optional frame range (inclusive) restricting the evaluation.
  std::optional<FrameId> first_frame;
  std::optional<FrameId> last_frame;

  void validate() const;
};

struct FrameMatch {
  FrameId frame = 0;
  GroupId tracked = 0;
  std::int64_t gt = 0;
  double jaccard = 0.0;
  bool operator==(const FrameMatch&) const = default;
};

struct MatchResult {
  std::vector<FrameMatch> matches;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

double jaccard(const std::vector<MobileId>& a, const std::set<MobileId>& b);

/// Per frame, greedy one-to-one matching by decreasing Jaccard index (ties:
/// smaller GT id, then smaller member list) among pairs at or above the
/// threshold. Matched pairs count as TP, unmatched tracked groups as FP and
/// unmatched GT groups as FN.
MatchResult match_frames(const std::vector<GroupSnapshot>& tracked, const std::vector<GroundTruthGroup>& gt,
                         const MatchConfig& config = {});

struct PrecisionSensitivity {
  double precision = 1.0;
  double sensitivity = 1.0;
};

/// TP/(TP+FP) and TP/(TP+FN); 1 when the denominator is 0.
PrecisionSensitivity precision_sensitivity(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);

/// Mean over matched GT groups of 1 / (distinct tracked ids matched to it).
/// Nothing when no GT group was matched.
std::optional<double> fragmentation(const MatchResult& result);

/// Mean over tracked groups that matched of 1 / (distinct GT ids matched).
std::optional<double> purity(const MatchResult& result);

/// Mean over GT groups of matched frames / frames where the group exists,
/// within the configured range. Nothing when there is no GT group.
std::optional<double> tracking_time(const MatchResult& result, const std::vector<GroundTruthGroup>& gt,
                                    const MatchConfig& config = {});

struct MetricsReport {
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 1.0;
  double sensitivity = 1.0;
  std::optional<double> fragmentation;
  std::optional<double> tracking_time;
  std::optional<double> purity;
};

MetricsReport evaluate(const std::vector<GroupSnapshot>& tracked, const std::vector<GroundTruthGroup>& gt,
                       const MatchConfig& config = {});

/// Aligned plain-text table.
void write_report_table(std::ostream& out, const MetricsReport& r);
/// Header line and one CSV row; undefined metrics are left empty.
void write_report_csv(std::ostream& out, const MetricsReport& r);

}  // namespace grouptrack
