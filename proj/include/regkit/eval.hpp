#pragma once

#include <optional>
#include <vector>

#include "regkit/detector.hpp"
#include "regkit/geometry.hpp"
#include "regkit/matcher.hpp"

namespace regkit {

enum class ErrorAggregate { Mean, Median };

struct EvalReport {
  std::size_t n_matches = 0;
  std::optional<double> ke_gh;  // absent without matches
  std::size_t tp = 0;
  std::optional<double> ke_ch;  // absent when RANSAC failed
  std::optional<double> inlier_ratio;
  bool ransac_failed = false;
  std::size_t n_inliers = 0;
};

inline constexpr double kTruePositiveRadius = 2.0;

/// Matched coordinates (keypoint idx_a in set A, idx_b in set B).
/// Throws IndexOutOfRange on an invalid match index.
std::vector<Correspondence> matched_points(const std::vector<MatchPair>& matches,
                                           const std::vector<Keypoint>& kps_a,
                                           const std::vector<Keypoint>& kps_b);

/// Aggregate of ||H p_a - p_b||; absent for an empty match list. Points that
/// map to infinity count as infinite error.
std::optional<double> keypoint_error(const std::vector<MatchPair>& matches,
                                     const std::vector<Keypoint>& kps_a,
                                     const std::vector<Keypoint>& kps_b,
                                     const Homography& h,
                                     ErrorAggregate agg = ErrorAggregate::Mean);

/// Matches whose ground-truth reprojection error is strictly below 2 px.
std::size_t true_positives(const std::vector<MatchPair>& matches,
                           const std::vector<Keypoint>& kps_a,
                           const std::vector<Keypoint>& kps_b,
                           const Homography& h_gt);

/// RANSAC failures (too few pairs, no consensus) are recorded in the report.
EvalReport evaluate_pair(const std::vector<MatchPair>& matches,
                         const std::vector<Keypoint>& kps_a,
                         const std::vector<Keypoint>& kps_b,
                         const Homography& h_gt, const RansacParams& ransac,
                         ErrorAggregate agg = ErrorAggregate::Mean);

}  // namespace regkit
