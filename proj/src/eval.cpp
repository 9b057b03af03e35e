#include "regkit/eval.hpp"

#include <algorithm>

#include "regkit/error.hpp"

namespace regkit {
namespace {

std::optional<double> aggregate(std::vector<double> errors, ErrorAggregate agg) {
  if (errors.empty()) return std::nullopt;
  if (agg == ErrorAggregate::Median) {
    const std::size_t mid = errors.size() / 2;
    std::nth_element(errors.begin(), errors.begin() + mid, errors.end());
    if (errors.size() % 2 == 1) return errors[mid];
    const double upper = errors[mid];
    const double lower = *std::max_element(errors.begin(), errors.begin() + mid);
    return (lower + upper) / 2.0;
  }
  double sum = 0.0;
  for (double e : errors) sum += e;
  return sum / static_cast<double>(errors.size());
}

std::vector<double> errors_under(const std::vector<Correspondence>& pts,
                                 const Homography& h) {
  std::vector<double> errors;
  errors.reserve(pts.size());
  for (const auto& c : pts) errors.push_back(reprojection_error(h, c));
  return errors;
}

}  // namespace

std::vector<Correspondence> matched_points(const std::vector<MatchPair>& matches,
                                           const std::vector<Keypoint>& kps_a,
                                           const std::vector<Keypoint>& kps_b) {
  std::vector<Correspondence> pts;
  pts.reserve(matches.size());
  for (const auto& m : matches) {
    if (m.idx_a >= kps_a.size() || m.idx_b >= kps_b.size()) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "match (" + std::to_string(m.idx_a) + ", " +
                      std::to_string(m.idx_b) + ") outside keypoint lists");
    }
    const auto& a = kps_a[m.idx_a];
    const auto& b = kps_b[m.idx_b];
    pts.push_back({{a.x, a.y}, {b.x, b.y}});
  }
  return pts;
}

std::optional<double> keypoint_error(const std::vector<MatchPair>& matches,
                                     const std::vector<Keypoint>& kps_a,
                                     const std::vector<Keypoint>& kps_b,
                                     const Homography& h, ErrorAggregate agg) {
  return aggregate(errors_under(matched_points(matches, kps_a, kps_b), h), agg);
}

std::size_t true_positives(const std::vector<MatchPair>& matches,
                           const std::vector<Keypoint>& kps_a,
                           const std::vector<Keypoint>& kps_b,
                           const Homography& h_gt) {
  const auto errors = errors_under(matched_points(matches, kps_a, kps_b), h_gt);
  return static_cast<std::size_t>(std::count_if(
      errors.begin(), errors.end(),
      [](double e) { return e < kTruePositiveRadius; }));
}

EvalReport evaluate_pair(const std::vector<MatchPair>& matches,
                         const std::vector<Keypoint>& kps_a,
                         const std::vector<Keypoint>& kps_b,
                         const Homography& h_gt, const RansacParams& ransac,
                         ErrorAggregate agg) {
  EvalReport report;
  const auto pts = matched_points(matches, kps_a, kps_b);
  report.n_matches = pts.size();
  const auto gt_errors = errors_under(pts, h_gt);
  report.tp = static_cast<std::size_t>(std::count_if(
      gt_errors.begin(), gt_errors.end(),
      [](double e) { return e < kTruePositiveRadius; }));
  report.ke_gh = aggregate(gt_errors, agg);

  try {
    const RansacResult fit = ransac_homography(pts, ransac);
    report.n_inliers = static_cast<std::size_t>(fit.inlier_count);
    report.ke_ch = aggregate(errors_under(pts, fit.h), agg);
    report.inlier_ratio = static_cast<double>(fit.inlier_count) /
                          static_cast<double>(pts.size());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientData &&
        e.code() != ErrorCode::NoConsensus) {
      throw;
    }
    report.ransac_failed = true;
  }
  return report;
}

}  // namespace regkit
