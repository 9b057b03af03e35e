#include <array>
#include <cmath>
#include <limits>

#include "regkit/error.hpp"
#include "regkit/geometry.hpp"

namespace regkit {
namespace {

constexpr double kCollinearEpsilon = 1e-9;

bool has_collinear_triple(const std::array<Point2, 4>& raw) {
  std::array<Point2, 4> p;
  hartley_normalize(raw, p);
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      for (int c = b + 1; c < 4; ++c) {
        const double cross = (p[b].x - p[a].x) * (p[c].y - p[a].y) -
                             (p[b].y - p[a].y) * (p[c].x - p[a].x);
        if (std::abs(cross) < kCollinearEpsilon) return true;
      }
  return false;
}

void validate(const RansacParams& params) {
  if (params.max_iterations < 1 || !(params.inlier_threshold > 0.0) ||
      params.min_inliers < 4) {
    throw Error(ErrorCode::ConfigError,
                "RANSAC needs max_iterations >= 1, inlier_threshold > 0, "
                "min_inliers >= 4");
  }
}

}  // namespace

RansacResult ransac_homography(std::span<const Correspondence> pairs,
                               const RansacParams& params) {
  validate(params);
  const std::size_t n = pairs.size();
  if (n < 4) {
    throw Error(ErrorCode::InsufficientData,
                "RANSAC needs at least 4 correspondences, got " +
                    std::to_string(n));
  }

  XorShift64Star rng(params.seed);
  int best_count = -1;
  double best_error = std::numeric_limits<double>::infinity();
  Homography best_model;
  std::vector<bool> best_mask;

  std::vector<bool> mask(n);
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    std::array<std::size_t, 4> idx{};
    for (int k = 0; k < 4; ++k) {
      bool fresh = false;
      while (!fresh) {
        idx[k] = rng.below(n);
        fresh = true;
        for (int j = 0; j < k; ++j) fresh = fresh && idx[j] != idx[k];
      }
    }
    std::array<Correspondence, 4> sample;
    std::array<Point2, 4> s1, s2;
    for (int k = 0; k < 4; ++k) {
      sample[k] = pairs[idx[k]];
      s1[k] = sample[k].p1;
      s2[k] = sample[k].p2;
    }
    if (has_collinear_triple(s1) || has_collinear_triple(s2)) continue;

    Homography model;
    try {
      model = estimate_homography_dlt(sample);
    } catch (const Error&) {
      continue;
    }

    int count = 0;
    double summed = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = reprojection_error(model, pairs[i]);
      mask[i] = e < params.inlier_threshold;
      if (mask[i]) {
        ++count;
        summed += e;
      }
    }
    // Strict comparisons: earlier iterations win remaining ties.
    if (count > best_count || (count == best_count && summed < best_error)) {
      best_count = count;
      best_error = summed;
      best_model = model;
      best_mask = mask;
    }
  }

  if (best_count < params.min_inliers) {
    throw Error(ErrorCode::NoConsensus,
                "best consensus " + std::to_string(std::max(best_count, 0)) +
                    " below min_inliers " + std::to_string(params.min_inliers));
  }

  std::vector<Correspondence> inliers;
  inliers.reserve(static_cast<std::size_t>(best_count));
  for (std::size_t i = 0; i < n; ++i)
    if (best_mask[i]) inliers.push_back(pairs[i]);

  Homography refit = best_model;
  try {
    refit = estimate_homography_dlt(inliers);
  } catch (const Error&) {
    // Consensus set degenerate for a least-squares refit; keep the sample fit.
  }
  return {refit, best_mask, best_count, best_model};
}

}  // namespace regkit
