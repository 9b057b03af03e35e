#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace regkit {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Correspondence {
  Point2 p1;  // image 1
  Point2 p2;  // image 2
};

/// 3x3 projective map, row-major, canonically normalized on construction:
/// m22 == 1 when m22 is non-negligible, otherwise unit Frobenius norm.
class Homography {
 public:
  Homography();  // identity

  /// Throws InvalidHomography on non-finite entries or |det| <= 1e-12.
  explicit Homography(const std::array<double, 9>& m);

  static Homography identity() { return Homography(); }

  double operator()(int row, int col) const { return m_[row * 3 + col]; }
  const std::array<double, 9>& data() const { return m_; }

  Homography inverse() const;
  double determinant() const;

 private:
  std::array<double, 9> m_;
};

/// Throws DegeneratePoint when the point maps to infinity (|w| <= 1e-12).
Point2 apply_homography(const Homography& h, Point2 p);

/// Nine whitespace-separated reals, row-major.
Homography parse_homography(std::string_view text);
std::string format_homography(const Homography& h);

/// Normalized DLT over >= 4 correspondences.
/// Throws InsufficientData for < 4 pairs, DegenerateConfiguration when the
/// design matrix is rank-deficient.
Homography estimate_homography_dlt(std::span<const Correspondence> pairs);

/// xorshift64* (Vigna 2014): shifts 12/25/27, multiplier 0x2545F4914F6CDD1D.
/// A zero seed is replaced by 0x9E3779B97F4A7C15 since the all-zero state is
/// absorbing.
class XorShift64Star {
 public:
  explicit XorShift64Star(std::uint64_t seed);
  std::uint64_t next();
  /// next() % n; n > 0.
  std::size_t below(std::size_t n);

 private:
  std::uint64_t state_;
};

struct RansacParams {
  int max_iterations = 2000;
  double inlier_threshold = 2.0;
  int min_inliers = 4;
  std::uint64_t seed = 0x5eed;
};

struct RansacResult {
  Homography h;
  std::vector<bool> inlier_mask;
  int inlier_count = 0;
  /// Model that produced the consensus set, before the final refit.
  Homography consensus_model;
};

/// Throws InsufficientData (< 4 pairs), NoConsensus (best support below
/// params.min_inliers), ConfigError on invalid params.
RansacResult ransac_homography(std::span<const Correspondence> pairs,
                               const RansacParams& params);

/// Hartley normalization: zero centroid, mean distance sqrt(2).
/// Returns the 3x3 similarity as row-major array and writes normalized points.
std::array<double, 9> hartley_normalize(std::span<const Point2> points,
                                        std::span<Point2> out);

double reprojection_error(const Homography& h, const Correspondence& c);

}  // namespace regkit
