#pragma once

// Synthetic data shared by unit and acceptance tests.

#include <cmath>
#include <random>
#include <vector>

#include "regkit/geometry.hpp"
#include "regkit/imaging.hpp"

namespace regkit::testing {

// Well-conditioned planted homography over a ~[0, 500]^2 frame.
inline Homography random_homography(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lin(-0.3, 0.3), shift(-50.0, 50.0),
      persp(-1e-3, 1e-3);
  for (;;) {
    try {
      return Homography({1.0 + lin(rng), lin(rng), shift(rng), lin(rng),
                         1.0 + lin(rng), shift(rng), persp(rng), persp(rng),
                         1.0});
    } catch (const std::exception&) {
    }
  }
}

inline std::vector<Point2> random_points(std::mt19937_64& rng, std::size_t n,
                                         double lo = 0.0, double hi = 500.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Point2> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng)};
  return pts;
}

inline std::vector<Correspondence> exact_pairs(const Homography& h,
                                               const std::vector<Point2>& pts) {
  std::vector<Correspondence> out;
  for (const auto& p : pts) out.push_back({p, apply_homography(h, p)});
  return out;
}

inline double max_entry_diff(const Homography& a, const Homography& b) {
  double m = 0.0;
  for (int i = 0; i < 9; ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

// Random isotropic Gaussian blobs of mixed sign on a mid-gray canvas,
// clamped into [0, 1].
inline Image textured_image(int w, int h, std::uint64_t seed, int blobs = 250) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, w), uy(0.0, h),
      us(1.5, 6.0), ua(-0.5, 0.5);
  Image img(w, h, 1, 0.5);
  for (int b = 0; b < blobs; ++b) {
    const double cx = ux(rng), cy = uy(rng), s = us(rng), a = ua(rng);
    const int r = static_cast<int>(std::ceil(4 * s));
    for (int y = std::max(0, static_cast<int>(cy) - r);
         y <= std::min(h - 1, static_cast<int>(cy) + r); ++y)
      for (int x = std::max(0, static_cast<int>(cx) - r);
           x <= std::min(w - 1, static_cast<int>(cx) + r); ++x) {
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        img.at(x, y) += a * std::exp(-d2 / (2 * s * s));
      }
  }
  for (double& v : img.data) v = std::clamp(v, 0.0, 1.0);
  return img;
}

inline Image gaussian_blob(int w, int h, double cx, double cy, double sigma,
                           double amplitude = 1.0) {
  Image img(w, h, 1, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      img.at(x, y) += amplitude * std::exp(-d2 / (2 * sigma * sigma));
    }
  return img;
}

}  // namespace regkit::testing
