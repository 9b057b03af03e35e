#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "regkit/imaging.hpp"

namespace regkit {

struct Keypoint {
  double x = 0.0;  // original-image pixels
  double y = 0.0;
  double sigma = 0.0;  // original-image pixels
  int octave = 0;
  double response = 0.0;  // DoG value at the extremum
};

struct DetectorParams {
  double base_sigma = 1.6;
  int scales_per_octave = 3;
  int octaves = 0;  // 0: keep halving while min(width, height) >= 16
  double contrast_threshold = 0.03;
  double edge_ratio = 10.0;
  std::size_t max_keypoints = 0;  // 0: unlimited
};

struct Octave {
  std::vector<Image> gaussians;  // scales_per_octave + 3 levels
  std::vector<double> sigmas;    // per level, octave-local pixels
  std::vector<Image> dogs;       // gaussians[i + 1] - gaussians[i]
};

struct ScaleSpace {
  std::vector<Octave> octaves;
};

inline constexpr int kMinOctaveSide = 16;

/// The input is treated as unblurred; level 0 is the input blurred by
/// base_sigma. Throws TooSmall when min(width, height) < 16, ConfigError on
/// invalid params.
ScaleSpace build_scale_space(const Image& gray, const DetectorParams& params);

/// Integer-grid DoG extrema (26-neighbour strict), contrast and edge
/// filtered, sorted by descending |response| with (y, x, octave) tie-break.
std::vector<Keypoint> detect_keypoints(const Image& gray,
                                       const DetectorParams& params);

/// One keypoint per line: "x y sigma octave response", %.9g.
std::string write_keypoints(const std::vector<Keypoint>& kps);
std::vector<Keypoint> read_keypoints(std::string_view text);

}  // namespace regkit
