#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "regkit/cnn.hpp"
#include "regkit/detector.hpp"
#include "regkit/imaging.hpp"

namespace regkit {

/// Keypoints paired row-for-row with an n x dim float matrix.
struct DescriptorSet {
  std::vector<Keypoint> keypoints;
  std::vector<float> values;  // row-major, keypoints.size() * dim
  std::size_t dim = 0;
  bool normalized = false;
  std::size_t dropped_out_of_bounds = 0;
  std::size_t dropped_zero = 0;

  std::size_t size() const { return keypoints.size(); }
  std::span<const float> row(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }
};

/// Mean-centred, L2-normalized grayscale patch.
struct RawBackend {
  int side = 16;
};

struct CnnBackend {
  std::shared_ptr<const Network> network;
};

using DescriptorBackend = std::variant<RawBackend, CnnBackend>;

/// Returns the zero vector for a constant patch.
std::vector<double> describe_patch_raw(const Patch& patch);

/// Scales intensities into a network input tensor, adapting channel count
/// (gray replicated to 3 channels, color reduced to luma for 1 channel).
std::vector<float> patch_to_network_input(const Patch& patch,
                                          const NetworkConfig& cfg);

struct DescribeOptions {
  double window = 64.0;     // patch extent at base_sigma
  double base_sigma = 1.6;  // window scales with keypoint sigma / base_sigma
  bool normalize = true;
};

/// Keypoints whose window leaves the image are dropped (survivor order
/// preserved). With normalize set, rows are L2-normalized and zero rows are
/// dropped.
DescriptorSet describe_keypoints(const Image& img,
                                 const std::vector<Keypoint>& kps,
                                 const DescriptorBackend& backend,
                                 const DescribeOptions& options);

/// "KPD1\n", "<n> <dim>\n", then n lines "x y sigma octave response v1 .. vdim".
std::string write_descriptors(const DescriptorSet& set);
DescriptorSet read_descriptors(std::string_view text);

}  // namespace regkit
