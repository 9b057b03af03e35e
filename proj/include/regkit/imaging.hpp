#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "regkit/geometry.hpp"

namespace regkit {

/// Row-major raster of intensities in [0, 1], channel-interleaved.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c = 1, double fill = 0.0)
      : width(w), height(h), channels(c),
        data(static_cast<std::size_t>(w) * h * c, fill) {}

  double& at(int x, int y, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int x, int y, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool empty() const { return data.empty(); }
};

/// Square sample grid around a keypoint.
struct Patch {
  int side = 0;
  int channels = 1;
  std::vector<double> data;
};

/// Decodes PGM (P2/P5) and PPM (P3/P6).
Image load_image(std::span<const std::uint8_t> bytes);
Image load_image_file(const std::string& path);

/// Binary P5 at 8 bits (values rounded to the nearest of 256 levels), or
/// ASCII P2 when `ascii` is set. Grayscale only.
std::vector<std::uint8_t> write_pgm(const Image& img, bool ascii = false);

/// ITU-R BT.601 luma weights.
Image to_grayscale(const Image& img);

/// Separable Gaussian, radius ceil(3 sigma), replicate borders.
Image gaussian_blur(const Image& img, double sigma);

/// Keeps pixels at even coordinates. Throws TooSmall below 2x2.
Image downsample_half(const Image& img);

/// Bilinear sample with coordinates clamped into the image.
double sample_bilinear(const Image& img, double x, double y, int channel = 0);

/// Samples a round(window) x round(window) grid spanning `window` pixels
/// around `center` (pixel-centred: sample i sits at
/// center + (i - (n-1)/2) * window/n), then bilinearly resizes to
/// out_side x out_side. Throws OutOfBounds if any sample falls outside
/// [0, width-1] x [0, height-1].
Patch extract_patch(const Image& img, Point2 center, double window,
                    int out_side);

/// Bilinear resize with pixel-centre alignment.
Patch resize_patch(const Patch& in, int out_side);

}  // namespace regkit

namespace regkit {

/// Inverse-mapped bilinear warp: out(p) = img(H^-1 p), `fill` outside.
Image warp_perspective(const Image& img, const Homography& h, int out_width,
                       int out_height, double fill = 0.0);

}  // namespace regkit
