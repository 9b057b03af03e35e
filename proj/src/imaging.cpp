#include "regkit/imaging.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string_view>

#include "regkit/error.hpp"

namespace regkit {
namespace {

class PnmReader {
 public:
  explicit PnmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // Header integer, skipping whitespace and '#' comments.
  long header_int(const char* what) {
    skip_space_and_comments();
    long value = 0;
    bool any = false;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_++] - '0');
      any = true;
      if (value > 1'000'000'000) {
        throw Error(ErrorCode::ParseError, std::string(what) + " too large");
      }
    }
    if (!any) {
      if (pos_ >= bytes_.size()) {
        throw Error(ErrorCode::TruncatedData,
                    std::string("header ends before ") + what);
      }
      throw Error(ErrorCode::ParseError, std::string("bad ") + what);
    }
    return value;
  }

  // Exactly one whitespace byte separates the header from a binary raster.
  void end_header() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(ErrorCode::TruncatedData, "missing raster after header");
    }
    ++pos_;
  }

  long ascii_sample() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size()) {
      throw Error(ErrorCode::TruncatedData, "raster shorter than header");
    }
    return header_int("sample");
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::uint8_t byte() { return bytes_[pos_++]; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Image load_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') {
    throw Error(ErrorCode::UnsupportedFormat, "not a PNM file");
  }
  const char kind = static_cast<char>(bytes[1]);
  int channels = 0;
  bool binary = false;
  switch (kind) {
    case '2': channels = 1; break;
    case '5': channels = 1; binary = true; break;
    case '3': channels = 3; break;
    case '6': channels = 3; binary = true; break;
    default:
      throw Error(ErrorCode::UnsupportedFormat,
                  std::string("unsupported magic P") + kind);
  }
  PnmReader in(bytes.subspan(2));
  const long width = in.header_int("width");
  const long height = in.header_int("height");
  const long maxval = in.header_int("maxval");
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::ParseError, "image dimensions must be positive");
  }
  if (maxval < 1 || maxval > 65535) {
    throw Error(ErrorCode::ParseError, "maxval out of range 1..65535");
  }
  Image img(static_cast<int>(width), static_cast<int>(height), channels);
  const std::size_t count = img.data.size();
  const double scale = static_cast<double>(maxval);
  if (binary) {
    in.end_header();
    const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
    if (in.remaining() < count * bytes_per_sample) {
      throw Error(ErrorCode::TruncatedData, "raster shorter than header");
    }
    for (std::size_t i = 0; i < count; ++i) {
      long v = in.byte();
      if (bytes_per_sample == 2) v = (v << 8) | in.byte();
      if (v > maxval) throw Error(ErrorCode::ParseError, "sample > maxval");
      img.data[i] = static_cast<double>(v) / scale;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const long v = in.ascii_sample();
      if (v > maxval) throw Error(ErrorCode::ParseError, "sample > maxval");
      img.data[i] = static_cast<double>(v) / scale;
    }
  }
  return img;
}

Image load_image_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::MissingFile, path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  try {
    return load_image(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::vector<std::uint8_t> write_pgm(const Image& img, bool ascii) {
  if (img.channels != 1) {
    throw Error(ErrorCode::UnsupportedFormat, "write_pgm needs 1 channel");
  }
  std::string header = std::string(ascii ? "P2" : "P5") + "\n" +
                       std::to_string(img.width) + " " +
                       std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const double v = std::clamp(img.data[i], 0.0, 1.0);
    const auto q = static_cast<std::uint8_t>(std::lround(v * 255.0));
    if (ascii) {
      const std::string s = std::to_string(q);
      out.insert(out.end(), s.begin(), s.end());
      out.push_back((i + 1) % static_cast<std::size_t>(img.width) == 0 ? '\n'
                                                                      : ' ');
    } else {
      out.push_back(q);
    }
  }
  return out;
}

Image to_grayscale(const Image& img) {
  if (img.channels == 1) return img;
  Image out(img.width, img.height, 1);
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  for (std::size_t i = 0; i < n; ++i) {
    const double* p = &img.data[i * 3];
    out.data[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  }
  return out;
}

Image gaussian_blur(const Image& img, double sigma) {
  if (!(sigma > 0.0)) return img;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    total += kernel[i + radius];
  }
  for (double& k : kernel) k /= total;

  const int w = img.width, h = img.height, ch = img.channels;
  Image tmp(w, h, ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int xs = std::clamp(x + i, 0, w - 1);
          acc += kernel[i + radius] * img.at(xs, y, c);
        }
        tmp.at(x, y, c) = acc;
      }
  Image out(w, h, ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int ys = std::clamp(y + i, 0, h - 1);
          acc += kernel[i + radius] * tmp.at(x, ys, c);
        }
        out.at(x, y, c) = acc;
      }
  return out;
}

Image downsample_half(const Image& img) {
  if (img.width < 2 || img.height < 2) {
    throw Error(ErrorCode::TooSmall, "downsample needs at least 2x2, got " +
                                         std::to_string(img.width) + "x" +
                                         std::to_string(img.height));
  }
  Image out(img.width / 2, img.height / 2, img.channels);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < img.channels; ++c)
        out.at(x, y, c) = img.at(2 * x, 2 * y, c);
  return out;
}

double sample_bilinear(const Image& img, double x, double y, int channel) {
  x = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, img.width - 1);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const double fx = x - x0, fy = y - y0;
  const double top = (1 - fx) * img.at(x0, y0, channel) +
                     fx * img.at(x1, y0, channel);
  const double bottom = (1 - fx) * img.at(x0, y1, channel) +
                        fx * img.at(x1, y1, channel);
  return (1 - fy) * top + fy * bottom;
}

Patch resize_patch(const Patch& in, int out_side) {
  if (out_side == in.side) return in;
  Patch out{out_side, in.channels,
            std::vector<double>(static_cast<std::size_t>(out_side) *
                                out_side * in.channels)};
  const double scale = static_cast<double>(in.side) / out_side;
  const double max_coord = in.side - 1;
  auto at = [&](int x, int y, int c) {
    return in.data[(static_cast<std::size_t>(y) * in.side + x) * in.channels +
                   c];
  };
  for (int oy = 0; oy < out_side; ++oy) {
    const double sy = std::clamp((oy + 0.5) * scale - 0.5, 0.0, max_coord);
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, in.side - 1);
    const double fy = sy - y0;
    for (int ox = 0; ox < out_side; ++ox) {
      const double sx = std::clamp((ox + 0.5) * scale - 0.5, 0.0, max_coord);
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, in.side - 1);
      const double fx = sx - x0;
      for (int c = 0; c < in.channels; ++c) {
        const double top = (1 - fx) * at(x0, y0, c) + fx * at(x1, y0, c);
        const double bottom = (1 - fx) * at(x0, y1, c) + fx * at(x1, y1, c);
        out.data[(static_cast<std::size_t>(oy) * out_side + ox) *
                     in.channels + c] = (1 - fy) * top + fy * bottom;
      }
    }
  }
  return out;
}

Patch extract_patch(const Image& img, Point2 center, double window,
                    int out_side) {
  if (!(window > 0.0) || out_side < 1) {
    throw Error(ErrorCode::OutOfBounds, "window and out_side must be positive");
  }
  const int n = std::max(1, static_cast<int>(std::lround(window)));
  const double step = window / n;
  const double half = (n - 1) / 2.0 * step;
  const double x_first = center.x - half, x_last = center.x + half;
  const double y_first = center.y - half, y_last = center.y + half;
  if (x_first < 0.0 || y_first < 0.0 || x_last > img.width - 1.0 ||
      y_last > img.height - 1.0) {
    throw Error(ErrorCode::OutOfBounds, "patch window crosses image edge");
  }
  Patch raw{n, img.channels,
            std::vector<double>(static_cast<std::size_t>(n) * n *
                                img.channels)};
  for (int j = 0; j < n; ++j) {
    const double y = y_first + j * step;
    for (int i = 0; i < n; ++i) {
      const double x = x_first + i * step;
      for (int c = 0; c < img.channels; ++c) {
        raw.data[(static_cast<std::size_t>(j) * n + i) * img.channels + c] =
            sample_bilinear(img, x, y, c);
      }
    }
  }
  return resize_patch(raw, out_side);
}

}  // namespace regkit

namespace regkit {

Image warp_perspective(const Image& img, const Homography& h, int out_width,
                       int out_height, double fill) {
  const Homography inv = h.inverse();
  const auto& m = inv.data();
  Image out(out_width, out_height, img.channels, fill);
  for (int y = 0; y < out_height; ++y)
    for (int x = 0; x < out_width; ++x) {
      const double w = m[6] * x + m[7] * y + m[8];
      if (!(std::abs(w) > 1e-12)) continue;
      const double sx = (m[0] * x + m[1] * y + m[2]) / w;
      const double sy = (m[3] * x + m[4] * y + m[5]) / w;
      if (sx < 0.0 || sy < 0.0 || sx > img.width - 1.0 || sy > img.height - 1.0)
        continue;
      for (int c = 0; c < img.channels; ++c)
        out.at(x, y, c) = sample_bilinear(img, sx, sy, c);
    }
  return out;
}

}  // namespace regkit
