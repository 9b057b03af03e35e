#include "regkit/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "regkit/error.hpp"

namespace regkit {
namespace {

void validate(const DetectorParams& p) {
  if (!(p.base_sigma > 0.0) || p.scales_per_octave < 1 || p.octaves < 0 ||
      !(p.contrast_threshold > 0.0) || !(p.edge_ratio > 0.0)) {
    throw Error(ErrorCode::ConfigError, "invalid detector parameters");
  }
}

Image subtract(const Image& a, const Image& b) {
  Image out(a.width, a.height, 1);
  for (std::size_t i = 0; i < a.data.size(); ++i)
    out.data[i] = a.data[i] - b.data[i];
  return out;
}

bool is_extremum(const Octave& oct, int level, int x, int y) {
  const double v = oct.dogs[level].at(x, y);
  bool is_max = true, is_min = true;
  for (int l = level - 1; l <= level + 1; ++l) {
    const Image& d = oct.dogs[l];
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (l == level && dx == 0 && dy == 0) continue;
        const double n = d.at(x + dx, y + dy);
        is_max = is_max && v > n;
        is_min = is_min && v < n;
        if (!is_max && !is_min) return false;
      }
  }
  return true;
}

bool passes_edge_test(const Image& d, int x, int y, double edge_ratio) {
  const double c = d.at(x, y);
  const double dxx = d.at(x + 1, y) + d.at(x - 1, y) - 2 * c;
  const double dyy = d.at(x, y + 1) + d.at(x, y - 1) - 2 * c;
  const double dxy = (d.at(x + 1, y + 1) - d.at(x + 1, y - 1) -
                      d.at(x - 1, y + 1) + d.at(x - 1, y - 1)) / 4.0;
  const double tr = dxx + dyy;
  const double det = dxx * dyy - dxy * dxy;
  if (det <= 0.0) return false;
  return tr * tr / det < (edge_ratio + 1) * (edge_ratio + 1) / edge_ratio;
}

}  // namespace

ScaleSpace build_scale_space(const Image& gray, const DetectorParams& params) {
  validate(params);
  if (gray.channels != 1) {
    throw Error(ErrorCode::ConfigError, "scale space needs a grayscale image");
  }
  if (std::min(gray.width, gray.height) < kMinOctaveSide) {
    throw Error(ErrorCode::TooSmall,
                "image smaller than " + std::to_string(kMinOctaveSide) +
                    " pixels on a side");
  }
  const int s = params.scales_per_octave;
  const int levels = s + 3;
  const double k = std::pow(2.0, 1.0 / s);
  std::vector<double> sigmas(levels);
  for (int i = 0; i < levels; ++i) sigmas[i] = params.base_sigma * std::pow(k, i);

  ScaleSpace space;
  Image seed = gaussian_blur(gray, params.base_sigma);
  while (std::min(seed.width, seed.height) >= kMinOctaveSide) {
    if (params.octaves > 0 &&
        static_cast<int>(space.octaves.size()) == params.octaves) {
      break;
    }
    Octave oct;
    oct.sigmas = sigmas;
    oct.gaussians.reserve(levels);
    oct.gaussians.push_back(std::move(seed));
    for (int i = 1; i < levels; ++i) {
      const double inc =
          std::sqrt(sigmas[i] * sigmas[i] - sigmas[i - 1] * sigmas[i - 1]);
      oct.gaussians.push_back(gaussian_blur(oct.gaussians.back(), inc));
    }
    for (int i = 0; i + 1 < levels; ++i) {
      oct.dogs.push_back(subtract(oct.gaussians[i + 1], oct.gaussians[i]));
    }
    // Level s carries twice the base blur; halving it restores base_sigma.
    const Image& next = oct.gaussians[s];
    if (next.width < 2 || next.height < 2) {
      space.octaves.push_back(std::move(oct));
      break;
    }
    seed = downsample_half(next);
    space.octaves.push_back(std::move(oct));
  }
  return space;
}

std::vector<Keypoint> detect_keypoints(const Image& gray,
                                       const DetectorParams& params) {
  const ScaleSpace space = build_scale_space(gray, params);
  std::vector<Keypoint> kps;
  for (std::size_t o = 0; o < space.octaves.size(); ++o) {
    const Octave& oct = space.octaves[o];
    const double scale = std::ldexp(1.0, static_cast<int>(o));
    const int w = oct.dogs[0].width, h = oct.dogs[0].height;
    for (int level = 1; level + 1 < static_cast<int>(oct.dogs.size());
         ++level) {
      const Image& d = oct.dogs[level];
      for (int y = 1; y < h - 1; ++y)
        for (int x = 1; x < w - 1; ++x) {
          const double v = d.at(x, y);
          if (std::abs(v) < params.contrast_threshold) continue;
          if (!is_extremum(oct, level, x, y)) continue;
          if (!passes_edge_test(d, x, y, params.edge_ratio)) continue;
          kps.push_back({x * scale, y * scale, oct.sigmas[level] * scale,
                         static_cast<int>(o), v});
        }
    }
  }
  std::sort(kps.begin(), kps.end(), [](const Keypoint& a, const Keypoint& b) {
    const double ra = std::abs(a.response), rb = std::abs(b.response);
    if (ra != rb) return ra > rb;
    if (a.y != b.y) return a.y < b.y;
    if (a.x != b.x) return a.x < b.x;
    return a.octave < b.octave;
  });
  if (params.max_keypoints > 0 && kps.size() > params.max_keypoints) {
    kps.resize(params.max_keypoints);
  }
  return kps;
}

std::string write_keypoints(const std::vector<Keypoint>& kps) {
  std::string out;
  char buf[160];
  for (const auto& k : kps) {
    std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g %d %.9g\n", k.x, k.y,
                  k.sigma, k.octave, k.response);
    out += buf;
  }
  return out;
}

std::vector<Keypoint> read_keypoints(std::string_view text) {
  std::vector<Keypoint> kps;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    Keypoint k;
    std::string extra;
    if (!(fields >> k.x >> k.y >> k.sigma >> k.octave >> k.response) ||
        (fields >> extra)) {
      throw Error(ErrorCode::ParseError,
                  "keypoint line " + std::to_string(line_no));
    }
    kps.push_back(k);
  }
  return kps;
}

}  // namespace regkit
