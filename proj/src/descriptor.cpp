#include "regkit/descriptor.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "regkit/error.hpp"

namespace regkit {
namespace {

std::vector<double> gray_values(const Patch& patch) {
  const std::size_t n = static_cast<std::size_t>(patch.side) * patch.side;
  if (patch.channels == 1) return patch.data;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* p = &patch.data[i * patch.channels];
    out[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  }
  return out;
}

bool l2_normalize(std::span<float> row) {
  double norm = 0.0;
  for (float v : row) norm += static_cast<double>(v) * v;
  norm = std::sqrt(norm);
  if (!(norm > 1e-12)) return false;
  for (float& v : row) v = static_cast<float>(v / norm);
  return true;
}

}  // namespace

std::vector<double> describe_patch_raw(const Patch& patch) {
  std::vector<double> v = gray_values(patch);
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double norm = 0.0;
  for (double& x : v) {
    x -= mean;
    norm += x * x;
  }
  norm = std::sqrt(norm);
  if (norm < 1e-12) return std::vector<double>(v.size(), 0.0);
  for (double& x : v) x /= norm;
  return v;
}

std::vector<float> patch_to_network_input(const Patch& patch,
                                          const NetworkConfig& cfg) {
  const std::size_t n = static_cast<std::size_t>(patch.side) * patch.side;
  const int ch = cfg.input_channels;
  std::vector<float> out(n * ch);
  const std::vector<double> gray =
      patch.channels == ch ? std::vector<double>{} : gray_values(patch);
  for (std::size_t i = 0; i < n; ++i)
    for (int c = 0; c < ch; ++c) {
      const double v = patch.channels == ch ? patch.data[i * ch + c] : gray[i];
      const double mean = cfg.input_mean.empty() ? 0.0 : cfg.input_mean[c];
      out[i * ch + c] = static_cast<float>(v * cfg.input_scale - mean);
    }
  return out;
}

DescriptorSet describe_keypoints(const Image& img,
                                 const std::vector<Keypoint>& kps,
                                 const DescriptorBackend& backend,
                                 const DescribeOptions& options) {
  if (!(options.window > 0.0) || !(options.base_sigma > 0.0)) {
    throw Error(ErrorCode::ConfigError, "window and base_sigma must be > 0");
  }
  DescriptorSet set;
  set.normalized = options.normalize;
  const auto* raw = std::get_if<RawBackend>(&backend);
  const auto* cnn = std::get_if<CnnBackend>(&backend);
  if (cnn && !cnn->network) {
    throw Error(ErrorCode::ConfigError, "CNN backend without a network");
  }
  if (raw && raw->side < 1) {
    throw Error(ErrorCode::ConfigError, "raw patch side must be positive");
  }
  const Image source = raw ? to_grayscale(img) : img;
  const int side = raw ? raw->side : cnn->network->config().input_side;
  set.dim = raw ? static_cast<std::size_t>(side) * side
                : cnn->network->tap_shape().size();

  std::vector<float> row(set.dim);
  for (const auto& kp : kps) {
    const double window = options.window * kp.sigma / options.base_sigma;
    Patch patch;
    try {
      patch = extract_patch(source, {kp.x, kp.y}, window, side);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::OutOfBounds) throw;
      ++set.dropped_out_of_bounds;
      continue;
    }
    if (raw) {
      const auto v = describe_patch_raw(patch);
      for (std::size_t i = 0; i < v.size(); ++i) row[i] = static_cast<float>(v[i]);
    } else {
      row = cnn->network->forward(
          patch_to_network_input(patch, cnn->network->config()));
    }
    if (options.normalize && !l2_normalize(row)) {
      ++set.dropped_zero;
      continue;
    }
    set.keypoints.push_back(kp);
    set.values.insert(set.values.end(), row.begin(), row.end());
  }
  return set;
}

std::string write_descriptors(const DescriptorSet& set) {
  std::string out = "KPD1\n" + std::to_string(set.size()) + " " +
                    std::to_string(set.dim) + "\n";
  char buf[160];
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& k = set.keypoints[i];
    std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g %d %.9g", k.x, k.y, k.sigma,
                  k.octave, k.response);
    out += buf;
    for (float v : set.row(i)) {
      std::snprintf(buf, sizeof buf, " %.9g", static_cast<double>(v));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

DescriptorSet read_descriptors(std::string_view text) {
  constexpr std::string_view kMagic = "KPD1\n";
  if (text.substr(0, kMagic.size()) != kMagic) {
    throw Error(ErrorCode::ParseError, "missing KPD1 magic");
  }
  std::istringstream in{std::string(text.substr(kMagic.size()))};
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::ParseError, "missing KPD1 header");
  }
  long long n = -1, dim = -1;
  {
    std::istringstream header(line);
    std::string extra;
    if (!(header >> n >> dim) || (header >> extra) || n < 0 || dim < 0) {
      throw Error(ErrorCode::ParseError, "bad KPD1 header '" + line + "'");
    }
  }
  DescriptorSet set;
  set.dim = static_cast<std::size_t>(dim);
  set.keypoints.reserve(static_cast<std::size_t>(n));
  set.values.reserve(static_cast<std::size_t>(n) * set.dim);
  for (long long i = 0; i < n; ++i) {
    if (!std::getline(in, line)) {
      throw Error(ErrorCode::ParseError,
                  "expected " + std::to_string(n) + " rows, got " +
                      std::to_string(i));
    }
    std::istringstream fields(line);
    Keypoint k;
    if (!(fields >> k.x >> k.y >> k.sigma >> k.octave >> k.response)) {
      throw Error(ErrorCode::ParseError, "bad keypoint on row " + std::to_string(i));
    }
    for (long long d = 0; d < dim; ++d) {
      std::string token;
      if (!(fields >> token)) {
        throw Error(ErrorCode::ParseError,
                    "row " + std::to_string(i) + " shorter than dim");
      }
      char* end = nullptr;
      const float v = std::strtof(token.c_str(), &end);
      if (end != token.c_str() + token.size()) {
        throw Error(ErrorCode::ParseError, "bad value '" + token + "'");
      }
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::ParseError, "non-finite descriptor value");
      }
      set.values.push_back(v);
    }
    std::string extra;
    if (fields >> extra) {
      throw Error(ErrorCode::ParseError,
                  "row " + std::to_string(i) + " longer than dim");
    }
    set.keypoints.push_back(k);
  }
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      throw Error(ErrorCode::ParseError, "trailing data after last row");
    }
  }
  set.normalized = set.size() > 0;
  for (std::size_t i = 0; i < set.size() && set.normalized; ++i) {
    double norm = 0.0;
    for (float v : set.row(i)) norm += static_cast<double>(v) * v;
    set.normalized = std::abs(std::sqrt(norm) - 1.0) <= 1e-6;
  }
  return set;
}

}  // namespace regkit
