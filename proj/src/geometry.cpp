#include "regkit/geometry.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "regkit/error.hpp"

namespace regkit {
namespace {

constexpr double kDetEpsilon = 1e-12;
constexpr double kInfinityEpsilon = 1e-12;

std::array<double, 9> canonicalize(std::array<double, 9> m) {
  double frob = 0.0;
  for (double v : m) frob += v * v;
  frob = std::sqrt(frob);
  if (frob == 0.0) return m;
  // m22 counts as zero when it is negligible relative to the matrix scale.
  if (std::abs(m[8]) > 1e-12 * frob) {
    const double s = m[8];
    for (double& v : m) v /= s;
  } else {
    for (double& v : m) v /= frob;
  }
  return m;
}

double det3(const std::array<double, 9>& m) {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) -
         m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

}  // namespace

Homography::Homography() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}

Homography::Homography(const std::array<double, 9>& m) {
  for (double v : m) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::InvalidHomography, "non-finite entry");
    }
  }
  m_ = canonicalize(m);
  if (!(std::abs(det3(m_)) > kDetEpsilon)) {
    throw Error(ErrorCode::InvalidHomography, "matrix is singular");
  }
}

double Homography::determinant() const { return det3(m_); }

Homography Homography::inverse() const {
  const auto& m = m_;
  const double d = det3(m);
  std::array<double, 9> inv{
      (m[4] * m[8] - m[5] * m[7]) / d, (m[2] * m[7] - m[1] * m[8]) / d,
      (m[1] * m[5] - m[2] * m[4]) / d, (m[5] * m[6] - m[3] * m[8]) / d,
      (m[0] * m[8] - m[2] * m[6]) / d, (m[2] * m[3] - m[0] * m[5]) / d,
      (m[3] * m[7] - m[4] * m[6]) / d, (m[1] * m[6] - m[0] * m[7]) / d,
      (m[0] * m[4] - m[1] * m[3]) / d};
  return Homography(inv);
}

Point2 apply_homography(const Homography& h, Point2 p) {
  const auto& m = h.data();
  const double w = m[6] * p.x + m[7] * p.y + m[8];
  if (!(std::abs(w) > kInfinityEpsilon)) {
    throw Error(ErrorCode::DegeneratePoint, "point maps to infinity");
  }
  return {(m[0] * p.x + m[1] * p.y + m[2]) / w,
          (m[3] * p.x + m[4] * p.y + m[5]) / w};
}

double reprojection_error(const Homography& h, const Correspondence& c) {
  const auto& m = h.data();
  const double w = m[6] * c.p1.x + m[7] * c.p1.y + m[8];
  if (!(std::abs(w) > kInfinityEpsilon)) {
    return std::numeric_limits<double>::infinity();
  }
  const double x = (m[0] * c.p1.x + m[1] * c.p1.y + m[2]) / w;
  const double y = (m[3] * c.p1.x + m[4] * c.p1.y + m[5]) / w;
  return std::hypot(x - c.p2.x, y - c.p2.y);
}

Homography parse_homography(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::array<double, 9> m{};
  std::string token;
  std::size_t count = 0;
  while (in >> token) {
    if (count == 9) {
      throw Error(ErrorCode::ParseError, "more than 9 tokens");
    }
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(token, &used);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "not a number: '" + token + "'");
    }
    if (used != token.size() || !std::isfinite(value)) {
      throw Error(ErrorCode::ParseError, "not a finite real: '" + token + "'");
    }
    m[count++] = value;
  }
  if (count != 9) {
    throw Error(ErrorCode::ParseError,
                "expected 9 tokens, got " + std::to_string(count));
  }
  try {
    return Homography(m);
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

std::string format_homography(const Homography& h) {
  std::string out;
  char buf[40];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", h(r, c));
      out += buf;
      out += c == 2 ? '\n' : ' ';
    }
  }
  return out;
}

std::array<double, 9> hartley_normalize(std::span<const Point2> points,
                                        std::span<Point2> out) {
  double cx = 0.0, cy = 0.0;
  for (const auto& p : points) {
    cx += p.x;
    cy += p.y;
  }
  const double n = static_cast<double>(points.size());
  cx /= n;
  cy /= n;
  double mean_dist = 0.0;
  for (const auto& p : points) mean_dist += std::hypot(p.x - cx, p.y - cy);
  mean_dist /= n;
  const double s = mean_dist > 0.0 ? std::sqrt(2.0) / mean_dist : 1.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[i] = {s * (points[i].x - cx), s * (points[i].y - cy)};
  }
  return {s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1};
}

Homography estimate_homography_dlt(std::span<const Correspondence> pairs) {
  const std::size_t n = pairs.size();
  if (n < 4) {
    throw Error(ErrorCode::InsufficientData,
                "DLT needs at least 4 correspondences, got " +
                    std::to_string(n));
  }
  std::vector<Point2> src(n), dst(n), src_n(n), dst_n(n);
  for (std::size_t i = 0; i < n; ++i) {
    src[i] = pairs[i].p1;
    dst[i] = pairs[i].p2;
  }
  const auto t1 = hartley_normalize(src, src_n);
  const auto t2 = hartley_normalize(dst, dst_n);

  Eigen::MatrixXd a(2 * n, 9);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = src_n[i].x, y = src_n[i].y;
    const double u = dst_n[i].x, v = dst_n[i].y;
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // The constraint system has rank 8 for a well-posed problem.
  if (sv.size() < 8 || !(sv(7) > 1e-10 * sv(0))) {
    throw Error(ErrorCode::DegenerateConfiguration,
                "design matrix is rank-deficient");
  }
  const Eigen::VectorXd h = svd.matrixV().col(8);

  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  Eigen::Matrix3d n1, n2;
  n1 << t1[0], t1[1], t1[2], t1[3], t1[4], t1[5], t1[6], t1[7], t1[8];
  n2 << t2[0], t2[1], t2[2], t2[3], t2[4], t2[5], t2[6], t2[7], t2[8];
  const Eigen::Matrix3d full = n2.inverse() * hn * n1;

  std::array<double, 9> m{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m[r * 3 + c] = full(r, c);
  try {
    return Homography(m);
  } catch (const Error& e) {
    throw Error(ErrorCode::DegenerateConfiguration, e.what());
  }
}

XorShift64Star::XorShift64Star(std::uint64_t seed)
    : state_(seed == 0 ? 0x9E3779B97F4A7C15ULL : seed) {}

std::uint64_t XorShift64Star::next() {
  state_ ^= state_ >> 12;
  state_ ^= state_ << 25;
  state_ ^= state_ >> 27;
  return state_ * 0x2545F4914F6CDD1DULL;
}

std::size_t XorShift64Star::below(std::size_t n) {
  return static_cast<std::size_t>(next() % n);
}

}  // namespace regkit
