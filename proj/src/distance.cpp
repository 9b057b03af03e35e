#include "regkit/distance.hpp"

#include <algorithm>
#include <cmath>

#include "regkit/error.hpp"

namespace regkit {
namespace {

constexpr double kDegenerate = 1e-12;

void check_lengths(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size() || p.empty()) {
    throw Error(ErrorCode::LengthMismatch,
                "vector lengths " + std::to_string(p.size()) + " and " +
                    std::to_string(q.size()));
  }
}

void check_order(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw Error(ErrorCode::BadOrder, "minkowski order must be finite and > 0");
  }
}

double dot(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += p[k] * q[k];
  return s;
}

// |d|^r with exact products for small integer orders.
double abs_pow(double d, double r) {
  d = std::abs(d);
  if (r == 1.0) return d;
  if (r == 2.0) return d * d;
  if (r == 3.0) return d * d * d;
  if (r == 4.0) return (d * d) * (d * d);
  return std::pow(d, r);
}

double minkowski_unchecked(std::span<const double> p, std::span<const double> q,
                           double r) {
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += abs_pow(p[k] - q[k], r);
  if (r == 1.0) return s;
  if (r == 2.0) return std::sqrt(s);
  return std::pow(s, 1.0 / r);
}

double similarity_to_distance(double similarity) {
  return std::clamp(1.0 - similarity, 0.0, 2.0);
}

// Per-row precomputation so each matrix cell costs one pass over dim.
struct PreparedRows {
  std::vector<double> values;   // centred for correlation
  std::vector<double> norms;    // L2 norm of (centred) rows
  std::vector<std::size_t> degenerate;
};

PreparedRows prepare(std::span<const float> src, std::size_t n,
                     std::size_t dim, const Metric& metric) {
  PreparedRows rows;
  rows.values.assign(src.begin(), src.begin() + n * dim);
  const bool cosine = metric.kind == Metric::Kind::Cosine;
  const bool correlation = metric.kind == Metric::Kind::Correlation;
  if (!cosine && !correlation) return rows;
  rows.norms.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::span<double> row(rows.values.data() + i * dim, dim);
    if (correlation) {
      double mean = 0.0;
      for (double v : row) mean += v;
      mean /= static_cast<double>(dim);
      double var = 0.0;
      for (double& v : row) {
        v -= mean;
        var += v * v;
      }
      if (dim < 2 || !(var / static_cast<double>(dim) > kDegenerate)) {
        rows.degenerate.push_back(i);
      }
      rows.norms[i] = std::sqrt(var);
    } else {
      rows.norms[i] = std::sqrt(dot(row, row));
      if (!(rows.norms[i] > kDegenerate)) rows.degenerate.push_back(i);
    }
  }
  return rows;
}

std::string index_list(const std::vector<std::size_t>& idx) {
  std::string s;
  for (std::size_t i = 0; i < idx.size() && i < 16; ++i) {
    if (i) s += ',';
    s += std::to_string(idx[i]);
  }
  if (idx.size() > 16) s += ",...";
  return s;
}

}  // namespace

std::string Metric::name() const {
  switch (kind) {
    case Kind::Cityblock: return "cityblock";
    case Kind::Euclidean: return "euclidean";
    case Kind::Cosine: return "cosine";
    case Kind::Minkowski: return "minkowski";
    case Kind::Correlation: return "correlation";
  }
  return "?";
}

Metric parse_metric(std::string_view name, double minkowski_r) {
  if (name == "cityblock") return Metric::cityblock();
  if (name == "euclidean") return Metric::euclidean();
  if (name == "cosine") return Metric::cosine();
  if (name == "correlation") return Metric::correlation();
  if (name == "minkowski") {
    check_order(minkowski_r);
    return Metric::minkowski(minkowski_r);
  }
  throw Error(ErrorCode::ConfigError, "unknown metric '" + std::string(name) + "'");
}

double cityblock(std::span<const double> p, std::span<const double> q) {
  check_lengths(p, q);
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += std::abs(p[k] - q[k]);
  return s;
}

double euclidean(std::span<const double> p, std::span<const double> q) {
  check_lengths(p, q);
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double d = p[k] - q[k];
    s += d * d;
  }
  return std::sqrt(s);
}

double cosine_distance(std::span<const double> p, std::span<const double> q) {
  check_lengths(p, q);
  const double np = std::sqrt(dot(p, p)), nq = std::sqrt(dot(q, q));
  if (!(np > kDegenerate) || !(nq > kDegenerate)) {
    throw Error(ErrorCode::ZeroVector, "cosine distance of a zero vector");
  }
  return similarity_to_distance(dot(p, q) / (np * nq));
}

double minkowski(std::span<const double> p, std::span<const double> q,
                 double r) {
  check_lengths(p, q);
  check_order(r);
  return minkowski_unchecked(p, q, r);
}

double correlation_distance(std::span<const double> p,
                            std::span<const double> q) {
  check_lengths(p, q);
  if (p.size() < 2) {
    throw Error(ErrorCode::LengthMismatch, "correlation needs >= 2 elements");
  }
  const double n = static_cast<double>(p.size());
  double mp = 0.0, mq = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    mp += p[k];
    mq += q[k];
  }
  mp /= n;
  mq /= n;
  double cov = 0.0, vp = 0.0, vq = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double a = p[k] - mp, b = q[k] - mq;
    cov += a * b;
    vp += a * a;
    vq += b * b;
  }
  if (!(vp / n > kDegenerate) || !(vq / n > kDegenerate)) {
    throw Error(ErrorCode::ConstantVector, "correlation of a constant vector");
  }
  return similarity_to_distance(cov / std::sqrt(vp * vq));
}

double metric_distance(const Metric& metric, std::span<const double> p,
                       std::span<const double> q) {
  switch (metric.kind) {
    case Metric::Kind::Cityblock: return cityblock(p, q);
    case Metric::Kind::Euclidean: return euclidean(p, q);
    case Metric::Kind::Cosine: return cosine_distance(p, q);
    case Metric::Kind::Minkowski: return minkowski(p, q, metric.r);
    case Metric::Kind::Correlation: return correlation_distance(p, q);
  }
  return 0.0;
}

DistanceMatrix distance_matrix(std::span<const float> a, std::size_t n,
                               std::span<const float> b, std::size_t m,
                               std::size_t dim, const Metric& metric) {
  if (a.size() != n * dim || b.size() != m * dim) {
    throw Error(ErrorCode::DimMismatch, "matrix storage does not match n x dim");
  }
  if (dim == 0) throw Error(ErrorCode::DimMismatch, "descriptor dim is 0");
  if (metric.kind == Metric::Kind::Minkowski) check_order(metric.r);

  const PreparedRows pa = prepare(a, n, dim, metric);
  const PreparedRows pb = prepare(b, m, dim, metric);
  if (!pa.degenerate.empty() || !pb.degenerate.empty()) {
    const auto code = metric.kind == Metric::Kind::Cosine
                          ? ErrorCode::ZeroVector
                          : ErrorCode::ConstantVector;
    throw Error(code, "degenerate rows A[" + index_list(pa.degenerate) +
                          "] B[" + index_list(pb.degenerate) + "]");
  }

  DistanceMatrix d{n, m, std::vector<double>(n * m), metric};
  for (std::size_t i = 0; i < n; ++i) {
    std::span<const double> p(pa.values.data() + i * dim, dim);
    for (std::size_t j = 0; j < m; ++j) {
      std::span<const double> q(pb.values.data() + j * dim, dim);
      double v = 0.0;
      switch (metric.kind) {
        case Metric::Kind::Cityblock: v = minkowski_unchecked(p, q, 1.0); break;
        case Metric::Kind::Euclidean: v = minkowski_unchecked(p, q, 2.0); break;
        case Metric::Kind::Minkowski: v = minkowski_unchecked(p, q, metric.r); break;
        case Metric::Kind::Cosine:
        case Metric::Kind::Correlation:
          v = similarity_to_distance(dot(p, q) / (pa.norms[i] * pb.norms[j]));
          break;
      }
      d.values[i * m + j] = v;
    }
  }
  return d;
}

DistanceMatrix distance_matrix(const DescriptorSet& a, const DescriptorSet& b,
                               const Metric& metric) {
  if (a.dim != b.dim) {
    throw Error(ErrorCode::DimMismatch, "descriptor dims " +
                                            std::to_string(a.dim) + " and " +
                                            std::to_string(b.dim));
  }
  return distance_matrix(a.values, a.size(), b.values, b.size(), a.dim, metric);
}

}  // namespace regkit
