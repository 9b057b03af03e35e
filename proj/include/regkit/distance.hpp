#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "regkit/descriptor.hpp"

namespace regkit {

struct Metric {
  enum class Kind { Cityblock, Euclidean, Cosine, Minkowski, Correlation };

  Kind kind = Kind::Euclidean;
  double r = 3.0;  // Minkowski order

  static Metric cityblock() { return {Kind::Cityblock}; }
  static Metric euclidean() { return {Kind::Euclidean}; }
  static Metric cosine() { return {Kind::Cosine}; }
  static Metric minkowski(double r) { return {Kind::Minkowski, r}; }
  static Metric correlation() { return {Kind::Correlation}; }

  /// "cityblock", "euclidean", "cosine", "minkowski", "correlation".
  std::string name() const;
};

/// Accepts the names above; minkowski takes `minkowski_r`.
/// Throws ConfigError on unknown names, BadOrder on r <= 0.
Metric parse_metric(std::string_view name, double minkowski_r = 3.0);

// Scalar definitions, 64-bit accumulation. LengthMismatch on unequal sizes.
double cityblock(std::span<const double> p, std::span<const double> q);
double euclidean(std::span<const double> p, std::span<const double> q);
/// 1 - cos(angle), in [0, 2]. ZeroVector when a norm is <= 1e-12.
double cosine_distance(std::span<const double> p, std::span<const double> q);
/// BadOrder when r <= 0.
double minkowski(std::span<const double> p, std::span<const double> q,
                 double r);
/// 1 - Pearson correlation, in [0, 2]. ConstantVector when a population
/// variance is <= 1e-12; LengthMismatch below 2 elements.
double correlation_distance(std::span<const double> p,
                            std::span<const double> q);
double metric_distance(const Metric& metric, std::span<const double> p,
                       std::span<const double> q);

struct DistanceMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major
  Metric metric;

  double operator()(std::size_t i, std::size_t j) const {
    return values[i * cols + j];
  }
};

/// Row-major float matrices a (n x dim) and b (m x dim).
/// Throws DimMismatch, or ZeroVector / ConstantVector listing the offending
/// rows of each set.
DistanceMatrix distance_matrix(std::span<const float> a, std::size_t n,
                               std::span<const float> b, std::size_t m,
                               std::size_t dim, const Metric& metric);
DistanceMatrix distance_matrix(const DescriptorSet& a, const DescriptorSet& b,
                               const Metric& metric);

}  // namespace regkit
