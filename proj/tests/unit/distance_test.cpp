#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "regkit/distance.hpp"
#include "regkit/error.hpp"

namespace regkit {
namespace {

using Vec = std::vector<double>;

// Naive textbook forms, written independently of the library.
double oracle(const Metric& m, const Vec& p, const Vec& q) {
  const std::size_t n = p.size();
  switch (m.kind) {
    case Metric::Kind::Cityblock: {
      double s = 0;
      for (std::size_t k = 0; k < n; ++k) s += std::fabs(p[k] - q[k]);
      return s;
    }
    case Metric::Kind::Euclidean: {
      double s = 0;
      for (std::size_t k = 0; k < n; ++k) s += (p[k] - q[k]) * (p[k] - q[k]);
      return std::sqrt(s);
    }
    case Metric::Kind::Minkowski: {
      double s = 0;
      for (std::size_t k = 0; k < n; ++k) s += std::pow(std::fabs(p[k] - q[k]), m.r);
      return std::pow(s, 1.0 / m.r);
    }
    case Metric::Kind::Cosine: {
      double d = 0, a = 0, b = 0;
      for (std::size_t k = 0; k < n; ++k) {
        d += p[k] * q[k];
        a += p[k] * p[k];
        b += q[k] * q[k];
      }
      return 1.0 - d / std::sqrt(a * b);
    }
    case Metric::Kind::Correlation: {
      double mp = 0, mq = 0;
      for (std::size_t k = 0; k < n; ++k) {
        mp += p[k];
        mq += q[k];
      }
      mp /= n;
      mq /= n;
      double c = 0, vp = 0, vq = 0;
      for (std::size_t k = 0; k < n; ++k) {
        c += (p[k] - mp) * (q[k] - mq);
        vp += (p[k] - mp) * (p[k] - mp);
        vq += (q[k] - mq) * (q[k] - mq);
      }
      return 1.0 - c / std::sqrt(vp * vq);
    }
  }
  return NAN;
}

const std::vector<Metric> kAll{Metric::cityblock(), Metric::euclidean(), Metric::cosine(),
                               Metric::minkowski(3), Metric::correlation()};

Vec random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec v(n);
  for (double& x : v) x = u(rng);
  return v;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

TEST(Distance, HandExamples) {
  EXPECT_DOUBLE_EQ(cityblock(Vec{1, 2}, Vec{4, 6}), 7.0);
  EXPECT_DOUBLE_EQ(euclidean(Vec{0, 0}, Vec{3, 4}), 5.0);
  EXPECT_NEAR(cosine_distance(Vec{1, 0}, Vec{0, 1}), 1.0, 1e-15);
  EXPECT_NEAR(cosine_distance(Vec{1, 1}, Vec{-1, -1}), 2.0, 1e-15);
  EXPECT_NEAR(minkowski(Vec{0, 0}, Vec{1, 1}, 3), std::cbrt(2.0), 1e-15);
  EXPECT_NEAR(minkowski(Vec{0, 0}, Vec{1, 1}, 3), 1.259921, 1e-6);
  const Vec p{1, 4, -2, 7};
  Vec q2(4), neg(4);
  for (int k = 0; k < 4; ++k) q2[k] = 2 * p[k] + 3;
  EXPECT_NEAR(correlation_distance(p, q2), 0.0, 1e-15);
  const Vec z{-1.5, 0.5, 2, -1};
  for (int k = 0; k < 4; ++k) neg[k] = -z[k];
  EXPECT_NEAR(correlation_distance(z, neg), 2.0, 1e-15);
}

TEST(Distance, SelfDistanceIsZero) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const Vec p = random_vec(rng, 17);
    for (const auto& m : kAll) EXPECT_NEAR(metric_distance(m, p, p), 0.0, 1e-12) << m.name();
  }
}

TEST(Distance, Errors) {
  EXPECT_EQ(code_of([] { cityblock(Vec{1}, Vec{1, 2}); }), ErrorCode::LengthMismatch);
  EXPECT_EQ(code_of([] { euclidean(Vec{1, 2, 3}, Vec{1, 2}); }), ErrorCode::LengthMismatch);
  EXPECT_EQ(code_of([] { cosine_distance(Vec{0, 0}, Vec{1, 2}); }), ErrorCode::ZeroVector);
  EXPECT_EQ(code_of([] { minkowski(Vec{0}, Vec{1}, 0); }), ErrorCode::BadOrder);
  EXPECT_EQ(code_of([] { minkowski(Vec{0}, Vec{1}, -2); }), ErrorCode::BadOrder);
  EXPECT_EQ(code_of([] { correlation_distance(Vec{3, 3, 3}, Vec{1, 2, 3}); }),
            ErrorCode::ConstantVector);
  EXPECT_EQ(code_of([] { correlation_distance(Vec{1}, Vec{2}); }), ErrorCode::LengthMismatch);
  EXPECT_EQ(code_of([] { parse_metric("hamming"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { parse_metric("minkowski", 0); }), ErrorCode::BadOrder);
}

TEST(Distance, ParseMetricNames) {
  for (const auto& m : kAll) {
    const Metric back = parse_metric(m.name(), m.r);
    EXPECT_EQ(back.kind, m.kind);
    EXPECT_EQ(back.name(), m.name());
  }
  EXPECT_EQ(parse_metric("minkowski", 4).r, 4.0);
}

TEST(Distance, MatchesOracleOnHighDimensionalPairs) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    const Vec p = random_vec(rng, 4096), q = random_vec(rng, 4096);
    for (const auto& m : kAll) {
      const double want = oracle(m, p, q);
      EXPECT_NEAR(metric_distance(m, p, q), want, 1e-9 * std::max(1.0, want)) << m.name();
    }
    const Metric m25 = Metric::minkowski(2.5);
    EXPECT_NEAR(metric_distance(m25, p, q), oracle(m25, p, q), 1e-9 * oracle(m25, p, q));
  }
}

TEST(Distance, MinkowskiReducesToL1AndL2) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const Vec p = random_vec(rng, 12), q = random_vec(rng, 12);
    EXPECT_NEAR(minkowski(p, q, 1), cityblock(p, q), 1e-12);
    EXPECT_NEAR(minkowski(p, q, 2), euclidean(p, q), 1e-12);
  }
}

TEST(Distance, Symmetry) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 200; ++t) {
    const Vec p = random_vec(rng, 9), q = random_vec(rng, 9);
    for (const auto& m : kAll)
      EXPECT_NEAR(metric_distance(m, p, q), metric_distance(m, q, p), 1e-12) << m.name();
  }
}

TEST(Distance, TriangleInequality) {
  std::mt19937_64 rng(5);
  const std::vector<Metric> metrics{Metric::cityblock(), Metric::euclidean(),
                                    Metric::minkowski(1), Metric::minkowski(3),
                                    Metric::minkowski(1.7)};
  for (int t = 0; t < 10000; ++t) {
    const Vec a = random_vec(rng, 6), b = random_vec(rng, 6), c = random_vec(rng, 6);
    for (const auto& m : metrics) {
      ASSERT_LE(metric_distance(m, a, c),
                metric_distance(m, a, b) + metric_distance(m, b, c) + 1e-12)
          << m.name() << " r=" << m.r << " trial " << t;
    }
  }
}

TEST(Distance, ScaleAndShiftInvariance) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> pos(0.1, 10.0), shift(-5.0, 5.0);
  for (int t = 0; t < 200; ++t) {
    const Vec p = random_vec(rng, 8), q = random_vec(rng, 8);
    const double a = pos(rng), b = pos(rng), s1 = shift(rng), s2 = shift(rng);
    Vec ap(8), bq(8), ap_s(8), bq_s(8);
    for (int k = 0; k < 8; ++k) {
      ap[k] = a * p[k];
      bq[k] = b * q[k];
      ap_s[k] = a * p[k] + s1;
      bq_s[k] = b * q[k] + s2;
    }
    EXPECT_NEAR(cosine_distance(ap, bq), cosine_distance(p, q), 1e-9);
    EXPECT_NEAR(cosine_distance(ap, p), 0.0, 1e-12);
    EXPECT_NEAR(correlation_distance(ap_s, bq_s), correlation_distance(p, q), 1e-9);
    EXPECT_NEAR(correlation_distance(ap_s, p), 0.0, 1e-12);
  }
}

TEST(Distance, RangesOfBoundedMetrics) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 500; ++t) {
    const Vec p = random_vec(rng, 3), q = random_vec(rng, 3);
    const double c = cosine_distance(p, q), r = correlation_distance(p, q);
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 2.0);
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 2.0);
  }
}

std::vector<float> random_rows(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> v(n * dim);
  for (float& x : v) x = u(rng);
  return v;
}

Vec row_of(const std::vector<float>& m, std::size_t i, std::size_t dim) {
  return Vec(m.begin() + i * dim, m.begin() + (i + 1) * dim);
}

TEST(DistanceMatrix, SingleUnitVector) {
  const std::vector<float> a{0.6f, 0.8f};
  const auto d = distance_matrix(a, 1, a, 1, 2, Metric::euclidean());
  ASSERT_EQ(d.rows, 1u);
  ASSERT_EQ(d.cols, 1u);
  EXPECT_EQ(d(0, 0), 0.0);
}

TEST(DistanceMatrix, MatchesScalarDoubleLoop) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 3, m = 2 + t % 5, dim = 2 + t * 7;
    const auto a = random_rows(rng, n, dim), b = random_rows(rng, m, dim);
    for (const auto& metric : kAll) {
      const auto d = distance_matrix(a, n, b, m, dim, metric);
      ASSERT_EQ(d.rows, n);
      ASSERT_EQ(d.cols, m);
      EXPECT_EQ(d.metric.kind, metric.kind);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          const double want = oracle(metric, row_of(a, i, dim), row_of(b, j, dim));
          EXPECT_NEAR(d(i, j), want, 1e-6 * std::max(1.0, want)) << metric.name();
          EXPECT_GE(d(i, j), 0.0);
        }
    }
  }
}

TEST(DistanceMatrix, EuclideanSquaredIsTwiceCosineOnUnitRows) {
  std::mt19937_64 rng(9);
  const std::size_t n = 12, m = 9, dim = 64;
  auto a = random_rows(rng, n, dim), b = random_rows(rng, m, dim);
  for (auto* mat : {&a, &b}) {
    for (std::size_t i = 0; i < mat->size() / dim; ++i) {
      double s = 0;
      for (std::size_t k = 0; k < dim; ++k) s += (*mat)[i * dim + k] * (*mat)[i * dim + k];
      for (std::size_t k = 0; k < dim; ++k)
        (*mat)[i * dim + k] = static_cast<float>((*mat)[i * dim + k] / std::sqrt(s));
    }
  }
  const auto de = distance_matrix(a, n, b, m, dim, Metric::euclidean());
  const auto dc = distance_matrix(a, n, b, m, dim, Metric::cosine());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      EXPECT_NEAR(de(i, j) * de(i, j), 2.0 * dc(i, j), 1e-6);
}

TEST(DistanceMatrix, DegenerateRowsAreNamed) {
  const std::vector<float> a{1, 2, 0, 0, 3, 1};
  const std::vector<float> b{1, 1};
  try {
    distance_matrix(a, 3, b, 1, 2, Metric::cosine());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroVector);
    EXPECT_NE(std::string(e.what()).find("A[1]"), std::string::npos) << e.what();
  }
  try {
    distance_matrix(b, 1, a, 3, 2, Metric::correlation());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConstantVector);
  }
  EXPECT_NO_THROW(distance_matrix(a, 3, b, 1, 2, Metric::euclidean()));
}

TEST(DistanceMatrix, DimMismatch) {
  DescriptorSet a, b;
  a.dim = 4;
  b.dim = 3;
  EXPECT_EQ(code_of([&] { distance_matrix(a, b, Metric::euclidean()); }),
            ErrorCode::DimMismatch);
}

TEST(DistanceMatrix, FromDescriptorSets) {
  std::mt19937_64 rng(10);
  DescriptorSet a, b;
  a.dim = b.dim = 5;
  a.values = random_rows(rng, 4, 5);
  b.values = random_rows(rng, 3, 5);
  a.keypoints.resize(4);
  b.keypoints.resize(3);
  const auto d = distance_matrix(a, b, Metric::cityblock());
  const auto d2 = distance_matrix(a.values, 4, b.values, 3, 5, Metric::cityblock());
  EXPECT_EQ(d.values, d2.values);
}

}  // namespace
}  // namespace regkit
