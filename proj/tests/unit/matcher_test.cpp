#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "regkit/error.hpp"
#include "regkit/matcher.hpp"
#include "support/match_oracle.hpp"

namespace regkit {
namespace {

using testing::as_pairs;
using testing::OracleMatch;
using testing::oracle_match;
using testing::random_distance_matrix;

const std::vector<double> kNnThresholds{0.3, 0.5, 0.7};
const std::vector<double> kNnrThresholds{1.1, 1.2, 1.3};
const std::vector<MatchMethod> kMethods{MatchMethod::Nn1, MatchMethod::Nn2,
                                        MatchMethod::Nnr1, MatchMethod::Nnr2};

DistanceMatrix make(std::size_t rows, std::size_t cols, std::vector<double> v) {
  DistanceMatrix d;
  d.rows = rows;
  d.cols = cols;
  d.values = std::move(v);
  return d;
}

const std::vector<double>& thresholds_for(MatchMethod m) {
  return is_ratio_method(m) ? kNnrThresholds : kNnThresholds;
}

std::set<std::pair<std::size_t, std::size_t>> as_set(const std::vector<MatchPair>& m) {
  std::set<std::pair<std::size_t, std::size_t>> s;
  for (const auto& p : m) s.insert({p.idx_a, p.idx_b});
  return s;
}

TEST(Matcher, PerfectDiagonal) {
  const auto d = make(2, 2, {0.1, 0.9, 0.9, 0.1});
  const auto m = match(d, {MatchMethod::Nn1, 0.5});
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].idx_a, 0u);
  EXPECT_EQ(m[0].idx_b, 0u);
  EXPECT_EQ(m[1].idx_a, 1u);
  EXPECT_EQ(m[1].idx_b, 1u);
  EXPECT_EQ(m[0].norm_d1, 0.0);
  EXPECT_EQ(m[1].norm_d1, 0.0);
  EXPECT_EQ(m[0].d1, 0.1);
  EXPECT_EQ(m[0].d2, 0.9);
}

TEST(Matcher, RatioOnRepeatedRows) {
  const auto d = make(2, 2, {1, 2, 1, 2});
  const auto m1 = match(d, {MatchMethod::Nnr1, 1.1});
  ASSERT_EQ(m1.size(), 2u);
  EXPECT_EQ(m1[0].idx_b, 0u);
  EXPECT_EQ(m1[1].idx_b, 0u);
  EXPECT_EQ(m1[0].d2 / m1[0].d1, 2.0);
  // Row 0 is column 0's mutual nearest, but column 0 holds [1, 1]: its own
  // ratio is 1 < 1.1, so the column test rejects it.
  EXPECT_TRUE(match(d, {MatchMethod::Nnr2, 1.1}).empty());
  // Mutual nearest without the column ratio keeps row 0 only.
  const auto m2 = match(d, {MatchMethod::Nn2, 1.0});
  ASSERT_EQ(m2.size(), 1u);
  EXPECT_EQ(m2[0].idx_a, 0u);
}

TEST(Matcher, RatioOneAcceptsAllUnambiguousRows) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const auto d = random_distance_matrix(rng, 6, 5, 4);
    const auto m = match(d, {MatchMethod::Nnr1, 1.0});
    std::size_t expected = 0;
    for (std::size_t i = 0; i < d.rows; ++i) {
      std::vector<double> row(d.values.begin() + i * 5, d.values.begin() + (i + 1) * 5);
      std::sort(row.begin(), row.end());
      if (!(row[0] == 0.0 && row[1] == 0.0)) ++expected;
    }
    EXPECT_EQ(m.size(), expected);
  }
}

TEST(Matcher, ZeroDistances) {
  // d1 = 0 < d2 is an infinite ratio; d1 = d2 = 0 is ambiguous.
  const auto d = make(2, 3, {0, 1, 2, 0, 0, 3});
  const auto m = match(d, {MatchMethod::Nnr1, 1.3});
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].idx_a, 0u);
}

TEST(Matcher, FlatMatrixHasZeroNormalizedDistance) {
  const auto d = make(2, 2, {0.4, 0.4, 0.4, 0.4});
  const auto m = match(d, {MatchMethod::Nn1, 0.3});
  ASSERT_EQ(m.size(), 2u);
  for (const auto& p : m) {
    EXPECT_EQ(p.norm_d1, 0.0);
    EXPECT_EQ(p.idx_b, 0u);
  }
}

TEST(Matcher, SingleColumn) {
  const auto d = make(3, 1, {0.2, 0.5, 0.9});
  EXPECT_EQ(match(d, {MatchMethod::Nn1, 0.7}).size(), 2u);
  const auto m = match(d, {MatchMethod::Nn2, 1.0});
  ASSERT_EQ(m.size(), 1u);
  EXPECT_TRUE(std::isinf(m[0].d2));
  for (auto method : {MatchMethod::Nnr1, MatchMethod::Nnr2}) {
    try {
      match(d, {method, 1.1});
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::TooFewColumns);
    }
  }
}

TEST(Matcher, ThresholdRangesValidated) {
  const auto d = make(2, 2, {0.1, 0.9, 0.9, 0.1});
  for (double t : {0.0, -0.5, 1.5}) {
    EXPECT_THROW(match(d, {MatchMethod::Nn1, t}), Error) << t;
  }
  EXPECT_NO_THROW(match(d, {MatchMethod::Nn2, 1.0}));
  EXPECT_THROW(match(d, {MatchMethod::Nnr1, 0.9}), Error);
  EXPECT_THROW(match(d, {MatchMethod::Nnr2, std::nan("")}), Error);
}

TEST(Matcher, MethodNames) {
  for (auto m : kMethods) EXPECT_EQ(parse_match_method(to_string(m)), m);
  EXPECT_THROW(parse_match_method("nn3"), Error);
  EXPECT_TRUE(is_ratio_method(MatchMethod::Nnr2));
  EXPECT_FALSE(is_ratio_method(MatchMethod::Nn2));
}

TEST(Matcher, EmptyRows) {
  DistanceMatrix d;
  d.cols = 4;
  for (auto m : kMethods) EXPECT_TRUE(match(d, {m, thresholds_for(m)[0]}).empty());
}

TEST(Matcher, AgreesWithBruteForceOracle) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> dim(1, 20);
  for (int t = 0; t < 300; ++t) {
    const std::size_t rows = dim(rng), cols = dim(rng) + 1;
    const auto d = random_distance_matrix(rng, rows, cols, t % 2 ? 6 : 0);
    for (auto method : kMethods)
      for (double thr : thresholds_for(method)) {
        const auto got = match(d, {method, thr});
        ASSERT_EQ(as_pairs(got), oracle_match(d, method, thr))
            << to_string(method) << " " << thr << " trial " << t;
      }
  }
}

TEST(Matcher, OutputInvariants) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    const auto d = random_distance_matrix(rng, 12, 10, t % 3 ? 0 : 5);
    for (auto method : kMethods)
      for (double thr : thresholds_for(method)) {
        const auto m = match(d, {method, thr});
        std::set<std::size_t> seen_b;
        for (std::size_t k = 0; k < m.size(); ++k) {
          if (k > 0) EXPECT_LT(m[k - 1].idx_a, m[k].idx_a);
          EXPECT_LE(m[k].d1, m[k].d2);
          EXPECT_GE(m[k].d1, 0.0);
          EXPECT_GE(m[k].norm_d1, 0.0);
          EXPECT_LE(m[k].norm_d1, 1.0);
          EXPECT_EQ(m[k].d1, d(m[k].idx_a, m[k].idx_b));
          if (method == MatchMethod::Nn2 || method == MatchMethod::Nnr2) {
            EXPECT_TRUE(seen_b.insert(m[k].idx_b).second);
          }
        }
      }
  }
}

TEST(Matcher, TwoWayIsSubsetOfOneWay) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 300; ++t) {
    const auto d = random_distance_matrix(rng, 15, 11, t % 2 ? 4 : 0);
    for (double thr : kNnThresholds) {
      const auto one = as_set(match(d, {MatchMethod::Nn1, thr}));
      for (const auto& p : as_set(match(d, {MatchMethod::Nn2, thr})))
        EXPECT_TRUE(one.contains(p));
    }
    for (double thr : kNnrThresholds) {
      const auto one = as_set(match(d, {MatchMethod::Nnr1, thr}));
      for (const auto& p : as_set(match(d, {MatchMethod::Nnr2, thr})))
        EXPECT_TRUE(one.contains(p));
    }
  }
}

TEST(Matcher, ThresholdMonotonicity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> nn(0.05, 1.0), nnr(1.0, 3.0);
  for (int t = 0; t < 300; ++t) {
    const auto d = random_distance_matrix(rng, 10, 8, t % 2 ? 5 : 0);
    double a = nn(rng), b = nn(rng);
    if (a > b) std::swap(a, b);
    for (auto m : {MatchMethod::Nn1, MatchMethod::Nn2}) {
      const auto lo = as_set(match(d, {m, a})), hi = as_set(match(d, {m, b}));
      EXPECT_TRUE(std::includes(hi.begin(), hi.end(), lo.begin(), lo.end()));
    }
    double r = nnr(rng), s = nnr(rng);
    if (r > s) std::swap(r, s);
    for (auto m : {MatchMethod::Nnr1, MatchMethod::Nnr2}) {
      const auto lo = as_set(match(d, {m, r})), hi = as_set(match(d, {m, s}));
      EXPECT_TRUE(std::includes(lo.begin(), lo.end(), hi.begin(), hi.end()));
    }
  }
}

TEST(Matcher, InvariantUnderPositiveAffineRescaling) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 100; ++t) {
    const auto d = random_distance_matrix(rng, 9, 7);
    DistanceMatrix scaled = d;
    for (double& v : scaled.values) v = 4.0 * v + 3.0;
    DistanceMatrix mult = d;
    for (double& v : mult.values) v *= 8.0;
    for (double thr : kNnThresholds) {
      EXPECT_EQ(as_set(match(d, {MatchMethod::Nn1, thr})),
                as_set(match(scaled, {MatchMethod::Nn1, thr})));
      EXPECT_EQ(as_set(match(d, {MatchMethod::Nn2, thr})),
                as_set(match(scaled, {MatchMethod::Nn2, thr})));
    }
    for (double thr : kNnrThresholds) {
      EXPECT_EQ(as_set(match(d, {MatchMethod::Nnr1, thr})),
                as_set(match(mult, {MatchMethod::Nnr1, thr})));
      EXPECT_EQ(as_set(match(d, {MatchMethod::Nnr2, thr})),
                as_set(match(mult, {MatchMethod::Nnr2, thr})));
    }
  }
}

TEST(Matcher, DumpFormat) {
  const auto d = make(2, 2, {0.1, 0.9, 0.9, 0.25});
  EXPECT_EQ(write_matches(match(d, {MatchMethod::Nn1, 1.0})),
            "0 0 0.1 0.9\n1 1 0.25 0.9\n");
}

}  // namespace
}  // namespace regkit
