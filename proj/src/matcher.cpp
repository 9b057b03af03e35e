#include "regkit/matcher.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include "regkit/error.hpp"

namespace regkit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Nearest {
  std::size_t index = 0;
  double d1 = kInf;
  double d2 = kInf;
};

// Two smallest values along a row or column, ties to the smaller index.
template <typename At>
Nearest two_smallest(std::size_t count, At at) {
  Nearest n;
  for (std::size_t k = 0; k < count; ++k) {
    const double v = at(k);
    if (v < n.d1) {
      n.d2 = n.d1;
      n.d1 = v;
      n.index = k;
    } else if (v < n.d2) {
      n.d2 = v;
    }
  }
  return n;
}

bool ratio_accepts(double d1, double d2, double threshold) {
  if (d1 == 0.0) return d2 > 0.0;
  return d2 / d1 >= threshold;
}

}  // namespace

std::string to_string(MatchMethod m) {
  switch (m) {
    case MatchMethod::Nn1: return "nn1";
    case MatchMethod::Nn2: return "nn2";
    case MatchMethod::Nnr1: return "nnr1";
    case MatchMethod::Nnr2: return "nnr2";
  }
  return "?";
}

MatchMethod parse_match_method(std::string_view name) {
  if (name == "nn1") return MatchMethod::Nn1;
  if (name == "nn2") return MatchMethod::Nn2;
  if (name == "nnr1") return MatchMethod::Nnr1;
  if (name == "nnr2") return MatchMethod::Nnr2;
  throw Error(ErrorCode::ConfigError,
              "unknown match method '" + std::string(name) + "'");
}

bool is_ratio_method(MatchMethod m) {
  return m == MatchMethod::Nnr1 || m == MatchMethod::Nnr2;
}

std::vector<MatchPair> match(const DistanceMatrix& d, const MatchParams& params) {
  const bool ratio = is_ratio_method(params.method);
  const bool two_way =
      params.method == MatchMethod::Nn2 || params.method == MatchMethod::Nnr2;
  if (ratio ? !(params.threshold >= 1.0)
            : !(params.threshold > 0.0 && params.threshold <= 1.0)) {
    throw Error(ErrorCode::ConfigError,
                "threshold " + std::to_string(params.threshold) +
                    " out of range for " + to_string(params.method));
  }
  if (ratio && d.cols < 2 && d.rows > 0) {
    throw Error(ErrorCode::TooFewColumns,
                "ratio matching needs at least 2 columns");
  }
  std::vector<MatchPair> out;
  if (d.rows == 0 || d.cols == 0) return out;

  const auto [lo_it, hi_it] = std::minmax_element(d.values.begin(), d.values.end());
  const double lo = *lo_it, range = *hi_it - *lo_it;

  std::vector<Nearest> col_nearest;
  if (two_way) {
    col_nearest.resize(d.cols);
    for (std::size_t j = 0; j < d.cols; ++j) {
      col_nearest[j] =
          two_smallest(d.rows, [&](std::size_t k) { return d(k, j); });
    }
  }

  for (std::size_t i = 0; i < d.rows; ++i) {
    const Nearest row = two_smallest(d.cols, [&](std::size_t k) { return d(i, k); });
    const double norm = range > 0.0 ? (row.d1 - lo) / range : 0.0;
    bool accept = ratio ? ratio_accepts(row.d1, row.d2, params.threshold)
                        : norm < params.threshold;
    if (accept && two_way) {
      const Nearest& col = col_nearest[row.index];
      accept = col.index == i;
      if (accept && ratio) accept = ratio_accepts(col.d1, col.d2, params.threshold);
    }
    if (accept) out.push_back({i, row.index, row.d1, row.d2, norm});
  }
  return out;
}

std::string write_matches(const std::vector<MatchPair>& matches) {
  std::string out;
  char buf[96];
  for (const auto& m : matches) {
    std::snprintf(buf, sizeof buf, "%zu %zu %.9g %.9g\n", m.idx_a, m.idx_b, m.d1,
                  m.d2);
    out += buf;
  }
  return out;
}

}  // namespace regkit
