#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "regkit/distance.hpp"

namespace regkit {

enum class MatchMethod { Nn1, Nn2, Nnr1, Nnr2 };

std::string to_string(MatchMethod m);
/// "nn1", "nn2", "nnr1", "nnr2"; ConfigError otherwise.
MatchMethod parse_match_method(std::string_view name);
bool is_ratio_method(MatchMethod m);

struct MatchParams {
  MatchMethod method = MatchMethod::Nnr1;
  double threshold = 1.1;
};

struct MatchPair {
  std::size_t idx_a = 0;
  std::size_t idx_b = 0;
  double d1 = 0.0;       // nearest distance in row idx_a
  double d2 = 0.0;       // second-nearest, distinct column (+inf if none)
  double norm_d1 = 0.0;  // (d1 - min D) / (max D - min D), 0 if flat
};

/// NN methods accept norm_d1 < threshold; NNR methods accept d2/d1 >=
/// threshold (d1 = 0 < d2 counts as +inf, d1 = d2 = 0 is rejected). Two-way
/// variants additionally require mutual nearest neighbours; nnr2 also
/// applies the ratio test down column idx_b. Ties go to the smaller index.
/// Output is sorted by idx_a.
///
/// Throws ConfigError on thresholds outside (0, 1] (NN) or below 1 (NNR),
/// TooFewColumns when a ratio method sees fewer than 2 columns.
std::vector<MatchPair> match(const DistanceMatrix& d, const MatchParams& params);

/// "idx_a idx_b d1 d2" per line.
std::string write_matches(const std::vector<MatchPair>& matches);

}  // namespace regkit
