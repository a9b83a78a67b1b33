#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rmstmatch {

enum class DistanceMetric { logit, raw };

std::string to_string(DistanceMetric metric);
DistanceMetric distance_metric_from_string(const std::string& name);

// 1:1 match of every treated subject to a distinct control. Indices are
// positions within the treated / control score vectors handed to
// optimal_pair_match; pairs are sorted by treated index.
struct MatchedPairs {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double total_distance = 0.0;
  DistanceMetric metric = DistanceMetric::logit;

  std::size_t n_pairs() const { return pairs.size(); }
};

// Globally optimal assignment minimizing the summed |logit(e_t) - logit(e_c)|
// distance (or raw-score distance). Requires n_control >= n_treated and all
// scores inside (0,1); unmatched controls are simply not listed.
//
// For a 1-D absolute-difference cost an optimal non-crossing assignment
// exists, so the solver is an O(n_t * n_c) dynamic program over both sides
// sorted by transformed score. Among equal-cost optima the result is
// deterministic; on small instances (n_t, n_c <= 64) it is additionally the
// lexicographically smallest pair list by (treated_index, control_index).
MatchedPairs optimal_pair_match(std::span<const double> scores_treated,
                                std::span<const double> scores_control,
                                DistanceMetric metric = DistanceMetric::logit);

} // namespace rmstmatch
