#include "rmstmatch/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rmstmatch/errors.hpp"

namespace rmstmatch {

std::string to_string(DistanceMetric metric) {
  return metric == DistanceMetric::logit ? "logit" : "raw";
}

DistanceMetric distance_metric_from_string(const std::string& name) {
  if (name == "logit") return DistanceMetric::logit;
  if (name == "raw") return DistanceMetric::raw;
  throw validation_error("unknown distance metric '" + name + "' (expected logit or raw)");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> transform_scores(std::span<const double> scores, DistanceMetric metric) {
  std::vector<double> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double s = scores[i];
    if (!(s > 0.0 && s < 1.0))
      throw validation_error("propensity score " + std::to_string(s) + " outside (0,1)");
    out[i] = metric == DistanceMetric::logit ? std::log(s / (1.0 - s)) : s;
  }
  return out;
}

// indices 0..n-1 sorted by (value, index); the index tiebreak keeps equal
// scores in row order so the whole pipeline stays deterministic
std::vector<std::size_t> sorted_order(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return a < b;
  });
  return order;
}

// Minimum total |t_i - c_j| over injective assignments of all treated to
// controls, both inputs sorted ascending. dp[i][j] = best cost of matching
// the first i treated within the first j controls:
//   dp[i][j] = min(dp[i][j-1], dp[i-1][j-1] + |t_i - c_j|)
// (an exchange argument shows some optimum never crosses, so treated i may
// be restricted to control slots >= i in sorted order).
double assignment_cost(const std::vector<double>& t, const std::vector<double>& c,
                       std::vector<char>* take_flags = nullptr) {
  const std::size_t nt = t.size(), nc = c.size();
  std::vector<double> prev(nc + 1, 0.0), cur(nc + 1, kInf);
  for (std::size_t i = 1; i <= nt; ++i) {
    std::fill(cur.begin(), cur.end(), kInf);
    for (std::size_t j = i; j <= nc; ++j) {
      const double take = prev[j - 1] + std::abs(t[i - 1] - c[j - 1]);
      const double skip = j > i ? cur[j - 1] : kInf;
      const bool taking = take <= skip;
      cur[j] = taking ? take : skip;
      if (take_flags) (*take_flags)[i * (nc + 1) + j] = taking;
    }
    std::swap(prev, cur);
  }
  return prev[nc];
}

// assignment for sorted inputs; result[i] = control slot of treated i
std::vector<std::size_t> assignment_backtrack(const std::vector<double>& t,
                                              const std::vector<double>& c, double* cost_out) {
  const std::size_t nt = t.size(), nc = c.size();
  std::vector<char> take(nt * (nc + 1) + nc + 1, 0);
  const double cost = assignment_cost(t, c, &take);
  if (cost_out) *cost_out = cost;
  std::vector<std::size_t> result(nt);
  std::size_t i = nt, j = nc;
  while (i > 0) {
    if (take[i * (nc + 1) + j]) {
      result[i - 1] = j - 1;
      --i;
    }
    --j;
  }
  return result;
}

// Small-instance refinement: fix pairs one at a time in original-index order,
// keeping the first control (by original index) that still admits an optimal
// completion. Quadratic in instance size times a DP per probe, so gated to
// n_t, n_c <= 64 where it is instant.
std::vector<std::pair<std::size_t, std::size_t>> lexicographic_optimal(
    const std::vector<double>& vt, const std::vector<double>& vc, double opt_cost) {
  const std::size_t nt = vt.size(), nc = vc.size();
  const double tol = 1e-9 * std::max(1.0, std::abs(opt_cost)) + 1e-12;

  std::vector<char> c_used(nc, 0);
  std::vector<std::pair<std::size_t, std::size_t>> result;
  double fixed_cost = 0.0;
  std::vector<std::size_t> remaining_t(nt);
  std::iota(remaining_t.begin(), remaining_t.end(), std::size_t{0});

  for (std::size_t ti = 0; ti < nt; ++ti) {
    std::vector<std::size_t> rest_t;
    for (std::size_t k : remaining_t)
      if (k != ti) rest_t.push_back(k);
    std::vector<double> rest_t_vals;
    for (std::size_t k : rest_t) rest_t_vals.push_back(vt[k]);
    std::sort(rest_t_vals.begin(), rest_t_vals.end());

    for (std::size_t cj = 0; cj < nc; ++cj) {
      if (c_used[cj]) continue;
      std::vector<double> rest_c_vals;
      for (std::size_t k = 0; k < nc; ++k)
        if (!c_used[k] && k != cj) rest_c_vals.push_back(vc[k]);
      std::sort(rest_c_vals.begin(), rest_c_vals.end());
      const double completion = rest_t_vals.empty() ? 0.0
                                                    : assignment_cost(rest_t_vals, rest_c_vals);
      const double with_pair = fixed_cost + std::abs(vt[ti] - vc[cj]) + completion;
      if (with_pair <= opt_cost + tol) {
        c_used[cj] = 1;
        fixed_cost += std::abs(vt[ti] - vc[cj]);
        result.emplace_back(ti, cj);
        break;
      }
    }
    remaining_t.erase(std::remove(remaining_t.begin(), remaining_t.end(), ti),
                      remaining_t.end());
  }
  return result;
}

} // namespace

MatchedPairs optimal_pair_match(std::span<const double> scores_treated,
                                std::span<const double> scores_control,
                                DistanceMetric metric) {
  const std::size_t nt = scores_treated.size(), nc = scores_control.size();
  if (nt < 1 || nc < nt) throw insufficient_controls_error(nt, nc);

  const auto vt = transform_scores(scores_treated, metric);
  const auto vc = transform_scores(scores_control, metric);

  MatchedPairs out;
  out.metric = metric;

  if (nt <= 64 && nc <= 64) {
    std::vector<double> st(vt), sc(vc);
    std::sort(st.begin(), st.end());
    std::sort(sc.begin(), sc.end());
    const double opt = assignment_cost(st, sc);
    out.pairs = lexicographic_optimal(vt, vc, opt);
  } else {
    const auto ot = sorted_order(vt);
    const auto oc = sorted_order(vc);
    std::vector<double> st(nt), sc(nc);
    for (std::size_t i = 0; i < nt; ++i) st[i] = vt[ot[i]];
    for (std::size_t j = 0; j < nc; ++j) sc[j] = vc[oc[j]];
    const auto slots = assignment_backtrack(st, sc, nullptr);
    out.pairs.resize(nt);
    for (std::size_t i = 0; i < nt; ++i) out.pairs[i] = {ot[i], oc[slots[i]]};
  }

  std::sort(out.pairs.begin(), out.pairs.end());
  double total = 0.0;
  for (const auto& [ti, cj] : out.pairs) total += std::abs(vt[ti] - vc[cj]);
  out.total_distance = total;
  return out;
}

} // namespace rmstmatch
