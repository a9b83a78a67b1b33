#include "rmstmatch/att_estimator.hpp"

#include <cmath>
#include <limits>

#include "rmstmatch/errors.hpp"

namespace rmstmatch {

std::string to_string(VarianceMethod method) {
  return method == VarianceMethod::murray ? "murray" : "hosmer";
}

VarianceMethod variance_method_from_string(const std::string& name) {
  if (name == "murray") return VarianceMethod::murray;
  if (name == "hosmer") return VarianceMethod::hosmer;
  throw validation_error("unknown variance method '" + name + "' (expected murray or hosmer)");
}

PairedSample matched_paired_sample(const Dataset& dataset, const MatchedPairs& pairs) {
  const auto treated = dataset.treated_indices();
  const auto control = dataset.control_indices();
  PairedSample sample;
  sample.time0.reserve(pairs.n_pairs());
  for (const auto& [ti, ci] : pairs.pairs) {
    if (ti >= treated.size() || ci >= control.size())
      throw validation_error("matched pair index out of range");
    const std::size_t t_row = treated[ti], c_row = control[ci];
    sample.time1.push_back(dataset.time[t_row]);
    sample.event1.push_back(dataset.event[t_row]);
    sample.time0.push_back(dataset.time[c_row]);
    sample.event0.push_back(dataset.event[c_row]);
  }
  return sample;
}

AttResult matched_rmst_att(const Dataset& dataset, const MatchedPairs& pairs, double tau,
                           const AttOptions& options) {
  if (pairs.n_pairs() == 0) throw empty_match_error();
  const PairedSample sample = matched_paired_sample(dataset, pairs);

  const KmCurve curve0 = km_curve(sample.time0, sample.event0);
  const KmCurve curve1 = km_curve(sample.time1, sample.event1);

  AttResult result;
  result.tau = tau;
  result.n_pairs = pairs.n_pairs();
  result.variance_method = options.variance_method;
  result.rmst0 = rmst(curve0, tau);
  result.rmst1 = rmst(curve1, tau);
  result.estimate = result.rmst1 - result.rmst0;

  if (options.variance_method == VarianceMethod::murray) {
    result.var0 = murray_marginal_variance(sample.time0, sample.event0, curve0, tau);
    result.var1 = murray_marginal_variance(sample.time1, sample.event1, curve1, tau);
  } else {
    result.var0 = rmst_variance_hosmer(curve0, tau);
    result.var1 = rmst_variance_hosmer(curve1, tau);
  }
  result.cov = murray_covariance(sample, curve0, curve1, tau, options.tail_pairing);

  double var = result.var0 + result.var1 - 2.0 * result.cov;
  if (var < 0.0) {
    if (var < -1e-8 * std::max(1.0, result.var0 + result.var1))
      throw numeric_error("negative variance of the RMST difference: " + std::to_string(var));
    var = 0.0; // duplicated-arm edge: cov == var up to rounding
  }
  result.se = std::sqrt(var);
  result.ci_low = result.estimate - options.z * result.se;
  result.ci_high = result.estimate + options.z * result.se;
  return result;
}

IptwResult iptw_km_rmst_att(const Dataset& dataset, std::span<const double> scores, double tau) {
  const std::size_t n = dataset.n_rows();
  if (scores.size() != n) throw validation_error("score vector length mismatch");

  std::vector<double> t_time, c_time, c_weight;
  std::vector<std::uint8_t> t_event, c_event;
  IptwResult result;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = scores[i];
    if (!(e > 0.0 && e < 1.0))
      throw validation_error("propensity score " + std::to_string(e) + " outside (0,1)");
    if (dataset.treatment[i] == 1) {
      t_time.push_back(dataset.time[i]);
      t_event.push_back(dataset.event[i]);
    } else {
      const double w = e / (1.0 - e);
      c_time.push_back(dataset.time[i]);
      c_event.push_back(dataset.event[i]);
      c_weight.push_back(w);
      result.max_control_weight = std::max(result.max_control_weight, w);
    }
  }
  result.extreme_weights = result.max_control_weight > 100.0;

  const KmCurve curve1 = km_curve(t_time, t_event);
  const KmCurve curve0 = weighted_km_curve(c_time, c_event, c_weight);
  result.rmst1 = rmst(curve1, tau);
  result.rmst0 = rmst(curve0, tau);
  result.estimate = result.rmst1 - result.rmst0;
  return result;
}

PerformanceSummary summarize_replicates(std::span<const double> estimates,
                                        std::span<const double> ses,
                                        std::span<const double> ci_low,
                                        std::span<const double> ci_high, double truth) {
  const std::size_t r = estimates.size();
  if (r < 2) throw validation_error("summaries need at least 2 replicates");
  const bool with_se = !ses.empty();
  if (with_se && (ses.size() != r || ci_low.size() != r || ci_high.size() != r))
    throw validation_error("replicate arrays have inconsistent lengths");

  PerformanceSummary s;
  s.n_replicates = r;
  s.truth = truth;

  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= static_cast<double>(r);
  s.mean_estimate = mean;
  s.bias = mean - truth;
  s.bias_pct = truth != 0.0 ? 100.0 * s.bias / truth
                            : std::numeric_limits<double>::quiet_NaN();

  double ss = 0.0;
  for (double e : estimates) ss += (e - mean) * (e - mean);
  s.see = std::sqrt(ss / static_cast<double>(r - 1));

  if (with_se) {
    double sem = 0.0, covered = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
      sem += ses[i];
      if (ci_low[i] <= truth && truth <= ci_high[i]) covered += 1.0;
    }
    s.sem = sem / static_cast<double>(r);
    s.coverage = covered / static_cast<double>(r);
  } else {
    s.sem = std::numeric_limits<double>::quiet_NaN();
    s.coverage = std::numeric_limits<double>::quiet_NaN();
  }
  return s;
}

} // namespace rmstmatch
