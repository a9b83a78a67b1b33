#include "rmstmatch/study.hpp"

#include <atomic>
#include <thread>

#include "rmstmatch/errors.hpp"

namespace rmstmatch {

AnalysisResult analyze_dataset(const Dataset& dataset, double tau,
                               const AnalysisOptions& options) {
  dataset.validate();

  AnalysisResult result;
  result.fit = fit_logistic(dataset);

  const auto treated = dataset.treated_indices();
  const auto control = dataset.control_indices();
  std::vector<double> scores_t, scores_c;
  scores_t.reserve(treated.size());
  scores_c.reserve(control.size());
  for (std::size_t i : treated) scores_t.push_back(result.fit.scores[i]);
  for (std::size_t i : control) scores_c.push_back(result.fit.scores[i]);

  result.pairs = optimal_pair_match(scores_t, scores_c, options.metric);
  result.balance = standardized_mean_differences(dataset, &result.pairs);

  AttOptions att_options;
  att_options.variance_method = options.variance_method;
  att_options.tail_pairing = options.tail_pairing;
  result.att = matched_rmst_att(dataset, result.pairs, tau, att_options);

  if (options.with_iptw) result.iptw = iptw_km_rmst_att(dataset, result.fit.scores, tau);
  return result;
}

StudyResult run_study(const StudyConfig& config) {
  config.scenario.validate();
  if (config.replicates < 2) throw validation_error("study needs at least 2 replicates");

  StudyResult study;
  study.replicates.resize(config.replicates);

  unsigned n_threads = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
  if (n_threads == 0) n_threads = 1;
  n_threads = static_cast<unsigned>(
      std::min<std::size_t>(n_threads, config.replicates));

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= config.replicates) break;
      ReplicateRecord& rec = study.replicates[r];
      rec.id = r;
      try {
        RngStream stream = RngStream::derived(config.scenario.seed, r);
        const SimulatedDataset sim = simulate_dataset(config.scenario, stream);
        rec.true_att = true_att(sim, config.scenario.tau);
        const Dataset dataset = sim.to_dataset();
        const AnalysisResult analysis =
            analyze_dataset(dataset, config.scenario.tau, config.analysis);
        rec.matched_estimate = analysis.att.estimate;
        rec.matched_se = analysis.att.se;
        rec.ci_low = analysis.att.ci_low;
        rec.ci_high = analysis.att.ci_high;
        rec.n_pairs = analysis.att.n_pairs;
        if (analysis.iptw) rec.iptw_estimate = analysis.iptw->estimate;
        rec.ok = true;
      } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
      }
    }
  };

  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<double> est, se, lo, hi, iptw_est;
  double truth_sum = 0.0;
  for (const ReplicateRecord& rec : study.replicates) {
    if (!rec.ok) {
      ++study.n_failed;
      continue;
    }
    ++study.n_ok;
    truth_sum += rec.true_att;
    est.push_back(rec.matched_estimate);
    se.push_back(rec.matched_se);
    lo.push_back(rec.ci_low);
    hi.push_back(rec.ci_high);
    iptw_est.push_back(rec.iptw_estimate);
  }

  const double failure_rate =
      static_cast<double>(study.n_failed) / static_cast<double>(config.replicates);
  if (failure_rate > config.max_failure_rate) {
    std::string first;
    for (const auto& rec : study.replicates)
      if (!rec.ok) {
        first = rec.error;
        break;
      }
    throw numeric_error(std::to_string(study.n_failed) + " of " +
                        std::to_string(config.replicates) +
                        " replicates failed (first error: " + first + ")");
  }
  if (study.n_ok < 2) throw numeric_error("fewer than 2 successful replicates");

  study.truth = truth_sum / static_cast<double>(study.n_ok);
  study.matched = summarize_replicates(est, se, lo, hi, study.truth);
  if (config.analysis.with_iptw)
    study.iptw = summarize_replicates(iptw_est, {}, {}, {}, study.truth);
  return study;
}

} // namespace rmstmatch
