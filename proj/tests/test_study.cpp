#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "rmstmatch/dataset.hpp"
#include "rmstmatch/errors.hpp"
#include "rmstmatch/study.hpp"

using namespace rmstmatch;

namespace {

ScenarioConfig small_scenario() {
  ScenarioConfig config;
  config.n = 400;
  config.beta_a = -0.8;
  config.gamma = 0.005;
  config.seed = 424242;
  config.ps_intercept = -2.0;
  return config;
}

} // namespace

TEST_CASE("analyze_dataset produces a coherent bundle") {
  ScenarioConfig config = small_scenario();
  config.n = 1200;
  const Dataset d = simulate_dataset(config).to_dataset();
  const AnalysisResult r = analyze_dataset(d, config.tau, {.with_iptw = true});
  CHECK(r.fit.converged);
  CHECK(r.pairs.n_pairs() == d.treated_indices().size());
  CHECK(r.balance.size() == d.n_covariates());
  CHECK(r.att.n_pairs == r.pairs.n_pairs());
  CHECK(std::isfinite(r.att.se));
  CHECK(r.att.rmst1 - r.att.rmst0 == doctest::Approx(r.att.estimate));
  REQUIRE(r.iptw.has_value());
  CHECK(std::isfinite(r.iptw->estimate));
}

TEST_CASE("re-ingested export reproduces the analysis byte for byte") {
  ScenarioConfig config = small_scenario();
  config.n = 900;
  const Dataset original = simulate_dataset(config).to_dataset();

  const auto path = std::filesystem::temp_directory_path() / "rmstmatch_reingest.csv";
  write_csv(original, path);
  const Dataset back = read_csv(path);
  std::remove(path.string().c_str());

  const AnalysisResult a = analyze_dataset(original, config.tau);
  const AnalysisResult b = analyze_dataset(back, config.tau);
  CHECK(a.att.estimate == b.att.estimate);
  CHECK(a.att.se == b.att.se);
  CHECK(a.att.ci_low == b.att.ci_low);
  CHECK(a.pairs.pairs == b.pairs.pairs);
  CHECK(a.fit.coefficients == b.fit.coefficients);
}

TEST_CASE("smoke study with two replicates") {
  StudyConfig config;
  config.scenario = small_scenario();
  config.replicates = 2;
  config.threads = 1;
  const StudyResult r = run_study(config);
  CHECK(r.n_ok == 2);
  CHECK(r.n_failed == 0);
  CHECK(r.replicates.size() == 2);
  CHECK(std::isfinite(r.matched.sem));
  CHECK(std::isfinite(r.iptw.see));
  CHECK(std::isnan(r.iptw.sem)); // comparator ships point estimates only
}

TEST_CASE("studies are deterministic and thread-count invariant") {
  StudyConfig config;
  config.scenario = small_scenario();
  config.replicates = 6;

  config.threads = 1;
  const StudyResult serial = run_study(config);
  config.threads = 3;
  const StudyResult parallel = run_study(config);

  REQUIRE(serial.replicates.size() == parallel.replicates.size());
  for (std::size_t i = 0; i < serial.replicates.size(); ++i) {
    CHECK(serial.replicates[i].matched_estimate == parallel.replicates[i].matched_estimate);
    CHECK(serial.replicates[i].matched_se == parallel.replicates[i].matched_se);
    CHECK(serial.replicates[i].iptw_estimate == parallel.replicates[i].iptw_estimate);
    CHECK(serial.replicates[i].true_att == parallel.replicates[i].true_att);
  }
  CHECK(serial.truth == parallel.truth);
  CHECK(serial.matched.sem == parallel.matched.sem);
}

TEST_CASE("replicate coverage lands near the nominal level") {
  StudyConfig config;
  config.scenario = small_scenario();
  config.scenario.n = 1500;
  config.replicates = 60;
  config.threads = 2;
  const StudyResult r = run_study(config);
  CHECK(r.n_failed == 0);
  CHECK(r.matched.coverage > 0.85);
  CHECK(r.matched.coverage <= 1.0);
  CHECK(std::abs(r.matched.bias) < 4.0 * r.matched.see / std::sqrt(60.0) + 0.5);
  CHECK(r.matched.sem == doctest::Approx(r.matched.see).epsilon(0.35));
}

TEST_CASE("degenerate scenarios abort with a counted failure report") {
  StudyConfig config;
  config.scenario = small_scenario();
  config.scenario.gamma = 50.0; // censors essentially everything immediately
  config.replicates = 4;
  config.threads = 1;
  CHECK_THROWS_AS((void)run_study(config), numeric_error);
}
