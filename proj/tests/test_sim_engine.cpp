#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "rmstmatch/errors.hpp"
#include "rmstmatch/rng.hpp"
#include "rmstmatch/sim_engine.hpp"

using namespace rmstmatch;

TEST_CASE("covariate columns have the right marginals") {
  RngStream rng(1);
  const std::size_t n = 1000000;
  const auto x = generate_covariates(n, rng);

  const double probs[5] = {0.2, 0.4, 0.6, 0.8, 0.5};
  for (std::size_t b = 0; b < 5; ++b) {
    const std::size_t col = 2 * b;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = x[i * 10 + col];
      CHECK((v == 0.0 || v == 1.0));
      mean += v;
    }
    mean /= static_cast<double>(n);
    const double sigma = std::sqrt(probs[b] * (1.0 - probs[b]) / static_cast<double>(n));
    CHECK(std::abs(mean - probs[b]) < 3.0 * sigma);
  }
  for (std::size_t c = 1; c < 10; c += 2) {
    double mean = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x[i * 10 + c];
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) ss += (x[i * 10 + c] - mean) * (x[i * 10 + c] - mean);
    CHECK(std::abs(mean) < 0.005);
    CHECK(std::sqrt(ss / static_cast<double>(n - 1)) == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_CASE("fixed seed reproduces the matrix bit for bit") {
  RngStream a(123456), b(123456);
  CHECK(generate_covariates(500, a) == generate_covariates(500, b));

  ScenarioConfig config;
  config.n = 300;
  config.seed = 77;
  const SimulatedDataset s1 = simulate_dataset(config);
  const SimulatedDataset s2 = simulate_dataset(config);
  CHECK(s1.covariates == s2.covariates);
  CHECK(s1.treatment == s2.treatment);
  CHECK(s1.potential_t0 == s2.potential_t0);
  CHECK(s1.potential_t1 == s2.potential_t1);
  CHECK(s1.censor_time == s2.censor_time);
  CHECK(s1.observed_time == s2.observed_time);
  CHECK(s1.event == s2.event);
}

TEST_CASE("treatment model evaluates the printed coefficients") {
  const double zeros[10] = {0};
  const double lp0 = treatment_linear_predictor(zeros, -1.95);
  CHECK(1.0 / (1.0 + std::exp(-lp0)) == doctest::Approx(0.124652).epsilon(1e-4));

  double with_x7[10] = {0};
  with_x7[6] = 1.0;
  const double lp1 = treatment_linear_predictor(with_x7, -1.95);
  CHECK(std::exp(lp1 - lp0) == doctest::Approx(1.8).epsilon(1e-14)); // odds ratio

  // the printed intercept puts the marginal treated share near 27.7%; the
  // scenario files lower the intercept to hit the reference variance scale
  RngStream rng(9);
  const std::size_t n = 200000;
  const auto x = generate_covariates(n, rng);
  const auto a_printed = assign_treatment(x, n, rng, -1.95);
  const auto a_scenario = assign_treatment(x, n, rng, -2.7);
  const double f_printed =
      std::count(a_printed.begin(), a_printed.end(), std::uint8_t{1}) / static_cast<double>(n);
  const double f_scenario =
      std::count(a_scenario.begin(), a_scenario.end(), std::uint8_t{1}) / static_cast<double>(n);
  CHECK(f_printed == doctest::Approx(0.277).epsilon(0.02));
  CHECK(f_scenario == doctest::Approx(0.155).epsilon(0.03));
}

TEST_CASE("zero treatment effect gives identical potential arms") {
  ScenarioConfig config;
  config.n = 2000;
  config.beta_a = 0.0;
  config.seed = 5;
  const SimulatedDataset sim = simulate_dataset(config);
  CHECK(sim.potential_t0 == sim.potential_t1);
  CHECK(true_att(sim, config.tau) == 0.0);
  CHECK(true_ate(sim, config.tau) == 0.0);
}

TEST_CASE("unit shape reduces to the exponential distribution") {
  ScenarioConfig config;
  config.n = 1000000;
  config.seed = 8;
  RngStream rng(8);
  const std::vector<double> zeros(config.n * 10, 0.0); // rate = scale0 exactly
  std::vector<double> t0, t1;
  generate_potential_times(zeros, config.n, config, rng, t0, t1);
  double mean = 0.0;
  for (double t : t0) mean += t;
  mean /= static_cast<double>(config.n);
  CHECK(mean == doctest::Approx(1.0 / config.scale0).epsilon(0.01));
}

TEST_CASE("proportional hazards scenario scales times by exp(-beta)") {
  ScenarioConfig config;
  config.n = 500;
  config.beta_a = -0.8;
  config.seed = 4;
  const SimulatedDataset sim = simulate_dataset(config);
  // with shared U and shape 1, T1 = T0 * exp(-beta_a) subject for subject
  for (std::size_t i = 0; i < sim.n; ++i)
    CHECK(sim.potential_t1[i] ==
          doctest::Approx(sim.potential_t0[i] * std::exp(0.8)).epsilon(1e-12));
}

TEST_CASE("potential times follow the closed-form Weibull law") {
  // Kolmogorov-Smirnov against F(t) = 1 - exp(-scale * exp(lp) * t^shape)
  ScenarioConfig config;
  config.shape0 = 1.4;
  config.scale0 = 0.002;
  config.seed = 3;
  const std::size_t n = 100000;
  config.n = n;

  std::vector<double> row(10, 0.0);
  row[0] = 1.0; // x1 = 1, everything else 0
  std::vector<double> x;
  x.reserve(n * 10);
  for (std::size_t i = 0; i < n; ++i) x.insert(x.end(), row.begin(), row.end());

  RngStream rng(3);
  std::vector<double> t0, t1;
  generate_potential_times(x, n, config, rng, t0, t1);
  std::sort(t0.begin(), t0.end());
  const double rate = config.scale0 * std::exp(1.0);
  double d_stat = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = 1.0 - std::exp(-rate * std::pow(t0[i], config.shape0));
    const double hi = static_cast<double>(i + 1) / n, lo = static_cast<double>(i) / n;
    d_stat = std::max({d_stat, std::abs(f - hi), std::abs(f - lo)});
  }
  // alpha = 0.01 critical value 1.628 / sqrt(n)
  CHECK(d_stat * std::sqrt(static_cast<double>(n)) < 1.628);
}

TEST_CASE("censoring rates hit their targets") {
  SUBCASE("gamma 1e-8 is effectively uncensored") {
    ScenarioConfig config;
    config.n = 100000;
    config.gamma = 1e-8;
    config.seed = 10;
    const SimulatedDataset sim = simulate_dataset(config);
    double censored = 0.0;
    for (auto e : sim.event) censored += e == 0 ? 1.0 : 0.0;
    CHECK(censored / static_cast<double>(sim.n) < 0.005);
  }

  SUBCASE("gamma 0 disables censoring entirely") {
    RngStream rng(2);
    const auto x = generate_covariates(100, rng);
    const auto c = generate_censoring(x, 0.0, rng);
    for (double v : c) CHECK(std::isinf(v));
  }

  SUBCASE("reference gamma 0.00462 censors about 20 percent") {
    ScenarioConfig config;
    config.n = 100000;
    config.beta_a = -0.4;
    config.gamma = 0.00462;
    config.ps_intercept = -1.95;
    config.seed = 11;
    const SimulatedDataset sim = simulate_dataset(config);
    double censored = 0.0;
    for (auto e : sim.event) censored += e == 0 ? 1.0 : 0.0;
    CHECK(std::abs(censored / static_cast<double>(sim.n) - 0.20) < 0.03);
  }
}

TEST_CASE("shipped scenario files realize their nominal censoring rates") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(RMSTMATCH_SOURCE_DIR) / "scenarios";
  std::size_t checked = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".scn") continue;
    const ScenarioConfig config = ScenarioConfig::from_file(entry.path());
    const std::string name = entry.path().stem().string();
    double nominal = 0.0;
    if (name.ends_with("cr20")) nominal = 0.20;
    else if (name.ends_with("cr40")) nominal = 0.40;
    else if (name.ends_with("cr60")) nominal = 0.60;
    const SimulatedDataset sim = simulate_dataset(config);
    double censored = 0.0;
    for (auto e : sim.event) censored += e == 0 ? 1.0 : 0.0;
    const double rate = censored / static_cast<double>(sim.n);
    INFO(name, " realized censoring ", rate);
    CHECK(std::abs(rate - nominal) < 0.03);
    ++checked;
  }
  CHECK(checked == 40);
}

TEST_CASE("observed data respect the restriction and censoring definitions") {
  ScenarioConfig config;
  config.n = 5000;
  config.gamma = 0.01;
  config.seed = 21;
  const SimulatedDataset sim = simulate_dataset(config);
  for (std::size_t i = 0; i < sim.n; ++i) {
    const double t = sim.treatment[i] ? sim.potential_t1[i] : sim.potential_t0[i];
    const double z = std::min(t, config.tau);
    CHECK(sim.observed_time[i] <= config.tau);
    if (sim.event[i] == 1) {
      CHECK(sim.observed_time[i] == z);
      CHECK(z < sim.censor_time[i]);
    } else {
      CHECK(sim.observed_time[i] == sim.censor_time[i]);
      CHECK(sim.censor_time[i] <= z);
    }
  }
}

TEST_CASE("ground truth needs potential outcomes") {
  ScenarioConfig config;
  config.n = 100;
  config.seed = 33;
  SimulatedDataset sim = simulate_dataset(config);
  sim.potential_t0.clear();
  CHECK_THROWS_AS((void)true_att(sim, 100.0), validation_error);
}

TEST_CASE("scenario config parsing") {
  ScenarioConfig config;
  config.n = 123;
  config.beta_a = -0.4;
  config.gamma = 0.0123;
  config.seed = 999;
  config.ps_intercept = -2.7;
  const ScenarioConfig parsed = ScenarioConfig::from_text(config.to_key_value());
  CHECK(parsed.n == config.n);
  CHECK(parsed.beta_a == config.beta_a);
  CHECK(parsed.gamma == config.gamma);
  CHECK(parsed.seed == config.seed);
  CHECK(parsed.ps_intercept == config.ps_intercept);

  CHECK_THROWS_AS((void)ScenarioConfig::from_text("bogus = 1\n"), validation_error);
  CHECK_THROWS_AS((void)ScenarioConfig::from_text("n = 1\n"), validation_error);
  CHECK_THROWS_AS((void)ScenarioConfig::from_text("tau = -5\n"), validation_error);
  CHECK_THROWS_AS((void)ScenarioConfig::from_text("shape0 = 0\n"), validation_error);

  const ScenarioConfig commented = ScenarioConfig::from_text("# note\nn = 50 # inline\n");
  CHECK(commented.n == 50);
}
