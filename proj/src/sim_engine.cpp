#include "rmstmatch/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "rmstmatch/errors.hpp"

namespace rmstmatch {

void ScenarioConfig::validate() const {
  if (n < 2) throw validation_error("scenario needs n >= 2");
  if (!(shape0 > 0.0) || !(shape1 > 0.0)) throw validation_error("Weibull shapes must be > 0");
  if (!(scale0 > 0.0) || !(scale1 > 0.0)) throw validation_error("Weibull scales must be > 0");
  if (gamma < 0.0) throw validation_error("censoring rate gamma must be >= 0");
  if (!(tau > 0.0)) throw validation_error("truncation time tau must be > 0");
}

ScenarioConfig ScenarioConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open scenario file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_text(buffer.str());
}

ScenarioConfig ScenarioConfig::from_text(const std::string& text) {
  ScenarioConfig config;
  std::map<std::string, std::string> entries;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    entries[key] = value;
  }

  auto take = [&](const char* key, auto parse, auto& field) {
    const auto it = entries.find(key);
    if (it == entries.end()) return;
    try {
      field = parse(it->second);
    } catch (const std::exception&) {
      throw validation_error(std::string("bad scenario value for '") + key + "': " + it->second);
    }
    entries.erase(it);
  };
  auto as_double = [](const std::string& s) { return std::stod(s); };
  auto as_count = [](const std::string& s) { return static_cast<std::size_t>(std::stoull(s)); };
  auto as_seed = [](const std::string& s) { return static_cast<std::uint64_t>(std::stoull(s)); };

  take("n", as_count, config.n);
  take("beta_a", as_double, config.beta_a);
  take("shape0", as_double, config.shape0);
  take("shape1", as_double, config.shape1);
  take("scale0", as_double, config.scale0);
  take("scale1", as_double, config.scale1);
  take("gamma", as_double, config.gamma);
  take("tau", as_double, config.tau);
  take("ps_intercept", as_double, config.ps_intercept);
  take("seed", as_seed, config.seed);
  if (!entries.empty())
    throw validation_error("unknown scenario key '" + entries.begin()->first + "'");
  config.validate();
  return config;
}

std::string ScenarioConfig::to_key_value() const {
  char buf[640];
  std::snprintf(buf, sizeof(buf),
                "n = %zu\nbeta_a = %.17g\nshape0 = %.17g\nshape1 = %.17g\n"
                "scale0 = %.17g\nscale1 = %.17g\ngamma = %.17g\ntau = %.17g\n"
                "ps_intercept = %.17g\nseed = %llu\n",
                n, beta_a, shape0, shape1, scale0, scale1, gamma, tau, ps_intercept,
                static_cast<unsigned long long>(seed));
  return buf;
}

std::vector<double> generate_covariates(std::size_t n, RngStream& rng) {
  static constexpr double kBernoulliP[5] = {0.2, 0.4, 0.6, 0.8, 0.5};
  std::vector<double> x(n * 10);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = x.data() + i * 10;
    for (std::size_t j = 0; j < 10; ++j) {
      if (j % 2 == 0)
        row[j] = rng.bernoulli(kBernoulliP[j / 2]) ? 1.0 : 0.0;
      else
        row[j] = rng.normal();
    }
  }
  return x;
}

double treatment_linear_predictor(const double* row, double intercept) {
  static const double kCoef[7] = {std::log(1.2), std::log(1.1), std::log(1.4), std::log(1.2),
                                  std::log(1.6), std::log(1.3), std::log(1.8)};
  double lp = intercept;
  for (std::size_t j = 0; j < 7; ++j) lp += kCoef[j] * row[j];
  return lp;
}

std::vector<std::uint8_t> assign_treatment(const std::vector<double>& covariates, std::size_t n,
                                           RngStream& rng, double intercept) {
  if (covariates.size() < n * 10) throw validation_error("covariate matrix too small");
  std::vector<std::uint8_t> a(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lp = treatment_linear_predictor(covariates.data() + i * 10, intercept);
    const double p = 1.0 / (1.0 + std::exp(-lp));
    a[i] = rng.bernoulli(p) ? 1 : 0;
  }
  return a;
}

namespace {

double outcome_linear_predictor(const double* row) {
  return row[0] + 1.2 * row[3] + 1.4 * row[5] + 1.6 * row[6] + 1.6 * row[7] + 1.4 * row[8] +
         1.2 * row[9];
}

} // namespace

void generate_potential_times(const std::vector<double>& covariates, std::size_t n,
                              const ScenarioConfig& config, RngStream& rng,
                              std::vector<double>& t0, std::vector<double>& t1) {
  t0.resize(n);
  t1.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform_open();
    const double neg_log_u = -std::log(u);
    const double lp = outcome_linear_predictor(covariates.data() + i * 10);
    t0[i] = std::pow(neg_log_u / (config.scale0 * std::exp(lp)), 1.0 / config.shape0);
    t1[i] = std::pow(neg_log_u / (config.scale1 * std::exp(config.beta_a + lp)),
                     1.0 / config.shape1);
  }
}

std::vector<double> generate_censoring(const std::vector<double>& covariates, std::size_t n,
                                       double gamma, RngStream& rng) {
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = covariates.data() + i * 10;
    const double rate = gamma * std::exp(0.2 * row[3] + 0.1 * row[6]);
    c[i] = rng.exponential(rate);
  }
  return c;
}

SimulatedDataset simulate_dataset(const ScenarioConfig& config) {
  RngStream rng(config.seed);
  return simulate_dataset(config, rng);
}

SimulatedDataset simulate_dataset(const ScenarioConfig& config, RngStream& rng) {
  config.validate();
  SimulatedDataset sim;
  sim.n = config.n;
  sim.tau = config.tau;
  sim.covariates = generate_covariates(config.n, rng);
  sim.treatment = assign_treatment(sim.covariates, config.n, rng, config.ps_intercept);
  generate_potential_times(sim.covariates, config.n, config, rng, sim.potential_t0,
                           sim.potential_t1);
  sim.censor_time = generate_censoring(sim.covariates, config.n, config.gamma, rng);

  sim.observed_time.resize(config.n);
  sim.event.resize(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    const double t = sim.treatment[i] == 1 ? sim.potential_t1[i] : sim.potential_t0[i];
    const double z = std::min(t, config.tau);
    sim.observed_time[i] = std::min(z, sim.censor_time[i]);
    sim.event[i] = z < sim.censor_time[i] ? 1 : 0;
  }
  return sim;
}

Dataset SimulatedDataset::to_dataset() const {
  Dataset d;
  d.ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) d.ids.push_back(std::to_string(i + 1));
  d.time = observed_time;
  d.event = event;
  d.treatment = treatment;
  d.covariates = covariates;
  d.covariate_names = {"x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "x9", "x10"};
  d.potential_t0 = potential_t0;
  d.potential_t1 = potential_t1;
  return d;
}

namespace {

double truth_over(const SimulatedDataset& sim, double tau, bool att) {
  if (sim.potential_t0.empty() || sim.potential_t1.empty())
    throw validation_error("dataset has no potential outcomes; ground truth undefined");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < sim.n; ++i) {
    if (att && sim.treatment[i] != 1) continue;
    sum += std::min(sim.potential_t1[i], tau) - std::min(sim.potential_t0[i], tau);
    ++count;
  }
  if (count == 0) throw validation_error("no treated subjects; ATT truth undefined");
  return sum / static_cast<double>(count);
}

} // namespace

double true_att(const SimulatedDataset& sim, double tau) { return truth_over(sim, tau, true); }
double true_ate(const SimulatedDataset& sim, double tau) { return truth_over(sim, tau, false); }

} // namespace rmstmatch
