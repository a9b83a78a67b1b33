#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rmstmatch/dataset.hpp"
#include "rmstmatch/rng.hpp"

namespace rmstmatch {

// One simulation scenario: Weibull potential outcomes with shared-frailty
// uniform, logistic treatment assignment over X1..X7, exponential censoring.
// shape0 == shape1 gives proportional hazards, otherwise non-proportional.
struct ScenarioConfig {
  std::size_t n = 2500;
  double beta_a = 0.0;          // conditional log-hazard treatment effect
  double shape0 = 1.0;          // Weibull nu_0
  double shape1 = 1.0;          // Weibull nu_1
  double scale0 = 0.00247875217666636; // lambda_00 = exp(-6)
  double scale1 = 0.00247875217666636; // lambda_01
  double gamma = 1e-8;          // baseline censoring rate
  double tau = 100.0;
  double ps_intercept = -1.95;  // treatment-model intercept (see scenarios/)
  std::uint64_t seed = 0;

  void validate() const;
  bool proportional_hazards() const { return shape0 == shape1; }

  // flat key-value text ("key = value" lines, '#' comments)
  static ScenarioConfig from_file(const std::filesystem::path& path);
  static ScenarioConfig from_text(const std::string& text);
  std::string to_key_value() const;
};

// Simulated cohort with both potential outcome arms retained.
struct SimulatedDataset {
  std::size_t n = 0;
  std::vector<double> covariates;      // row-major n x 10
  std::vector<std::uint8_t> treatment; // A
  std::vector<double> potential_t0;    // T^0
  std::vector<double> potential_t1;    // T^1
  std::vector<double> censor_time;     // C
  std::vector<double> observed_time;   // Y = min(T, C, tau)
  std::vector<std::uint8_t> event;     // delta_Z = I(min(T,tau) < C)
  double tau = 0.0;

  double cov(std::size_t row, std::size_t col) const { return covariates[row * 10 + col]; }

  // analysis view: x1..x10 covariates plus potential outcomes for truth
  Dataset to_dataset() const;
};

// X1,X3,X5,X7,X9 ~ Bernoulli(0.2, 0.4, 0.6, 0.8, 0.5); X2,X4,X6,X8,X10
// standard normal; all independent. Draws are row-major per subject so a
// fixed stream reproduces the matrix bit for bit.
std::vector<double> generate_covariates(std::size_t n, RngStream& rng);

// logit P(A=1) = intercept + log(1.2)X1 + log(1.1)X2 + log(1.4)X3
//              + log(1.2)X4 + log(1.6)X5 + log(1.3)X6 + log(1.8)X7
std::vector<std::uint8_t> assign_treatment(const std::vector<double>& covariates, std::size_t n,
                                           RngStream& rng, double intercept = -1.95);

double treatment_linear_predictor(const double* row, double intercept);

// Weibull inverse-transform with ONE shared uniform per subject across both
// arms, so beta_a = 0 gives T0 == T1 exactly:
//   T^j = ( -log U / (scale_j * exp(beta_a*j + x'eta)) )^(1/shape_j)
// with x'eta = X1 + 1.2X4 + 1.4X6 + 1.6X7 + 1.6X8 + 1.4X9 + 1.2X10.
void generate_potential_times(const std::vector<double>& covariates, std::size_t n,
                              const ScenarioConfig& config, RngStream& rng,
                              std::vector<double>& t0, std::vector<double>& t1);

// C_i ~ Exponential(gamma * exp(0.2 X4 + 0.1 X7)); gamma = 0 disables
// censoring (C = +inf)
std::vector<double> generate_censoring(const std::vector<double>& covariates, std::size_t n,
                                       double gamma, RngStream& rng);

// Full generation pass; derives its own stream from config.seed.
SimulatedDataset simulate_dataset(const ScenarioConfig& config);
SimulatedDataset simulate_dataset(const ScenarioConfig& config, RngStream& rng);

// Per-dataset ground truth: mean of min(T1,tau) - min(T0,tau) over the
// treated (ATT) or over everyone (ATE).
double true_att(const SimulatedDataset& sim, double tau);
double true_ate(const SimulatedDataset& sim, double tau);

} // namespace rmstmatch
