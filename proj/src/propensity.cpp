#include "rmstmatch/propensity.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "rmstmatch/errors.hpp"

namespace rmstmatch {

namespace {

double bernoulli_loglik(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
  // sum y*eta - log(1 + exp(eta)), with the stable branch for large eta
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double e = eta[i];
    const double log1pexp = e > 30.0 ? e : std::log1p(std::exp(e));
    ll += y[i] * e - log1pexp;
  }
  return ll;
}

constexpr double kScoreFloor = 1e-12;

} // namespace

PropensityFit fit_logistic(std::span<const double> x, std::size_t n, std::size_t p,
                           std::span<const std::uint8_t> a, const IrlsOptions& options) {
  if (n != a.size() || x.size() != n * p)
    throw validation_error("design matrix and treatment vector sizes disagree");
  if (n <= p + 1) throw validation_error("logistic fit needs n > p + 1");

  Eigen::MatrixXd design(n, p + 1);
  Eigen::VectorXd y(n);
  double y_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    for (std::size_t j = 0; j < p; ++j) design(i, j + 1) = x[i * p + j];
    y[i] = a[i];
    y_mean += a[i];
  }
  y_mean /= static_cast<double>(n);
  if (y_mean == 0.0 || y_mean == 1.0)
    throw validation_error("treatment vector is constant");

  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < static_cast<Eigen::Index>(p + 1)) throw rank_deficient_error();
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
  beta[0] = std::log(y_mean / (1.0 - y_mean));
  Eigen::VectorXd eta = design * beta;
  double ll = bernoulli_loglik(eta, y);

  Eigen::VectorXd mu(n), grad(p + 1);
  Eigen::MatrixXd info(p + 1, p + 1);
  double max_grad = std::numeric_limits<double>::infinity();
  int iter = 0;
  bool converged = false;
  bool stalled = false;

  for (; iter < options.max_iterations; ++iter) {
    mu = (1.0 + (-eta.array()).exp()).inverse();
    grad = design.transpose() * (y - mu);
    max_grad = grad.cwiseAbs().maxCoeff();
    if (max_grad < options.tolerance) {
      converged = true;
      break;
    }

    const Eigen::VectorXd w = mu.array() * (1.0 - mu.array());
    info = design.transpose() * w.asDiagonal() * design;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success) throw rank_deficient_error();
    const Eigen::VectorXd step = ldlt.solve(grad);

    // step halving: never let the log-likelihood decrease
    double t = 1.0;
    bool improved = false;
    while (t > 1e-10) {
      const Eigen::VectorXd cand = beta + t * step;
      const Eigen::VectorXd cand_eta = design * cand;
      const double cand_ll = bernoulli_loglik(cand_eta, y);
      if (cand_ll >= ll - 1e-13 * std::abs(ll)) {
        beta = cand;
        eta = cand_eta;
        ll = cand_ll;
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) {
      stalled = true;
      break;
    }
  }

  mu = (1.0 + (-eta.array()).exp()).inverse();
  const bool extreme_scores =
      (mu.array() <= kScoreFloor).any() || (mu.array() >= 1.0 - kScoreFloor).any();
  if (!converged) {
    // a stalled gradient with scores pinned at 0/1 is the separation signature
    if (extreme_scores) throw separation_error();
    if (stalled || iter >= options.max_iterations)
      throw not_converged_error(iter, max_grad);
  }

  PropensityFit fit;
  fit.coefficients.assign(beta.data(), beta.data() + beta.size());
  fit.scores.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    fit.scores[i] = std::min(1.0 - kScoreFloor, std::max(kScoreFloor, mu[static_cast<Eigen::Index>(i)]));
  fit.iterations = iter;
  fit.converged = converged;
  fit.max_abs_score_gradient = max_grad;
  fit.log_likelihood = ll;

  const Eigen::VectorXd w = mu.array() * (1.0 - mu.array());
  info = design.transpose() * w.asDiagonal() * design;
  const Eigen::MatrixXd cov = info.ldlt().solve(Eigen::MatrixXd::Identity(p + 1, p + 1));
  fit.std_errors.resize(p + 1);
  for (std::size_t j = 0; j <= p; ++j)
    fit.std_errors[j] = std::sqrt(std::max(0.0, cov(static_cast<Eigen::Index>(j),
                                                    static_cast<Eigen::Index>(j))));
  return fit;
}

PropensityFit fit_logistic(const Dataset& dataset, const IrlsOptions& options) {
  return fit_logistic(dataset.covariates, dataset.n_rows(), dataset.n_covariates(),
                      dataset.treatment, options);
}

std::vector<BalanceRow> standardized_mean_differences(const Dataset& dataset,
                                                      const MatchedPairs* pairs) {
  const auto treated = dataset.treated_indices();
  const auto control = dataset.control_indices();
  const std::size_t p = dataset.n_covariates();

  auto moments = [&](const std::vector<std::size_t>& rows, std::size_t col) {
    double mean = 0.0;
    for (std::size_t r : rows) mean += dataset.cov(r, col);
    mean /= static_cast<double>(rows.size());
    double ss = 0.0;
    for (std::size_t r : rows) {
      const double d = dataset.cov(r, col) - mean;
      ss += d * d;
    }
    const double var = rows.size() > 1 ? ss / static_cast<double>(rows.size() - 1) : 0.0;
    return std::pair{mean, var};
  };

  std::vector<std::size_t> matched_t, matched_c;
  if (pairs) {
    matched_t.reserve(pairs->n_pairs());
    matched_c.reserve(pairs->n_pairs());
    for (const auto& [ti, ci] : pairs->pairs) {
      matched_t.push_back(treated[ti]);
      matched_c.push_back(control[ci]);
    }
  }

  std::vector<BalanceRow> table;
  table.reserve(p);
  for (std::size_t col = 0; col < p; ++col) {
    const auto [mt, vt] = moments(treated, col);
    const auto [mc, vc] = moments(control, col);
    const double pooled_sd = std::sqrt((vt + vc) / 2.0);
    if (pooled_sd == 0.0) throw zero_variance_error(dataset.covariate_names[col]);

    BalanceRow row;
    row.name = dataset.covariate_names[col];
    row.smd_before = (mt - mc) / pooled_sd;
    if (pairs) {
      const auto [amt, avt] = moments(matched_t, col);
      const auto [amc, avc] = moments(matched_c, col);
      (void)avt;
      (void)avc;
      row.smd_after = (amt - amc) / pooled_sd; // frozen pre-matching denominator
    } else {
      row.smd_after = std::numeric_limits<double>::quiet_NaN();
    }
    table.push_back(std::move(row));
  }
  return table;
}

double max_abs_smd_after(const std::vector<BalanceRow>& table) {
  double worst = 0.0;
  for (const auto& row : table)
    if (std::isfinite(row.smd_after)) worst = std::max(worst, std::abs(row.smd_after));
  return worst;
}

} // namespace rmstmatch
