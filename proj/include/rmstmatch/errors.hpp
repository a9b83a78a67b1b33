#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rmstmatch {

// Error taxonomy. validation_error covers malformed inputs and contract
// violations (CLI exit code 2); numeric_error covers data-dependent failures
// of the numerical procedures (CLI exit code 3).

class validation_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class numeric_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// --- dataset / CSV ---

class missing_column_error : public validation_error {
public:
  explicit missing_column_error(const std::string& column)
      : validation_error("missing column '" + column + "'"), column_(column) {}
  const std::string& column() const { return column_; }

private:
  std::string column_;
};

class non_numeric_cell_error : public validation_error {
public:
  non_numeric_cell_error(std::size_t row, const std::string& column, const std::string& value)
      : validation_error("non-numeric value '" + value + "' in column '" + column + "', data row " +
                         std::to_string(row)),
        row_(row), column_(column) {}
  std::size_t row() const { return row_; }
  const std::string& column() const { return column_; }

private:
  std::size_t row_;
  std::string column_;
};

class negative_time_error : public validation_error {
public:
  negative_time_error(std::size_t row, double value)
      : validation_error("non-positive time " + std::to_string(value) + " in data row " +
                         std::to_string(row)),
        row_(row) {}
  std::size_t row() const { return row_; }

private:
  std::size_t row_;
};

class non_binary_flag_error : public validation_error {
public:
  non_binary_flag_error(std::size_t row, const std::string& column, double value)
      : validation_error("flag column '" + column + "' has non-binary value " +
                         std::to_string(value) + " in data row " + std::to_string(row)),
        row_(row), column_(column) {}
  std::size_t row() const { return row_; }
  const std::string& column() const { return column_; }

private:
  std::size_t row_;
  std::string column_;
};

// --- propensity ---

class rank_deficient_error : public numeric_error {
public:
  rank_deficient_error() : numeric_error("design matrix is rank deficient") {}
};

class not_converged_error : public numeric_error {
public:
  not_converged_error(int iterations, double gradient)
      : numeric_error("logistic fit did not converge after " + std::to_string(iterations) +
                      " iterations (max |gradient| = " + std::to_string(gradient) + ")"),
        iterations_(iterations), gradient_(gradient) {}
  int iterations() const { return iterations_; }
  double gradient() const { return gradient_; }

private:
  int iterations_;
  double gradient_;
};

class separation_error : public numeric_error {
public:
  separation_error() : numeric_error("complete or quasi-complete separation detected") {}
};

class zero_variance_error : public validation_error {
public:
  explicit zero_variance_error(const std::string& covariate)
      : validation_error("covariate '" + covariate + "' has zero pooled variance"),
        covariate_(covariate) {}
  const std::string& covariate() const { return covariate_; }

private:
  std::string covariate_;
};

// --- matcher ---

class insufficient_controls_error : public validation_error {
public:
  insufficient_controls_error(std::size_t n_treated, std::size_t n_control)
      : validation_error("1:1 matching needs at least as many controls as treated (" +
                         std::to_string(n_treated) + " treated, " + std::to_string(n_control) +
                         " controls)") {}
};

// --- km / rmst ---

class tau_beyond_follow_up_error : public validation_error {
public:
  tau_beyond_follow_up_error(double tau, double t_max)
      : validation_error("truncation time " + std::to_string(tau) +
                         " exceeds the largest follow-up time " + std::to_string(t_max)),
        tau_(tau), t_max_(t_max) {}
  double tau() const { return tau_; }
  double t_max() const { return t_max_; }

private:
  double tau_;
  double t_max_;
};

class too_few_events_error : public numeric_error {
public:
  explicit too_few_events_error(std::size_t m)
      : numeric_error("variance needs at least 2 events before tau, got " + std::to_string(m)) {}
};

// --- att ---

class empty_match_error : public validation_error {
public:
  empty_match_error() : validation_error("matched sample is empty") {}
};

// --- sensitivity ---

class param_below_one_error : public validation_error {
public:
  param_below_one_error(const std::string& name, double value)
      : validation_error("sensitivity parameter " + name + " must be >= 1, got " +
                         std::to_string(value)) {}
};

class negative_mean_error : public validation_error {
public:
  explicit negative_mean_error(double value)
      : validation_error("restricted-mean inputs must be nonnegative, got " +
                         std::to_string(value)) {}
};

class missing_means_error : public validation_error {
public:
  missing_means_error()
      : validation_error("sensitivity analysis needs per-arm restricted means (m1, m0)") {}
};

} // namespace rmstmatch
