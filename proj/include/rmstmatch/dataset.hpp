#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rmstmatch {

// Canonical survival dataset: one row per subject, covariates pre-encoded
// numeric, no missing values (complete-case analysis only).
struct Dataset {
  std::vector<std::string> ids;
  std::vector<double> time;            // observed follow-up, strictly positive
  std::vector<std::uint8_t> event;     // 1 = event, 0 = censored
  std::vector<std::uint8_t> treatment; // 1 = treated, 0 = control
  std::vector<double> covariates;      // row-major n x p
  std::vector<std::string> covariate_names;

  // potential restricted outcomes, present only for simulated data
  std::optional<std::vector<double>> potential_t0;
  std::optional<std::vector<double>> potential_t1;

  std::size_t n_rows() const { return time.size(); }
  std::size_t n_covariates() const { return covariate_names.size(); }

  double cov(std::size_t row, std::size_t col) const {
    return covariates[row * n_covariates() + col];
  }

  std::vector<std::size_t> treated_indices() const;
  std::vector<std::size_t> control_indices() const;

  // Throws validation errors; checks positivity of time, binary flags,
  // presence of both arms, and absence of non-finite values.
  void validate() const;
};

// Maps the required logical columns onto file column names. Remaining
// columns become covariates, except literal "t0"/"t1" which are read as
// potential outcomes when present.
struct CsvSchema {
  std::string id = "id";
  std::string time = "time";
  std::string event = "event";
  std::string treat = "treat";

  // Parses "id=ID,time=FUTIME,event=EVT,treat=SMOKER" style remapping;
  // omitted keys keep their defaults.
  static CsvSchema parse(const std::string& spec);
};

// CSV with a header row, UTF-8, '.' decimal separator. Lines starting with
// '#' are skipped (output files carry a config-hash comment line).
Dataset read_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

// Writes the canonical schema (id,time,event,treat,<covariates...>[,t0,t1]).
// Floats are written with 17 significant digits so a round trip is exact.
void write_csv(const Dataset& dataset, const std::filesystem::path& path,
               const std::string& header_comment = {});

} // namespace rmstmatch
