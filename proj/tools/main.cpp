// rmstmatch: propensity-matched RMST difference analysis for observational
// survival data. Subcommands: simulate, analyze, balance, sensitivity.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "rmstmatch/att_estimator.hpp"
#include "rmstmatch/dataset.hpp"
#include "rmstmatch/errors.hpp"
#include "rmstmatch/evalue.hpp"
#include "rmstmatch/study.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace rmstmatch;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

std::string format_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// FNV-1a over the canonical resolved-config string; stamped into every
// output file so artifacts can be traced back to the run that made them
std::string config_hash(const std::string& canonical) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

std::ofstream open_output(const fs::path& path, const std::string& hash) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write '" + path.string() + "'");
  out << "# config " << hash << "\n";
  return out;
}

void write_manifest(const fs::path& path, const json& resolved, const std::string& hash) {
  json manifest;
  manifest["config"] = resolved;
  manifest["config_hash"] = hash;
  manifest["timestamp"] = utc_timestamp();
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write '" + path.string() + "'");
  out << manifest.dump(2) << '\n';
}

struct AnalyzeArgs {
  std::string data, schema, out;
  std::string variance = "murray", metric = "logit", tail_pairing = "derived";
  double tau = 0.0;
  double balance_threshold = 0.1;
  bool force = false;
  bool with_iptw = false;
  std::string emit_pairs, emit_balance, emit_curves, emit_ggrid;
};

void emit_balance_csv(const fs::path& path, const std::vector<BalanceRow>& table,
                      const std::string& hash) {
  auto out = open_output(path, hash);
  out << "covariate,smd_before,smd_after\n";
  for (const auto& row : table) {
    out << row.name << ',' << format_g(row.smd_before) << ',';
    if (std::isfinite(row.smd_after)) out << format_g(row.smd_after);
    out << '\n';
  }
}

void emit_curve_csv(const fs::path& path, const KmCurve& curve, const std::string& hash) {
  auto out = open_output(path, hash);
  out << "time,at_risk,events,survival\n";
  for (std::size_t k = 0; k < curve.n_times(); ++k)
    out << format_g(curve.event_times[k]) << ',' << format_g(curve.at_risk[k]) << ','
        << format_g(curve.events[k]) << ',' << format_g(curve.survival[k]) << '\n';
}

int run_analyze(const AnalyzeArgs& args) {
  json resolved{{"command", "analyze"},
                {"data", args.data},
                {"schema", args.schema},
                {"tau", args.tau},
                {"variance", args.variance},
                {"metric", args.metric},
                {"tail_pairing", args.tail_pairing},
                {"balance_threshold", args.balance_threshold},
                {"force", args.force},
                {"with_iptw", args.with_iptw}};
  const std::string hash = config_hash(resolved.dump());

  const Dataset dataset = read_csv(args.data, CsvSchema::parse(args.schema));

  AnalysisOptions options;
  options.metric = distance_metric_from_string(args.metric);
  options.variance_method = variance_method_from_string(args.variance);
  options.tail_pairing =
      args.tail_pairing == "as-printed" ? TailPairing::as_printed : TailPairing::derived;
  options.with_iptw = args.with_iptw;
  const AnalysisResult r = analyze_dataset(dataset, args.tau, options);

  const double worst_smd = max_abs_smd_after(r.balance);
  if (!args.emit_balance.empty()) emit_balance_csv(args.emit_balance, r.balance, hash);
  if (worst_smd > args.balance_threshold && !args.force) {
    std::cerr << "post-matching covariate imbalance: max |SMD| = " << worst_smd
              << " exceeds " << args.balance_threshold
              << "; recalibrate the propensity model or pass --force\n";
    return kExitValidation;
  }

  if (!args.emit_pairs.empty()) {
    const auto treated = dataset.treated_indices();
    const auto control = dataset.control_indices();
    auto out = open_output(args.emit_pairs, hash);
    out << "treated_id,control_id,distance\n";
    for (const auto& [ti, ci] : r.pairs.pairs) {
      const double st = r.fit.scores[treated[ti]];
      const double sc = r.fit.scores[control[ci]];
      const double d = options.metric == DistanceMetric::logit
                           ? std::abs(std::log(st / (1 - st)) - std::log(sc / (1 - sc)))
                           : std::abs(st - sc);
      out << dataset.ids[treated[ti]] << ',' << dataset.ids[control[ci]] << ','
          << format_g(d) << '\n';
    }
  }
  if (!args.emit_curves.empty()) {
    const PairedSample sample = matched_paired_sample(dataset, r.pairs);
    emit_curve_csv(args.emit_curves + "_control.csv",
                   km_curve(sample.time0, sample.event0), hash);
    emit_curve_csv(args.emit_curves + "_treated.csv",
                   km_curve(sample.time1, sample.event1), hash);
  }
  if (!args.emit_ggrid.empty()) {
    const PairedSample sample = matched_paired_sample(dataset, r.pairs);
    const GGrid grid = estimate_g01(sample);
    auto out = open_output(args.emit_ggrid, hash);
    out << "u,v,g\n";
    for (std::size_t a = 0; a < grid.u_grid.size(); ++a)
      for (std::size_t b = 0; b < grid.v_grid.size(); ++b)
        out << format_g(grid.u_grid[a]) << ',' << format_g(grid.v_grid[b]) << ','
            << format_g(grid.at(a, b)) << '\n';
  }

  json result{{"estimate", r.att.estimate},
              {"se", r.att.se},
              {"ci", {r.att.ci_low, r.att.ci_high}},
              {"n_pairs", r.att.n_pairs},
              {"tau", r.att.tau},
              {"method",
               {{"variance", to_string(r.att.variance_method)},
                {"metric", to_string(r.pairs.metric)},
                {"estimator", "matched_rmst_att"}}},
              {"balance_max_smd", worst_smd},
              {"rmst0", r.att.rmst0},
              {"rmst1", r.att.rmst1},
              {"var0", r.att.var0},
              {"var1", r.att.var1},
              {"cov", r.att.cov},
              {"config_hash", hash}};
  if (r.iptw) {
    result["iptw"] = {{"estimate", r.iptw->estimate},
                      {"max_control_weight", r.iptw->max_control_weight},
                      {"extreme_weights", r.iptw->extreme_weights}};
    if (r.iptw->extreme_weights)
      std::cerr << "warning: control IPTW weight exceeds 100 (max "
                << r.iptw->max_control_weight << ")\n";
  }

  fs::path out_path(args.out);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  std::ofstream out(out_path);
  if (!out) throw validation_error("cannot write '" + args.out + "'");
  out << result.dump(2) << '\n';
  write_manifest(out_path.string() + ".manifest.json", resolved, hash);

  std::cout << "estimate " << format_g(r.att.estimate) << "  se " << format_g(r.att.se)
            << "  95% CI [" << format_g(r.att.ci_low) << ", " << format_g(r.att.ci_high)
            << "]  pairs " << r.att.n_pairs << "  max|SMD| " << format_g(worst_smd) << '\n';
  return 0;
}

struct SimulateArgs {
  std::string scenario, out;
  std::size_t reps = 500;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string variance = "murray", metric = "logit";
};

int run_simulate(const SimulateArgs& args) {
  StudyConfig config;
  config.scenario = ScenarioConfig::from_file(args.scenario);
  if (args.seed) config.scenario.seed = *args.seed;
  config.replicates = args.reps;
  config.threads = args.threads;
  config.analysis.variance_method = variance_method_from_string(args.variance);
  config.analysis.metric = distance_metric_from_string(args.metric);
  config.analysis.with_iptw = true;

  json resolved{{"command", "simulate"},
                {"scenario_file", args.scenario},
                {"scenario", json::parse("{}")},
                {"replicates", args.reps},
                {"variance", args.variance},
                {"metric", args.metric}};
  resolved["scenario"] = {{"n", config.scenario.n},
                          {"beta_a", config.scenario.beta_a},
                          {"shape0", config.scenario.shape0},
                          {"shape1", config.scenario.shape1},
                          {"scale0", config.scenario.scale0},
                          {"scale1", config.scenario.scale1},
                          {"gamma", config.scenario.gamma},
                          {"tau", config.scenario.tau},
                          {"ps_intercept", config.scenario.ps_intercept},
                          {"seed", config.scenario.seed}};
  const std::string hash = config_hash(resolved.dump());

  const StudyResult study = run_study(config);

  const fs::path dir(args.out);
  fs::create_directories(dir);

  {
    auto out = open_output(dir / "replicates.csv", hash);
    out << "replicate,status,true_att,matched_estimate,matched_se,ci_low,ci_high,"
           "iptw_estimate,n_pairs,error\n";
    for (const auto& rec : study.replicates) {
      out << rec.id << ',' << (rec.ok ? "ok" : "failed") << ',';
      if (rec.ok)
        out << format_g(rec.true_att) << ',' << format_g(rec.matched_estimate) << ','
            << format_g(rec.matched_se) << ',' << format_g(rec.ci_low) << ','
            << format_g(rec.ci_high) << ',' << format_g(rec.iptw_estimate) << ','
            << rec.n_pairs << ',';
      else
        out << ",,,,,,," << rec.error;
      out << '\n';
    }
  }
  {
    auto out = open_output(dir / "summary.csv", hash);
    out << "method,n_replicates,n_failed,truth,mean_estimate,bias,bias_pct,cp,sem,see\n";
    auto row = [&](const char* name, const PerformanceSummary& s) {
      out << name << ',' << s.n_replicates << ',' << study.n_failed << ','
          << format_g(s.truth) << ',' << format_g(s.mean_estimate) << ',' << format_g(s.bias)
          << ',';
      if (std::isfinite(s.bias_pct)) out << format_g(s.bias_pct);
      out << ',';
      if (std::isfinite(s.coverage)) out << format_g(s.coverage);
      out << ',';
      if (std::isfinite(s.sem)) out << format_g(s.sem);
      out << ',' << format_g(s.see) << '\n';
    };
    row("matched_rmst", study.matched);
    row("iptw_km", study.iptw);
  }
  write_manifest(dir / "manifest.json", resolved, hash);

  std::printf("matched RMST: truth %.4f  bias %.4f", study.truth, study.matched.bias);
  if (std::isfinite(study.matched.bias_pct))
    std::printf(" (%.3f%%)", study.matched.bias_pct);
  std::printf("  CP %.3f  SEM %.4f  SEE %.4f  [%zu ok, %zu failed]\n", study.matched.coverage,
              study.matched.sem, study.matched.see, study.n_ok, study.n_failed);
  std::printf("iptw KM:      bias %.4f", study.iptw.bias);
  if (std::isfinite(study.iptw.bias_pct)) std::printf(" (%.3f%%)", study.iptw.bias_pct);
  std::printf("  SEE %.4f\n", study.iptw.see);
  return 0;
}

struct BalanceArgs {
  std::string data, schema, out;
  std::string metric = "logit";
};

int run_balance(const BalanceArgs& args) {
  json resolved{{"command", "balance"},
                {"data", args.data},
                {"schema", args.schema},
                {"metric", args.metric}};
  const std::string hash = config_hash(resolved.dump());

  const Dataset dataset = read_csv(args.data, CsvSchema::parse(args.schema));
  const PropensityFit fit = fit_logistic(dataset);
  const auto treated = dataset.treated_indices();
  const auto control = dataset.control_indices();
  std::vector<double> st, sc;
  for (auto i : treated) st.push_back(fit.scores[i]);
  for (auto i : control) sc.push_back(fit.scores[i]);
  const MatchedPairs pairs =
      optimal_pair_match(st, sc, distance_metric_from_string(args.metric));
  const auto table = standardized_mean_differences(dataset, &pairs);

  emit_balance_csv(args.out, table, hash);
  write_manifest(args.out + ".manifest.json", resolved, hash);
  std::cout << "max |SMD| after matching: " << format_g(max_abs_smd_after(table)) << " over "
            << table.size() << " covariates (" << pairs.n_pairs() << " pairs)\n";
  return 0;
}

struct SensitivityArgs {
  std::string result, out;
  std::optional<double> m1, m0;
  double rr_max = 3.0, mr_max = 3.0;
  std::size_t steps = 81;
};

int run_sensitivity(const SensitivityArgs& args) {
  double m1 = 0.0, m0 = 0.0;
  if (args.m1 && args.m0) {
    m1 = *args.m1;
    m0 = *args.m0;
  } else if (!args.result.empty()) {
    std::ifstream in(args.result);
    if (!in) throw validation_error("cannot open '" + args.result + "'");
    json doc;
    in >> doc;
    if (!doc.contains("rmst1") || !doc.contains("rmst0")) throw missing_means_error();
    m1 = doc["rmst1"].get<double>();
    m0 = doc["rmst0"].get<double>();
  } else {
    throw missing_means_error();
  }

  json resolved{{"command", "sensitivity"}, {"m1", m1},           {"m0", m0},
                {"rr_max", args.rr_max},    {"mr_max", args.mr_max}, {"steps", args.steps}};
  const std::string hash = config_hash(resolved.dump());

  const SensitivityGrid grid = sensitivity_grid(m1, m0, args.rr_max, args.mr_max, args.steps);

  const fs::path dir(args.out);
  fs::create_directories(dir);
  {
    auto out = open_output(dir / "grid.csv", hash);
    out << "rr_au,mr_uz,bound\n";
    for (std::size_t i = 0; i < grid.rr_values.size(); ++i)
      for (std::size_t j = 0; j < grid.mr_values.size(); ++j)
        out << format_g(grid.rr_values[i]) << ',' << format_g(grid.mr_values[j]) << ','
            << format_g(grid.at(i, j)) << '\n';
  }
  {
    auto out = open_output(dir / "zero_contour.csv", hash);
    out << "rr_au,mr_uz\n";
    for (const auto& [rr, mr] : grid.zero_contour)
      out << format_g(rr) << ',' << format_g(mr) << '\n';
  }
  write_manifest(dir / "manifest.json", resolved, hash);

  const char* dir_name =
      grid.direction == EffectDirection::positive ? "positive-effect-lower-bound"
                                                  : "negative-effect-upper-bound";
  std::cout << "sensitivity grid " << args.steps << "x" << args.steps << " (" << dir_name
            << "), zero contour has " << grid.zero_contour.size() << " points\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Propensity-score-matched RMST difference estimation with paired variance,\n"
               "IPTW comparator, E-value style sensitivity analysis, and a Monte Carlo\n"
               "simulation engine for censored survival data."};
  app.require_subcommand(1);

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "full matched-RMST analysis of a CSV dataset");
  analyze->add_option("--data", analyze_args.data, "input CSV")->required();
  analyze->add_option("--schema", analyze_args.schema,
                      "column remapping, e.g. id=ID,time=FUTIME,event=EVT,treat=SMOKER");
  analyze->add_option("--tau", analyze_args.tau, "truncation time")->required();
  analyze->add_option("--variance", analyze_args.variance, "murray|hosmer");
  analyze->add_option("--metric", analyze_args.metric, "logit|raw matching distance");
  analyze->add_option("--tail-pairing", analyze_args.tail_pairing,
                      "derived|as-printed covariance tail pairing");
  analyze->add_option("--balance-threshold", analyze_args.balance_threshold,
                      "max tolerated post-matching |SMD| (reporting convention)");
  analyze->add_flag("--force", analyze_args.force, "report even when balance fails");
  analyze->add_flag("--with-iptw", analyze_args.with_iptw, "also compute the IPTW comparator");
  analyze->add_option("--emit-pairs", analyze_args.emit_pairs, "write matched pairs CSV");
  analyze->add_option("--emit-balance", analyze_args.emit_balance, "write balance CSV");
  analyze->add_option("--emit-curves", analyze_args.emit_curves,
                      "write KM curves to PREFIX_{treated,control}.csv");
  analyze->add_option("--emit-ggrid", analyze_args.emit_ggrid, "write the G grid CSV");
  analyze->add_option("--out", analyze_args.out, "result JSON path")->required();

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo study of one scenario");
  simulate->add_option("--scenario", sim_args.scenario, "scenario key-value file")->required();
  simulate->add_option("--reps", sim_args.reps, "number of replicates");
  std::uint64_t seed_value = 0;
  auto* seed_opt = simulate->add_option("--seed", seed_value, "override the scenario seed");
  simulate->add_option("--threads", sim_args.threads, "worker threads (0 = all cores)");
  simulate->add_option("--variance", sim_args.variance, "murray|hosmer");
  simulate->add_option("--metric", sim_args.metric, "logit|raw matching distance");
  simulate->add_option("--out", sim_args.out, "output directory")->required();

  BalanceArgs balance_args;
  auto* balance = app.add_subcommand("balance", "covariate balance diagnostics");
  balance->add_option("--data", balance_args.data, "input CSV")->required();
  balance->add_option("--schema", balance_args.schema, "column remapping");
  balance->add_option("--metric", balance_args.metric, "logit|raw matching distance");
  balance->add_option("--out", balance_args.out, "balance CSV path")->required();

  SensitivityArgs sens_args;
  auto* sensitivity =
      app.add_subcommand("sensitivity", "unmeasured-confounding bounds for a result");
  sensitivity->add_option("--result", sens_args.result, "analyze result JSON");
  double m1v = 0.0, m0v = 0.0;
  auto* m1_opt = sensitivity->add_option("--m1", m1v, "treated-arm restricted mean");
  auto* m0_opt = sensitivity->add_option("--m0", m0v, "control-arm restricted mean");
  sensitivity->add_option("--rr-max", sens_args.rr_max, "grid limit for RR_AU");
  sensitivity->add_option("--mr-max", sens_args.mr_max, "grid limit for MR_UZ");
  sensitivity->add_option("--steps", sens_args.steps, "grid points per axis");
  sensitivity->add_option("--out", sens_args.out, "output directory")->required();

  try {
    app.parse(argc, argv);
    if (*seed_opt) sim_args.seed = seed_value;
    if (*m1_opt) sens_args.m1 = m1v;
    if (*m0_opt) sens_args.m0 = m0v;

    if (*analyze) return run_analyze(analyze_args);
    if (*simulate) return run_simulate(sim_args);
    if (*balance) return run_balance(balance_args);
    if (*sensitivity) return run_sensitivity(sens_args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitValidation;
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const numeric_error& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return 0;
}
