#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rmstmatch {

// Product-limit curve on the distinct event-time grid. at_risk/events are
// doubles so the same machinery serves the IPTW-weighted estimator.
struct KmCurve {
  std::vector<double> event_times; // t_k, strictly increasing, d_k >= 1
  std::vector<double> at_risk;     // Y_k just prior to t_k
  std::vector<double> events;      // d_k
  std::vector<double> survival;    // S(t_k) = prod_{l<=k} (1 - d_l/Y_l)
  std::size_t n_subjects = 0;
  double max_follow_up = 0.0;      // largest observed time, event or censored

  bool no_events() const { return event_times.empty(); }
  std::size_t n_times() const { return event_times.size(); }
};

// Kaplan-Meier estimate. At tied event/censoring times events are processed
// first (censored subjects at t remain in the risk set for t). A dataset with
// no events yields a valid flat curve with an empty grid.
KmCurve km_curve(std::span<const double> time, std::span<const std::uint8_t> event);

// Weighted product-limit estimate: weighted at-risk and event sums replace
// counts. Grid keeps every time with positive weighted event mass.
KmCurve weighted_km_curve(std::span<const double> time, std::span<const std::uint8_t> event,
                          std::span<const double> weight);

// integral_0^tau S(t) dt of the right-continuous step curve, S(0) = 1.
// Throws tau_beyond_follow_up when tau > max_follow_up.
double rmst(const KmCurve& curve, double tau);

// integral_from^tau S(t) dt; the A_k tail areas when `from` is a grid time.
double rmst_tail(const KmCurve& curve, double from, double tau);

// Hosmer-Lemeshow variance of the RMST:
//   m/(m-1) * sum_k d_k A_k^2 / (Y_k (Y_k - d_k)),  over event times < tau.
// Y_k == d_k terms are dropped when their tail area is zero (the curve hits
// zero there); a positive tail area alongside Y_k == d_k returns NaN.
// Throws too_few_events when fewer than 2 events precede tau.
double rmst_variance_hosmer(const KmCurve& curve, double tau);

} // namespace rmstmatch
