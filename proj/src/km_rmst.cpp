#include "rmstmatch/km_rmst.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rmstmatch/errors.hpp"

namespace rmstmatch {

namespace {

KmCurve build_curve(std::span<const double> time, std::span<const std::uint8_t> event,
                    std::span<const double> weight) {
  const std::size_t n = time.size();
  KmCurve curve;
  curve.n_subjects = n;
  if (n == 0) return curve;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return time[a] < time[b]; });

  curve.max_follow_up = time[order[n - 1]];

  double at_risk = 0.0;
  for (std::size_t i = 0; i < n; ++i) at_risk += weight.empty() ? 1.0 : weight[i];

  double surv = 1.0;
  std::size_t i = 0;
  while (i < n) {
    const double t = time[order[i]];
    double d = 0.0, leaving = 0.0;
    std::size_t j = i;
    while (j < n && time[order[j]] == t) {
      const double w = weight.empty() ? 1.0 : weight[order[j]];
      leaving += w;
      if (event[order[j]] == 1) d += w;
      ++j;
    }
    if (d > 0.0) {
      surv *= 1.0 - d / at_risk;
      if (surv < 0.0) surv = 0.0; // weighted rounding guard
      curve.event_times.push_back(t);
      curve.at_risk.push_back(at_risk);
      curve.events.push_back(d);
      curve.survival.push_back(surv);
    }
    at_risk -= leaving;
    i = j;
  }
  return curve;
}

} // namespace

KmCurve km_curve(std::span<const double> time, std::span<const std::uint8_t> event) {
  return build_curve(time, event, {});
}

KmCurve weighted_km_curve(std::span<const double> time, std::span<const std::uint8_t> event,
                          std::span<const double> weight) {
  return build_curve(time, event, weight);
}

double rmst(const KmCurve& curve, double tau) {
  if (tau > curve.max_follow_up) throw tau_beyond_follow_up_error(tau, curve.max_follow_up);
  double area = 0.0, prev_t = 0.0, prev_s = 1.0;
  for (std::size_t k = 0; k < curve.n_times(); ++k) {
    if (curve.event_times[k] >= tau) break;
    area += prev_s * (curve.event_times[k] - prev_t);
    prev_t = curve.event_times[k];
    prev_s = curve.survival[k];
  }
  return area + prev_s * (tau - prev_t);
}

double rmst_tail(const KmCurve& curve, double from, double tau) {
  if (from >= tau) return 0.0;
  double area = 0.0, prev_t = 0.0, prev_s = 1.0;
  for (std::size_t k = 0; k < curve.n_times(); ++k) {
    const double t = curve.event_times[k];
    if (t >= tau) break;
    if (t > from) area += prev_s * (t - std::max(prev_t, from));
    prev_t = t;
    prev_s = curve.survival[k];
  }
  return area + prev_s * (tau - std::max(prev_t, from));
}

double rmst_variance_hosmer(const KmCurve& curve, double tau) {
  if (tau > curve.max_follow_up) throw tau_beyond_follow_up_error(tau, curve.max_follow_up);
  double m = 0.0;
  std::size_t n_tau = 0;
  while (n_tau < curve.n_times() && curve.event_times[n_tau] < tau) m += curve.events[n_tau++];
  if (m < 2.0) throw too_few_events_error(static_cast<std::size_t>(m));

  double total = 0.0;
  for (std::size_t k = 0; k < n_tau; ++k) {
    const double yk = curve.at_risk[k];
    const double dk = curve.events[k];
    const double ak = rmst_tail(curve, curve.event_times[k], tau);
    if (yk <= dk) {
      if (ak > 0.0) return std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    total += dk * ak * ak / (yk * (yk - dk));
  }
  return m / (m - 1.0) * total;
}

} // namespace rmstmatch
