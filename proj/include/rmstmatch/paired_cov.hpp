#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rmstmatch/km_rmst.hpp"

namespace rmstmatch {

// Matched pairs aligned by index k: (time0[k], event0[k]) is the group-0
// member, (time1[k], event1[k]) the group-1 member of pair k.
struct PairedSample {
  std::vector<double> time0, time1;
  std::vector<std::uint8_t> event0, event1;

  std::size_t n_pairs() const { return time0.size(); }

  // pairs each subject of one arm with itself; turns the covariance
  // machinery into a marginal-variance estimator
  static PairedSample self_paired(std::span<const double> time,
                                  std::span<const std::uint8_t> event);
};

// Estimate of the bivariate hazard-covariance kernel G_01(u,v) on the grid of
// distinct group-0 event times (u) by distinct group-1 event times (v), with
// the point-mass convention du = dv = 0:
//
//   G_01(u,v) = n * Y01/(Y0*Y1) * [ dN01/Y01 - dN0|1*dN1/(Y01*Y1)
//                                   - dN1|0*dN0/(Y01*Y0) + dN0*dN1/(Y0*Y1) ]
//
// where Y0(u), Y1(v) are per-arm at-risk counts, Y01(u,v) counts pairs with
// both members still at risk, dN0(u), dN1(v) are event counts, dN01(u,v)
// counts pairs with both events exactly at (u,v), and dN0|1(u|v), dN1|0(v|u)
// count one arm's events among pairs whose other arm is still at risk.
// Cells with Y01(u,v) = 0 are zero (every dN factor vanishes with them).
struct GGrid {
  std::vector<double> u_grid, v_grid;
  std::vector<double> g;   // row-major |u| x |v|
  std::vector<double> y01; // cached joint at-risk counts, same layout
  std::vector<double> y0, y1;
  std::size_t n_pairs = 0;

  double at(std::size_t a, std::size_t b) const { return g[a * v_grid.size() + b]; }
};

GGrid estimate_g01(const PairedSample& sample);

// The printed form of the covariance display pairs the group-0 tail integral
// with v and the group-1 tail with u; re-deriving the change of integration
// order from its first line pairs u with group 0 instead. The re-derived
// pairing is the default (validated against a paired-bootstrap oracle);
// `as_printed` evaluates the other order for comparison.
enum class TailPairing { derived, as_printed };

// Murray-style covariance between the two arms' RMST estimates:
//   cov = (1/n) * sum_u sum_v tail0(u) * tail1(v) * G01(u,v)
// with tail_j(s) = integral_s^tau S_j(t) dt. Curves must come from the same
// paired sample handed in here.
double murray_covariance(const PairedSample& sample, const KmCurve& curve0,
                         const KmCurve& curve1, double tau,
                         TailPairing pairing = TailPairing::derived);

// Marginal variance as the covariance of an arm with itself.
double murray_marginal_variance(std::span<const double> time,
                                std::span<const std::uint8_t> event, const KmCurve& curve,
                                double tau);

} // namespace rmstmatch
