#include "rmstmatch/paired_cov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rmstmatch/errors.hpp"

namespace rmstmatch {

PairedSample PairedSample::self_paired(std::span<const double> time,
                                       std::span<const std::uint8_t> event) {
  PairedSample s;
  s.time0.assign(time.begin(), time.end());
  s.time1 = s.time0;
  s.event0.assign(event.begin(), event.end());
  s.event1 = s.event0;
  return s;
}

namespace {

std::vector<double> distinct_event_times(const std::vector<double>& time,
                                         const std::vector<std::uint8_t>& event) {
  std::vector<double> grid;
  for (std::size_t k = 0; k < time.size(); ++k)
    if (event[k] == 1) grid.push_back(time[k]);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

// rank[k] = number of grid points <= value[k]; at risk at grid[a] iff rank > a
std::vector<std::size_t> grid_ranks(const std::vector<double>& grid,
                                    const std::vector<double>& values) {
  std::vector<std::size_t> ranks(values.size());
  for (std::size_t k = 0; k < values.size(); ++k)
    ranks[k] = static_cast<std::size_t>(
        std::upper_bound(grid.begin(), grid.end(), values[k]) - grid.begin());
  return ranks;
}

// suffix[b] = number of entries with rank >= b + 1, for b = 0..nv-1
void suffix_counts(const std::vector<double>& histogram, std::vector<double>& suffix) {
  const std::size_t nv = suffix.size();
  double run = 0.0;
  for (std::size_t b = nv; b-- > 0;) {
    run += histogram[b + 1];
    suffix[b] = run;
  }
}

} // namespace

GGrid estimate_g01(const PairedSample& sample) {
  const std::size_t n = sample.n_pairs();
  if (n < 2) throw validation_error("paired covariance needs at least 2 pairs");
  if (sample.time1.size() != n || sample.event0.size() != n || sample.event1.size() != n)
    throw validation_error("paired sample arrays have inconsistent lengths");

  GGrid grid;
  grid.n_pairs = n;
  grid.u_grid = distinct_event_times(sample.time0, sample.event0);
  grid.v_grid = distinct_event_times(sample.time1, sample.event1);
  const std::size_t nu = grid.u_grid.size(), nv = grid.v_grid.size();
  grid.g.assign(nu * nv, 0.0);
  grid.y01.assign(nu * nv, 0.0);
  if (nu == 0 || nv == 0) return grid;

  const auto r0 = grid_ranks(grid.u_grid, sample.time0);
  const auto r1 = grid_ranks(grid.v_grid, sample.time1);

  // per-arm at-risk and event counts on the grids
  grid.y0.assign(nu, 0.0);
  grid.y1.assign(nv, 0.0);
  std::vector<double> dn0(nu, 0.0), dn1(nv, 0.0);
  {
    std::vector<double> h0(nu + 1, 0.0), h1(nv + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      h0[r0[k]] += 1.0;
      h1[r1[k]] += 1.0;
      if (sample.event0[k]) dn0[r0[k] - 1] += 1.0; // event times sit on the grid
      if (sample.event1[k]) dn1[r1[k] - 1] += 1.0;
    }
    suffix_counts(h0, grid.y0);
    suffix_counts(h1, grid.y1);
  }

  // dN1|0(v|u): for each v, group-1 events at v among pairs with time0 >= u.
  // Built column-wise as full matrix via suffix counts over u ranks.
  std::vector<double> dn1g0(nu * nv, 0.0);
  {
    std::vector<double> h(nu + 1, 0.0), col(nu, 0.0);
    for (std::size_t b = 0; b < nv; ++b) {
      std::fill(h.begin(), h.end(), 0.0);
      bool any = false;
      for (std::size_t k = 0; k < n; ++k)
        if (sample.event1[k] && sample.time1[k] == grid.v_grid[b]) {
          h[r0[k]] += 1.0;
          any = true;
        }
      if (!any) continue;
      suffix_counts(h, col);
      for (std::size_t a = 0; a < nu; ++a) dn1g0[a * nv + b] = col[a];
    }
  }

  // pairs indexed by their group-0 event time (rows of the sweep)
  std::vector<std::vector<std::size_t>> row_events(nu);
  for (std::size_t k = 0; k < n; ++k)
    if (sample.event0[k]) row_events[r0[k] - 1].push_back(k);

  // sweep u descending, maintaining the histogram of v-ranks of pairs with
  // time0 >= u so Y01 rows are one suffix pass each
  std::vector<std::size_t> by_time0_desc(n);
  std::iota(by_time0_desc.begin(), by_time0_desc.end(), std::size_t{0});
  std::sort(by_time0_desc.begin(), by_time0_desc.end(), [&](std::size_t a, std::size_t b) {
    return sample.time0[a] > sample.time0[b];
  });

  std::vector<double> active_hist(nv + 1, 0.0);
  std::vector<double> y01_row(nv, 0.0), dn0g1_row(nv, 0.0);
  std::vector<double> row_hist(nv + 1, 0.0);
  std::size_t next_pair = 0;

  for (std::size_t a = nu; a-- > 0;) {
    const double u = grid.u_grid[a];
    while (next_pair < n && sample.time0[by_time0_desc[next_pair]] >= u) {
      active_hist[r1[by_time0_desc[next_pair]]] += 1.0;
      ++next_pair;
    }
    suffix_counts(active_hist, y01_row);

    // dN0|1(u|v): group-0 events exactly at u among pairs with time1 >= v
    std::fill(row_hist.begin(), row_hist.end(), 0.0);
    for (std::size_t k : row_events[a]) row_hist[r1[k]] += 1.0;
    suffix_counts(row_hist, dn0g1_row);

    // dN01(u,v): both-event pairs at exactly (u, v)
    std::fill(row_hist.begin(), row_hist.end(), 0.0); // reused as dn01 row
    for (std::size_t k : row_events[a])
      if (sample.event1[k]) row_hist[r1[k] - 1] += 1.0;

    const double y0u = grid.y0[a];
    const double dn0u = dn0[a];
    for (std::size_t b = 0; b < nv; ++b) {
      const double y01 = y01_row[b];
      grid.y01[a * nv + b] = y01;
      if (y01 == 0.0) continue;
      const double y1v = grid.y1[b];
      const double dn1v = dn1[b];
      const double bracket = row_hist[b] / y01
                             - dn0g1_row[b] * dn1v / (y01 * y1v)
                             - dn1g0[a * nv + b] * dn0u / (y01 * y0u)
                             + dn0u * dn1v / (y0u * y1v);
      grid.g[a * nv + b] = static_cast<double>(n) * (y01 / (y0u * y1v)) * bracket;
    }
  }
  return grid;
}

double murray_covariance(const PairedSample& sample, const KmCurve& curve0,
                         const KmCurve& curve1, double tau, TailPairing pairing) {
  const GGrid grid = estimate_g01(sample);
  const std::size_t nu = grid.u_grid.size(), nv = grid.v_grid.size();
  if (nu == 0 || nv == 0) return 0.0;

  std::vector<double> tail_u(nu), tail_v(nv);
  for (std::size_t a = 0; a < nu; ++a)
    tail_u[a] = pairing == TailPairing::derived ? rmst_tail(curve0, grid.u_grid[a], tau)
                                                : rmst_tail(curve1, grid.u_grid[a], tau);
  for (std::size_t b = 0; b < nv; ++b)
    tail_v[b] = pairing == TailPairing::derived ? rmst_tail(curve1, grid.v_grid[b], tau)
                                                : rmst_tail(curve0, grid.v_grid[b], tau);

  double total = 0.0;
  for (std::size_t a = 0; a < nu; ++a) {
    if (tail_u[a] == 0.0) continue;
    double row = 0.0;
    const double* g_row = grid.g.data() + a * nv;
    for (std::size_t b = 0; b < nv; ++b) row += tail_v[b] * g_row[b];
    total += tail_u[a] * row;
  }
  return total / static_cast<double>(sample.n_pairs());
}

double murray_marginal_variance(std::span<const double> time,
                                std::span<const std::uint8_t> event, const KmCurve& curve,
                                double tau) {
  const PairedSample self = PairedSample::self_paired(time, event);
  return murray_covariance(self, curve, curve, tau);
}

} // namespace rmstmatch
