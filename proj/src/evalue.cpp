#include "rmstmatch/evalue.hpp"

#include <cmath>

#include "rmstmatch/errors.hpp"

namespace rmstmatch {

double bounding_factor(const SensitivityParams& params) {
  if (!(params.rr_au >= 1.0)) throw param_below_one_error("RR_AU", params.rr_au);
  if (!(params.mr_uz >= 1.0)) throw param_below_one_error("MR_UZ", params.mr_uz);
  return params.rr_au * params.mr_uz / (params.rr_au + params.mr_uz - 1.0);
}

double effect_bound(double m1, double m0, double bf, EffectDirection direction) {
  if (m1 < 0.0) throw negative_mean_error(m1);
  if (m0 < 0.0) throw negative_mean_error(m0);
  if (!(bf >= 1.0)) throw param_below_one_error("bounding factor", bf);
  if (direction == EffectDirection::positive)
    return 0.5 * (1.0 + 1.0 / bf) * m1 - 0.5 * (1.0 + bf) * m0;
  return 0.5 * (1.0 + bf) * m1 - 0.5 * (1.0 + 1.0 / bf) * m0;
}

SensitivityGrid sensitivity_grid(double m1, double m0, double rr_max, double mr_max,
                                 std::size_t steps) {
  if (!(rr_max >= 1.0)) throw param_below_one_error("rr_max", rr_max);
  if (!(mr_max >= 1.0)) throw param_below_one_error("mr_max", mr_max);
  if (steps < 2) throw validation_error("sensitivity grid needs at least 2 steps per axis");

  SensitivityGrid grid;
  grid.direction = m1 >= m0 ? EffectDirection::positive : EffectDirection::negative;
  grid.rr_values.resize(steps);
  grid.mr_values.resize(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(steps - 1);
    grid.rr_values[i] = 1.0 + f * (rr_max - 1.0);
    grid.mr_values[i] = 1.0 + f * (mr_max - 1.0);
  }

  grid.bounds.resize(steps * steps);
  for (std::size_t i = 0; i < steps; ++i)
    for (std::size_t j = 0; j < steps; ++j) {
      const double bf = bounding_factor({grid.rr_values[i], grid.mr_values[j]});
      grid.bounds[i * steps + j] = effect_bound(m1, m0, bf, grid.direction);
    }

  // zero crossings along each fixed-rr row
  for (std::size_t i = 0; i < steps; ++i) {
    for (std::size_t j = 0; j + 1 < steps; ++j) {
      const double b0 = grid.at(i, j), b1 = grid.at(i, j + 1);
      if (b0 == 0.0) {
        grid.zero_contour.emplace_back(grid.rr_values[i], grid.mr_values[j]);
        break;
      }
      if ((b0 < 0.0 && b1 >= 0.0) || (b0 > 0.0 && b1 <= 0.0)) {
        const double f = b0 / (b0 - b1);
        const double mr = grid.mr_values[j] + f * (grid.mr_values[j + 1] - grid.mr_values[j]);
        grid.zero_contour.emplace_back(grid.rr_values[i], mr);
        break;
      }
    }
  }
  return grid;
}

} // namespace rmstmatch
