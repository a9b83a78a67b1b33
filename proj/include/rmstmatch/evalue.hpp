#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace rmstmatch {

// Strength of a hypothetical unmeasured confounder U: the maximal relative
// risk of treatment on U, and the maximal mean ratio of U on the restricted
// outcome. Both are >= 1 by construction.
struct SensitivityParams {
  double rr_au = 1.0;
  double mr_uz = 1.0;
};

// Bounding factor BF = rr*mr / (rr + mr - 1): the largest multiplicative
// distortion a confounder of this strength can induce (E-value calculus of
// Ding & VanderWeele). Symmetric, >= 1, monotone in each argument.
double bounding_factor(const SensitivityParams& params);

enum class EffectDirection { positive, negative };

// Bound on the true effect given nonnegative arm means m1 = E(Z|A=1),
// m0 = E(Z|A=0) (here: matched-arm RMSTs) and a bounding factor bf:
//   positive observed effect, lower bound:  (1 + 1/bf)/2 * m1 - (1 + bf)/2 * m0
//   negative observed effect, upper bound:  (1 + bf)/2 * m1 - (1 + 1/bf)/2 * m0
// At bf = 1 both reduce to the observed difference m1 - m0.
double effect_bound(double m1, double m0, double bf, EffectDirection direction);

struct SensitivityGrid {
  std::vector<double> rr_values, mr_values;
  std::vector<double> bounds; // row-major |rr| x |mr|
  // (rr, mr) points where the bound crosses zero, linearly interpolated
  // along each fixed-rr row
  std::vector<std::pair<double, double>> zero_contour;
  EffectDirection direction = EffectDirection::negative;

  double at(std::size_t i, std::size_t j) const { return bounds[i * mr_values.size() + j]; }
};

// Effect bound over [1, rr_max] x [1, mr_max] with `steps` points per axis;
// direction chosen by the sign of m1 - m0. Default grid 1..3 x 1..3, 81x81.
SensitivityGrid sensitivity_grid(double m1, double m0, double rr_max = 3.0, double mr_max = 3.0,
                                 std::size_t steps = 81);

} // namespace rmstmatch
