#pragma once

#include <limits>

namespace mmls {

enum class WeightShape { smooth_bump, interpolatory_singular };

/// Compactly supported radial weight theta_h(t) = Phi(t/h), with
/// Phi(s) = exp(-s^2 / (1 - (s/c1)^2)) on [0, c1) and 0 beyond. The
/// interpolatory variant divides by max(s, guard)^2.
struct WeightProfile {
  static constexpr int kInfiniteSmoothness = std::numeric_limits<int>::max();

  WeightShape shape = WeightShape::smooth_bump;
  double support_factor = 3.5;  // c1
  int smoothness_order = kInfiniteSmoothness;
  double floor_c2 = 1.0;
  double floor_c3 = -1.0;  // negative selects the default Phi(c2)/2
  double singularity_guard = 1e-8;

  static WeightProfile bump(double c1 = 3.5);
  static WeightProfile interpolatory(double c1 = 3.5, double guard = 1e-8);

  /// Scale-free profile Phi(s).
  double shape_function(double s) const noexcept;

  /// theta_h(t). Throws on h <= 0 or t < 0.
  double operator()(double t, double h) const;

  double floor_threshold() const noexcept;

  /// Checks c1 > 3, the floor condition theta(c2 h) > c3 > 0, and that the
  /// smoothness order does not cap approximation order k.
  void validate(int k) const;
};

double eval_weight(const WeightProfile& profile, double t, double h);

}  // namespace mmls
