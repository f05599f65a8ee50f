#include "mmls/weights.hpp"

#include "mmls/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mmls {

namespace {
constexpr double kWeightFlush = 1e-300;
}

WeightProfile WeightProfile::bump(double c1) {
  WeightProfile p;
  p.support_factor = c1;
  return p;
}

WeightProfile WeightProfile::interpolatory(double c1, double guard) {
  WeightProfile p;
  p.shape = WeightShape::interpolatory_singular;
  p.support_factor = c1;
  p.singularity_guard = guard;
  return p;
}

double WeightProfile::shape_function(double s) const noexcept {
  if (s >= support_factor) return 0.0;
  const double ratio = s / support_factor;
  const double value = std::exp(-s * s / (1.0 - ratio * ratio));
  return value < kWeightFlush ? 0.0 : value;
}

double WeightProfile::operator()(double t, double h) const {
  if (!(h > 0.0)) throw ValidationError("weight scale h must be positive");
  if (t < 0.0) throw ValidationError("weight argument must be non-negative");
  const double s = t / h;
  const double base = shape_function(s);
  if (shape == WeightShape::smooth_bump || base == 0.0) return base;
  const double guarded = std::max(s, singularity_guard);
  return base / (guarded * guarded);
}

double WeightProfile::floor_threshold() const noexcept {
  return floor_c3 > 0.0 ? floor_c3 : 0.5 * shape_function(floor_c2);
}

void WeightProfile::validate(int k) const {
  if (!(support_factor > 3.0))
    throw ValidationError("weight support factor c1 must exceed 3 (got " + std::to_string(support_factor) + ")");
  if (shape == WeightShape::interpolatory_singular && !(singularity_guard > 0.0))
    throw ValidationError("interpolatory weight needs a positive singularity guard");
  const double c3 = floor_threshold();
  if (!(c3 > 0.0) || !((*this)(floor_c2, 1.0) > c3))
    throw ValidationError("weight floor condition theta(c2 h) > c3 > 0 violated");
  if (smoothness_order < k)
    throw ValidationError("weight smoothness order below approximation order k");
}

double eval_weight(const WeightProfile& profile, double t, double h) { return profile(t, h); }

}  // namespace mmls
