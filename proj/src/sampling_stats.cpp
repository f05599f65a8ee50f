#include "mmls/sampling_stats.hpp"

#include "mmls/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace mmls {

double separation_radius(const PointCloud& cloud, SearchMode mode) {
  if (cloud.size() < 2) throw ValidationError("insufficient points");

  double min_dist = std::numeric_limits<double>::infinity();
  if (mode == SearchMode::brute_force) {
    for (Index i = 0; i < cloud.size(); ++i)
      for (Index j = i + 1; j < cloud.size(); ++j)
        min_dist = std::min(min_dist, (cloud.point(i) - cloud.point(j)).norm());
  } else {
    const KdTree tree(cloud.coords());
    for (Index i = 0; i < cloud.size(); ++i) {
      // The closest hit is the point itself (or a duplicate at distance zero).
      const auto nn = tree.knn(cloud.point(i), 2);
      min_dist = std::min(min_dist, nn[1].distance);
    }
  }
  if (min_dist < kCoincidenceTolerance) throw ValidationError("coincident samples");
  return 0.5 * min_dist;
}

double fill_distance_estimate(const PointCloud& cloud, const PointCloud& reference, SearchMode mode) {
  if (cloud.empty() || reference.empty()) throw ValidationError("fill distance needs nonempty clouds");
  if (cloud.dim() != reference.dim()) throw ValidationError("cloud and reference dimensions differ");

  double worst = 0.0;
  if (mode == SearchMode::brute_force) {
    for (Index r = 0; r < reference.size(); ++r) {
      double best = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < cloud.size(); ++i)
        best = std::min(best, (reference.point(r) - cloud.point(i)).norm());
      worst = std::max(worst, best);
    }
  } else {
    const KdTree tree(cloud.coords());
#pragma omp parallel for reduction(max : worst) schedule(static)
    for (Index r = 0; r < reference.size(); ++r)
      worst = std::max(worst, tree.nearest(reference.point(r)).distance);
  }
  return worst;
}

SamplingStats sampling_stats(const PointCloud& cloud, const PointCloud& reference, SearchMode mode) {
  SamplingStats stats;
  stats.sample_count = cloud.size();
  stats.separation_radius = separation_radius(cloud, mode);
  stats.fill_distance_estimate = fill_distance_estimate(cloud, reference, mode);
  stats.quasi_uniform_constant = stats.fill_distance_estimate / stats.separation_radius;
  return stats;
}

double median_nn_distance(const PointCloud& cloud) {
  if (cloud.size() < 2) throw ValidationError("insufficient points");
  const KdTree tree(cloud.coords());
  std::vector<double> nn(static_cast<std::size_t>(cloud.size()));
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < cloud.size(); ++i) nn[static_cast<std::size_t>(i)] = tree.knn(cloud.point(i), 2)[1].distance;
  const auto mid = nn.begin() + static_cast<std::ptrdiff_t>(nn.size() / 2);
  std::nth_element(nn.begin(), mid, nn.end());
  return *mid;
}

double density_bound(double q, double delta, int intrinsic_dim) {
  const double rho = delta < 2.0 ? std::pow(3.0 / delta, intrinsic_dim) : std::pow(3.0, intrinsic_dim);
  return rho * std::pow(q, intrinsic_dim);
}

Index density_ball_count(const PointCloud& cloud, const Eigen::Ref<const Eigen::VectorXd>& center,
                         double radius) {
  // Closed ball; the relative slack keeps lattice points on the sphere inside.
  const double r = radius * (1.0 + 1e-12);
  return static_cast<Index>(brute_force_radius(cloud.coords(), center, r).size());
}

bool density_bound_check(const PointCloud& cloud, const Eigen::Ref<const Eigen::VectorXd>& center,
                         double q, double h, double delta, int intrinsic_dim) {
  if (q < 1.0) throw ValidationError("density bound holds only for q >= 1");
  if (h <= 0.0 || delta <= 0.0) throw ValidationError("density bound needs h > 0 and delta > 0");
  if (intrinsic_dim < 1) throw ValidationError("intrinsic dimension must be positive");
  const auto count = density_ball_count(cloud, center, q * h);
  return static_cast<double>(count) <= density_bound(q, delta, intrinsic_dim) * (1.0 + 1e-12);
}

}  // namespace mmls
