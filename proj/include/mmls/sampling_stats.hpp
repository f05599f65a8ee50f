#pragma once

#include "mmls/point_cloud.hpp"
#include "mmls/spatial_index.hpp"

namespace mmls {

/// Points closer than this (ambient units) are treated as coincident.
inline constexpr double kCoincidenceTolerance = 1e-12;

struct SamplingStats {
  double fill_distance_estimate = 0.0;
  double separation_radius = 0.0;
  double quasi_uniform_constant = 0.0;  // fill / separation
  Index sample_count = 0;
};

/// Half the minimum pairwise distance. Throws on fewer than two points or on
/// coincident samples.
double separation_radius(const PointCloud& cloud, SearchMode mode = SearchMode::kd_tree);

/// Largest distance from a reference point to its nearest cloud point. A lower
/// bound on the true fill distance when reference densely samples the domain.
double fill_distance_estimate(const PointCloud& cloud, const PointCloud& reference,
                              SearchMode mode = SearchMode::kd_tree);

SamplingStats sampling_stats(const PointCloud& cloud, const PointCloud& reference,
                             SearchMode mode = SearchMode::kd_tree);

/// Packing bound for (h, rho, delta) sets: the closed ball of radius q*h around
/// center holds at most rho*q^d points, rho = (3/delta)^d for delta < 2 and
/// 3^d otherwise. delta is the normalized separation 2*separation/h.
bool density_bound_check(const PointCloud& cloud, const Eigen::Ref<const Eigen::VectorXd>& center,
                         double q, double h, double delta, int intrinsic_dim);

/// Number of points in the closed ball used by density_bound_check.
Index density_ball_count(const PointCloud& cloud, const Eigen::Ref<const Eigen::VectorXd>& center,
                         double radius);

/// Median over points of the distance to the nearest other point.
double median_nn_distance(const PointCloud& cloud);

double density_bound(double q, double delta, int intrinsic_dim);

}  // namespace mmls
