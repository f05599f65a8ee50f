#pragma once

#include "mmls/mmls.hpp"
#include "mmls/point_cloud.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mmls {

struct ResampleConfig {
  int enlarging_factor = 3;  // K; K^d points per input sample
  double sigma = 0.0;        // grid half-width; <= 0 selects estimate_sigma
  std::uint64_t seed = 0;
  bool skip_failures = false;
};

struct ResampleFailure {
  Index source = 0;
  Index grid = 0;
  std::string message;
};

struct ResampleResult {
  PointCloud points;  // carries provenance
  double sigma = 0.0;
  std::vector<ResampleFailure> failures;
  Index dropped() const noexcept { return static_cast<Index>(failures.size()); }
};

/// Grid half-width heuristic: for 100 seeded draws (with replacement) the
/// radius of the smallest ball about the draw holding C(k+d, k) samples,
/// the draw included; returns the largest.
double estimate_sigma(const PointCloud& cloud, int intrinsic_dim, int k, std::uint64_t seed);

/// Node coordinates of the K^d tangent grid on [-sigma, sigma]^d, axis 0 fastest.
/// K = 1 yields the origin.
Eigen::MatrixXd tangent_grid(int intrinsic_dim, int enlarging_factor, double sigma);

/// Densifies M^h: for each sample r_i, lay the tangent grid on its local frame,
/// lift each node to ambient space and project it. Output index is
/// i * K^d + j. Parallel over samples with deterministic ordering.
ResampleResult resample(const ManifoldMLS& projector, const ResampleConfig& config);
ResampleResult resample_serial(const ManifoldMLS& projector, const ResampleConfig& config);

}  // namespace mmls
