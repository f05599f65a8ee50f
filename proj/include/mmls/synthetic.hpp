#pragma once

#include "mmls/point_cloud.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

namespace mmls {

/// A round d-sphere of radius R placed in R^D through an orthonormal row frame.
struct SphereEmbedding {
  int intrinsic_dim = 2;
  int ambient_dim = 3;
  double radius = 1.0;
  Eigen::VectorXd center;
  Eigen::MatrixXd frame;  // (d+1) x D, orthonormal rows
  std::uint64_t seed = 0;

  /// Maps a point of R^{d+1} into R^D: center + frame^T * u.
  Eigen::VectorXd embed(const Eigen::Ref<const Eigen::VectorXd>& u) const;
};

/// Uniform i.i.d. samples on S^d (normalized Gaussians) under a random
/// orthonormal frame, centered at (0.5, ..., 0.5) unless center is given.
std::pair<PointCloud, SphereEmbedding> sample_sphere(int d, int D, double R, Index n,
                                                     std::uint64_t seed,
                                                     std::optional<Eigen::VectorXd> center = {});

/// Great-circle distance between two points on the embedded sphere.
double sphere_geodesic_oracle(const SphereEmbedding& embedding,
                              const Eigen::Ref<const Eigen::VectorXd>& p1,
                              const Eigen::Ref<const Eigen::VectorXd>& p2);

/// Adds independent N(0, sigma^2) noise to every coordinate.
PointCloud add_noise(const PointCloud& cloud, double sigma, std::uint64_t seed);

/// Greedy farthest-point selection starting from a seeded random index.
PointCloud farthest_point_subsample(const PointCloud& cloud, Index m, std::uint64_t seed);
PointCloud farthest_point_subsample_serial(const PointCloud& cloud, Index m, std::uint64_t seed);

/// Text sidecar: header lines plus frame rows, center and radius.
void write_embedding(const std::string& path, const SphereEmbedding& embedding);
SphereEmbedding read_embedding(const std::string& path);

/// Deterministic stream splitter for per-realization seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace mmls
