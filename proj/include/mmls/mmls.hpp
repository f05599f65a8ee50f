#pragma once

#include "mmls/mls_flat.hpp"
#include "mmls/point_cloud.hpp"
#include "mmls/spatial_index.hpp"
#include "mmls/weights.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace mmls {

struct MMLSConfig {
  int intrinsic_dim = 2;
  int k = 3;                  // polynomial degree is k - 1
  double roi_radius = 0.0;    // mu; <= 0 selects 10 * fill_distance
  double fill_distance = 0.0; // h; <= 0 means estimate from the cloud
  WeightProfile step1_profile = WeightProfile::bump();
  WeightProfile step2_profile = WeightProfile::bump();
  int step1_max_iters = 100;
  double step1_tol = 1e-10;   // relative to h
  double spectral_gap_tol = 1e-6;

  int degree() const noexcept { return k - 1; }
  double mu() const noexcept { return roi_radius > 0.0 ? roi_radius : 10.0 * fill_distance; }

  /// Throws ValidationError on bad dimensions or violated injectivity conditions.
  void validate() const;
};

/// Local coordinate system of the first step: origin q and an orthonormal
/// basis (D x d) of the subspace H, with the query r - q perpendicular to H.
struct LocalFrame {
  Eigen::VectorXd origin;
  Eigen::MatrixXd basis;
  Eigen::VectorXd anchor;
  double j1_value = 0.0;
  int iterations_used = 0;
  std::vector<double> j1_history;

  /// Coordinates of an ambient point in the frame.
  Eigen::VectorXd local_coords(const Eigen::Ref<const Eigen::VectorXd>& p) const {
    return basis.transpose() * (p - origin);
  }
  Eigen::VectorXd lift(const Eigen::Ref<const Eigen::VectorXd>& x) const { return origin + basis * x; }
};

/// Residuals of the four frame constraints.
struct FrameCheck {
  double orthonormality_error = 0.0;
  double perpendicularity_error = 0.0;  // max |<r - q, e_j>| / max(|r - q|, tiny)
  double anchor_distance = 0.0;         // |q - r|
  double nearest_sample_distance = 0.0;
  bool orthonormal = false;
  bool perpendicular = false;
  bool within_roi = false;
  bool near_samples = false;
  bool ok() const noexcept { return orthonormal && perpendicular && within_roi && near_samples; }
};

/// Manifold moving least-squares projection onto M^h built over a fixed cloud.
/// Holds the cloud and its spatial index; all queries are const and thread-safe.
class ManifoldMLS {
 public:
  ManifoldMLS(PointCloud cloud, MMLSConfig config);

  const PointCloud& cloud() const noexcept { return cloud_; }
  const MMLSConfig& config() const noexcept { return config_; }
  const KdTree& index() const noexcept { return index_; }

  /// Fixed-point iteration for (q, H): weighted PCA about q, then
  /// q <- c + P_H(r - c) with c the weighted mean. Enforces r - q perpendicular
  /// to H every iteration and throws if J1 increases.
  LocalFrame find_local_frame(const Eigen::Ref<const Eigen::VectorXd>& r) const;

  /// Weighted polynomial fit of the samples over their frame coordinates.
  VectorPolynomial fit_local_polynomial(const LocalFrame& frame) const;

  Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& r) const;

  /// Projects every column of queries; OpenMP parallel, ordered output.
  PointCloud project_batch(const PointCloud& queries) const;
  PointCloud project_batch_serial(const PointCloud& queries) const;

  FrameCheck check_frame(const LocalFrame& frame) const;

 private:
  PointCloud cloud_;
  MMLSConfig config_;
  KdTree index_;
};

/// Default h for a cloud without a supplied fill distance: 2 * separation radius.
double estimate_fill_distance(const PointCloud& cloud);

LocalFrame find_local_frame(const PointCloud& cloud, const Eigen::Ref<const Eigen::VectorXd>& r,
                            const MMLSConfig& config);
VectorPolynomial fit_local_polynomial(const PointCloud& cloud, const LocalFrame& frame,
                                      const MMLSConfig& config);
Eigen::VectorXd project(const PointCloud& cloud, const Eigen::Ref<const Eigen::VectorXd>& r,
                        const MMLSConfig& config);

}  // namespace mmls
