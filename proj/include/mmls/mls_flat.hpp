#pragma once

#include "mmls/point_cloud.hpp"
#include "mmls/weights.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace mmls {

/// Number of monomials of total degree <= degree in dim variables.
Index monomial_count(int dim, int degree);

/// Exponent table of all monomials with |alpha| <= degree in graded
/// lexicographic order: by total degree, then descending exponent of x_1, x_2, ...
std::vector<std::vector<int>> graded_lex_exponents(int dim, int degree);

/// Polynomial map R^d -> R^D in monomial basis over scaled inputs u = x / scale.
/// Row t of coefficients belongs to monomial t of graded_lex_exponents.
class VectorPolynomial {
 public:
  VectorPolynomial() = default;
  VectorPolynomial(int intrinsic_dim, int output_dim, int degree, double scale);

  int intrinsic_dim() const noexcept { return intrinsic_dim_; }
  int output_dim() const noexcept { return output_dim_; }
  int degree() const noexcept { return degree_; }
  double scale() const noexcept { return scale_; }

  const Eigen::MatrixXd& coefficients() const noexcept { return coefficients_; }
  Eigen::MatrixXd& coefficients() noexcept { return coefficients_; }
  const std::vector<std::vector<int>>& exponents() const noexcept { return exponents_; }

  /// Monomial values at x (unscaled), in coefficient row order.
  Eigen::VectorXd basis(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Derivative along direction at x, per unit ambient length.
  Eigen::VectorXd directional_derivative(const Eigen::Ref<const Eigen::VectorXd>& direction,
                                         const Eigen::Ref<const Eigen::VectorXd>& x) const;

 private:
  int intrinsic_dim_ = 0;
  int output_dim_ = 0;
  int degree_ = 0;
  double scale_ = 1.0;
  std::vector<std::vector<int>> exponents_;
  Eigen::MatrixXd coefficients_;
};

struct MLSFit {
  VectorPolynomial polynomial;
  Eigen::VectorXd center;
  std::vector<Index> neighbor_indices;
  double condition_estimate = 0.0;
  double effective_weight_sum = 0.0;
};

/// Relative singular-value cutoff below which a weighted design is rejected.
inline constexpr double kUnisolvencyCutoff = 1e-10;

/// Weighted least-squares polynomial fit over pre-offset sites. offsets is d x m
/// (site minus center, unscaled), values is D x m, weights has m entries.
/// Sites with zero weight are ignored. All D outputs share one factorization.
MLSFit fit_weighted_polynomial(const Eigen::Ref<const Eigen::MatrixXd>& offsets,
                               const Eigen::Ref<const Eigen::MatrixXd>& values,
                               std::span<const double> weights, int degree, double scale,
                               std::span<const Index> site_ids = {});

/// Moving least-squares fit at center. sites is a d-dimensional cloud, values
/// is D x m, weights are profile(|site - center|, h).
MLSFit mls_fit(const PointCloud& sites, const Eigen::Ref<const Eigen::MatrixXd>& values,
               const Eigen::Ref<const Eigen::VectorXd>& center, int degree,
               const WeightProfile& profile, double h);

/// Value of the fitted polynomial at center + offset.
Eigen::VectorXd mls_eval(const MLSFit& fit, const Eigen::Ref<const Eigen::VectorXd>& offset);

Eigen::VectorXd mls_directional_derivative(const MLSFit& fit,
                                           const Eigen::Ref<const Eigen::VectorXd>& direction,
                                           const Eigen::Ref<const Eigen::VectorXd>& offset);

}  // namespace mmls
