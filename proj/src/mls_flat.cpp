#include "mmls/mls_flat.hpp"

#include "mmls/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numeric>

namespace mmls {

namespace {

// Appends all exponent vectors of total degree `remaining` over variables [var, dim),
// larger exponents of earlier variables first.
void emit_degree(int dim, int var, int remaining, std::vector<int>& current,
                 std::vector<std::vector<int>>& out) {
  if (var == dim - 1) {
    current[static_cast<std::size_t>(var)] = remaining;
    out.push_back(current);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[static_cast<std::size_t>(var)] = e;
    emit_degree(dim, var + 1, remaining - e, current, out);
  }
  current[static_cast<std::size_t>(var)] = 0;
}

}  // namespace

Index monomial_count(int dim, int degree) {
  // C(dim + degree, degree)
  Index c = 1;
  for (int i = 1; i <= degree; ++i) c = c * (dim + i) / i;
  return c;
}

std::vector<std::vector<int>> graded_lex_exponents(int dim, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> current(static_cast<std::size_t>(dim), 0);
  for (int total = 0; total <= degree; ++total) emit_degree(dim, 0, total, current, out);
  return out;
}

VectorPolynomial::VectorPolynomial(int intrinsic_dim, int output_dim, int degree, double scale)
    : intrinsic_dim_(intrinsic_dim),
      output_dim_(output_dim),
      degree_(degree),
      scale_(scale),
      exponents_(graded_lex_exponents(intrinsic_dim, degree)),
      coefficients_(Eigen::MatrixXd::Zero(static_cast<Index>(exponents_.size()), output_dim)) {
  if (intrinsic_dim < 1 || output_dim < 1 || degree < 0 || !(scale > 0.0))
    throw ValidationError("invalid polynomial shape");
}

Eigen::VectorXd VectorPolynomial::basis(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Index terms = static_cast<Index>(exponents_.size());
  Eigen::VectorXd values(terms);
  for (Index t = 0; t < terms; ++t) {
    double v = 1.0;
    const auto& alpha = exponents_[static_cast<std::size_t>(t)];
    for (int j = 0; j < intrinsic_dim_; ++j)
      for (int p = 0; p < alpha[static_cast<std::size_t>(j)]; ++p) v *= x(j) / scale_;
    values(t) = v;
  }
  return values;
}

Eigen::VectorXd VectorPolynomial::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != intrinsic_dim_) throw ValidationError("polynomial argument has wrong dimension");
  return coefficients_.transpose() * basis(x);
}

Eigen::VectorXd VectorPolynomial::directional_derivative(
    const Eigen::Ref<const Eigen::VectorXd>& direction, const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (direction.size() != intrinsic_dim_ || x.size() != intrinsic_dim_)
    throw ValidationError("derivative arguments have wrong dimension");
  if (direction.norm() == 0.0) throw ValidationError("zero derivative direction");

  const Eigen::VectorXd u = x / scale_;
  const Index terms = static_cast<Index>(exponents_.size());
  Eigen::VectorXd dbasis = Eigen::VectorXd::Zero(terms);
  for (Index t = 0; t < terms; ++t) {
    const auto& alpha = exponents_[static_cast<std::size_t>(t)];
    for (int j = 0; j < intrinsic_dim_; ++j) {
      const int aj = alpha[static_cast<std::size_t>(j)];
      if (aj == 0 || direction(j) == 0.0) continue;
      double v = aj * direction(j);
      for (int i = 0; i < intrinsic_dim_; ++i) {
        const int e = alpha[static_cast<std::size_t>(i)] - (i == j ? 1 : 0);
        for (int p = 0; p < e; ++p) v *= u(i);
      }
      dbasis(t) += v;
    }
  }
  return coefficients_.transpose() * dbasis / scale_;
}

MLSFit fit_weighted_polynomial(const Eigen::Ref<const Eigen::MatrixXd>& offsets,
                               const Eigen::Ref<const Eigen::MatrixXd>& values,
                               std::span<const double> weights, int degree, double scale,
                               std::span<const Index> site_ids) {
  const Index m = offsets.cols();
  const int d = static_cast<int>(offsets.rows());
  const int out_dim = static_cast<int>(values.rows());
  if (values.cols() != m || static_cast<Index>(weights.size()) != m)
    throw ValidationError("sites, values and weights disagree in count");
  if (!site_ids.empty() && static_cast<Index>(site_ids.size()) != m)
    throw ValidationError("site id count mismatch");

  MLSFit fit;
  fit.polynomial = VectorPolynomial(d, out_dim, degree, scale);
  fit.center = Eigen::VectorXd::Zero(d);

  std::vector<Index> active;
  double weight_sum = 0.0;
  for (Index i = 0; i < m; ++i) {
    const double w = weights[static_cast<std::size_t>(i)];
    if (w > 0.0) {
      active.push_back(i);
      weight_sum += w;
    }
  }
  if (active.empty() || !(weight_sum > 0.0)) throw NumericalError("empty support");
  fit.effective_weight_sum = weight_sum;

  const Index terms = monomial_count(d, degree);
  if (static_cast<Index>(active.size()) < terms)
    throw NumericalError("unisolvency failure: " + std::to_string(active.size()) +
                         " weighted sites for " + std::to_string(terms) + " monomials");

  // Row-scaled design sqrt(W) V and targets sqrt(W) F^T; normalizing weights by
  // their maximum keeps interpolatory weights representable.
  double w_max = 0.0;
  for (Index i : active) w_max = std::max(w_max, weights[static_cast<std::size_t>(i)]);
  const Index rows = static_cast<Index>(active.size());
  Eigen::MatrixXd design(rows, terms);
  Eigen::MatrixXd rhs(rows, out_dim);
  for (Index r = 0; r < rows; ++r) {
    const Index i = active[static_cast<std::size_t>(r)];
    const double sw = std::sqrt(weights[static_cast<std::size_t>(i)] / w_max);
    design.row(r) = sw * fit.polynomial.basis(offsets.col(i)).transpose();
    rhs.row(r) = sw * values.col(i).transpose();
    fit.neighbor_indices.push_back(site_ids.empty() ? i : site_ids[static_cast<std::size_t>(i)]);
  }

  // QR reduces to a terms x terms triangle whose SVD carries the design's
  // singular values.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::MatrixXd r_factor = qr.matrixQR().topRows(terms).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r_factor, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double s_max = sv(0);
  const double s_min = sv(terms - 1);
  if (!(s_max > 0.0) || s_min < kUnisolvencyCutoff * s_max)
    throw NumericalError("unisolvency failure: singular-value ratio " +
                         std::to_string(s_max > 0.0 ? s_min / s_max : 0.0));
  fit.condition_estimate = s_max / s_min;

  const Eigen::MatrixXd qt_rhs = (qr.householderQ().transpose() * rhs).topRows(terms);
  fit.polynomial.coefficients() =
      svd.matrixV() * (sv.cwiseInverse().asDiagonal() * (svd.matrixU().transpose() * qt_rhs));
  return fit;
}

MLSFit mls_fit(const PointCloud& sites, const Eigen::Ref<const Eigen::MatrixXd>& values,
               const Eigen::Ref<const Eigen::VectorXd>& center, int degree,
               const WeightProfile& profile, double h) {
  if (sites.size() != values.cols()) throw ValidationError("site and value counts differ");
  if (center.size() != sites.dim()) throw ValidationError("center dimension mismatch");
  if (!(h > 0.0)) throw ValidationError("h must be positive");

  const Eigen::MatrixXd offsets = sites.coords().colwise() - center;
  std::vector<double> weights(static_cast<std::size_t>(sites.size()));
  for (Index i = 0; i < sites.size(); ++i)
    weights[static_cast<std::size_t>(i)] = profile(offsets.col(i).norm(), h);

  MLSFit fit = fit_weighted_polynomial(offsets, values, weights, degree, h);
  fit.center = center;
  return fit;
}

Eigen::VectorXd mls_eval(const MLSFit& fit, const Eigen::Ref<const Eigen::VectorXd>& offset) {
  return fit.polynomial.evaluate(offset);
}

Eigen::VectorXd mls_directional_derivative(const MLSFit& fit,
                                           const Eigen::Ref<const Eigen::VectorXd>& direction,
                                           const Eigen::Ref<const Eigen::VectorXd>& offset) {
  return fit.polynomial.directional_derivative(direction, offset);
}

}  // namespace mmls
