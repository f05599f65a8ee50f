#include "mmls/mmls.hpp"

#include "mmls/error.hpp"
#include "mmls/sampling_stats.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <exception>
#include <string>

namespace mmls {

namespace {

struct WeightedNeighbors {
  std::vector<Index> ids;
  std::vector<double> weights;
  double total = 0.0;
  Index active = 0;
};

WeightedNeighbors gather(const ManifoldMLS& mls, const Eigen::Ref<const Eigen::VectorXd>& at,
                         const WeightProfile& profile, double h) {
  WeightedNeighbors out;
  out.ids = mls.index().radius_search(at, profile.support_factor * h);
  out.weights.resize(out.ids.size());
  for (std::size_t i = 0; i < out.ids.size(); ++i) {
    const double w = profile((mls.cloud().point(out.ids[i]) - at).norm(), h);
    out.weights[i] = w;
    out.total += w;
    if (w > 0.0) ++out.active;
  }
  return out;
}

}  // namespace

void MMLSConfig::validate() const {
  if (intrinsic_dim < 1) throw ValidationError("intrinsic dimension must be at least 1");
  if (k < 1) throw ValidationError("approximation order k must be at least 1");
  if (!(fill_distance > 0.0)) throw ValidationError("fill distance h must be positive");
  if (!(mu() > 0.0)) throw ValidationError("region-of-interest radius must be positive");
  if (step1_max_iters < 1) throw ValidationError("step-1 iteration cap must be positive");
  if (!(step1_tol > 0.0)) throw ValidationError("step-1 tolerance must be positive");
  step1_profile.validate(k);
  step2_profile.validate(k);
}

double estimate_fill_distance(const PointCloud& cloud) { return 2.0 * separation_radius(cloud); }

ManifoldMLS::ManifoldMLS(PointCloud cloud, MMLSConfig config)
    : cloud_(std::move(cloud)), config_(std::move(config)) {
  if (cloud_.size() == 0) throw ValidationError("empty cloud");
  if (cloud_.dim() < config_.intrinsic_dim + 1)
    throw ValidationError("ambient dimension must exceed the intrinsic dimension");
  if (!(config_.fill_distance > 0.0)) config_.fill_distance = estimate_fill_distance(cloud_);
  config_.validate();
  index_ = KdTree(cloud_.coords());
}

LocalFrame ManifoldMLS::find_local_frame(const Eigen::Ref<const Eigen::VectorXd>& r) const {
  if (r.size() != cloud_.dim()) throw ValidationError("query dimension mismatch");
  const int d = config_.intrinsic_dim;
  const Index dim = cloud_.dim();
  const double h = config_.fill_distance;
  const auto& theta = config_.step1_profile;

  // J1(q, H) with the weights centered at q.
  const auto objective = [&](const Eigen::VectorXd& q, const Eigen::MatrixXd& basis) {
    const auto nb = gather(*this, q, theta, h);
    double j1 = 0.0;
    for (std::size_t i = 0; i < nb.ids.size(); ++i) {
      if (nb.weights[i] == 0.0) continue;
      const Eigen::VectorXd y = cloud_.point(nb.ids[i]) - q;
      j1 += nb.weights[i] * (y - basis * (basis.transpose() * y)).squaredNorm();
    }
    return j1;
  };

  auto initial = gather(*this, r, theta, h);
  if (initial.active < d + 1) throw NumericalError("sparse neighborhood");
  Eigen::VectorXd q = Eigen::VectorXd::Zero(dim);
  for (std::size_t i = 0; i < initial.ids.size(); ++i) q += initial.weights[i] * cloud_.point(initial.ids[i]);
  q /= initial.total;

  LocalFrame frame;
  frame.anchor = r;
  Eigen::MatrixXd cov(dim, dim);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;

  for (int iter = 1; iter <= config_.step1_max_iters; ++iter) {
    const auto nb = gather(*this, q, theta, h);
    if (nb.active < d + 1) throw NumericalError("sparse neighborhood");

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    Eigen::MatrixXd centered(dim, static_cast<Index>(nb.ids.size()));
    for (std::size_t i = 0; i < nb.ids.size(); ++i) {
      centered.col(static_cast<Index>(i)) = cloud_.point(nb.ids[i]) - q;
      mean += nb.weights[i] * cloud_.point(nb.ids[i]);
    }
    mean /= nb.total;
    const Eigen::Map<const Eigen::VectorXd> w(nb.weights.data(), static_cast<Index>(nb.weights.size()));
    cov.noalias() = centered * w.asDiagonal() * centered.transpose();

    eig.compute(cov);
    const auto& lambda = eig.eigenvalues();  // ascending
    if (lambda(dim - d) - lambda(dim - d - 1) < config_.spectral_gap_tol * lambda(dim - 1))
      throw NumericalError("ambiguous tangent dimension");
    const Eigen::MatrixXd basis = eig.eigenvectors().rightCols(d);

    // Fixed-point candidate; r - candidate is perpendicular to basis by construction.
    Eigen::VectorXd next = mean + basis * (basis.transpose() * (r - mean));
    double j1 = objective(next, basis);

    // Backtrack toward q inside the feasible slice r + H-perp until J1 stops rising.
    // Increases at rounding level count as no increase.
    const double previous = frame.j1_history.empty() ? 0.0 : frame.j1_history.back() * (1.0 + 1e-12);
    if (!frame.j1_history.empty() && j1 > previous) {
      bool accepted = false;
      for (int cut = 1; cut <= 10 && !accepted; ++cut) {
        const Eigen::VectorXd trial = q + std::ldexp(1.0, -cut) * (next - q) - r;
        const Eigen::VectorXd feasible = r + trial - basis * (basis.transpose() * trial);
        const double jt = objective(feasible, basis);
        if (jt <= previous) {
          next = feasible;
          j1 = jt;
          accepted = true;
        }
      }
      // No descent left along the update: the current frame is the minimizer we can reach.
      if (!accepted) return frame;
    }

    const double step = (next - q).norm();
    if ((next - r).norm() > config_.mu()) throw NumericalError("frame left the region of interest");
    if (index_.nearest(next).distance > h) throw NumericalError("frame drifted from samples");

    frame.origin = next;
    frame.basis = basis;
    frame.j1_value = j1;
    frame.iterations_used = iter;
    frame.j1_history.push_back(j1);

    if (step < config_.step1_tol * h) return frame;
    q = next;
  }
  throw NumericalError("step-1 non-convergence");
}

VectorPolynomial ManifoldMLS::fit_local_polynomial(const LocalFrame& frame) const {
  const double h = config_.fill_distance;
  const auto& theta = config_.step2_profile;
  const auto ids = index_.radius_search(frame.origin, theta.support_factor * h);
  const auto m = static_cast<Index>(ids.size());

  Eigen::MatrixXd offsets(frame.basis.cols(), m);
  Eigen::MatrixXd values(cloud_.dim(), m);
  std::vector<double> weights(ids.size());
  for (Index i = 0; i < m; ++i) {
    values.col(i) = cloud_.point(ids[static_cast<std::size_t>(i)]) - frame.origin;
    offsets.col(i) = frame.basis.transpose() * values.col(i);
    weights[static_cast<std::size_t>(i)] = theta(offsets.col(i).norm(), h);
  }
  MLSFit fit = fit_weighted_polynomial(offsets, values, weights, config_.degree(), h, ids);
  VectorPolynomial poly = std::move(fit.polynomial);
  poly.coefficients().row(0) += frame.origin.transpose();
  return poly;
}

Eigen::VectorXd ManifoldMLS::project(const Eigen::Ref<const Eigen::VectorXd>& r) const {
  const LocalFrame frame = find_local_frame(r);
  const VectorPolynomial poly = fit_local_polynomial(frame);
  return poly.coefficients().row(0).transpose();
}

PointCloud ManifoldMLS::project_batch_serial(const PointCloud& queries) const {
  PointCloud out(cloud_.dim(), queries.size());
  for (Index i = 0; i < queries.size(); ++i) out.point(i) = project(queries.point(i));
  return out;
}

PointCloud ManifoldMLS::project_batch(const PointCloud& queries) const {
  PointCloud out(cloud_.dim(), queries.size());
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(queries.size()));
#pragma omp parallel for schedule(dynamic, 16)
  for (Index i = 0; i < queries.size(); ++i) {
    try {
      out.point(i) = project(queries.point(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

FrameCheck ManifoldMLS::check_frame(const LocalFrame& frame) const {
  FrameCheck check;
  const Index d = frame.basis.cols();
  check.orthonormality_error =
      (frame.basis.transpose() * frame.basis - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
  check.orthonormal = check.orthonormality_error <= 1e-10;

  const Eigen::VectorXd offset = frame.anchor - frame.origin;
  check.anchor_distance = offset.norm();
  const double tangential = (frame.basis.transpose() * offset).cwiseAbs().maxCoeff();
  check.perpendicularity_error = check.anchor_distance > 0.0 ? tangential / check.anchor_distance : 0.0;
  // A vanishing offset is perpendicular to every subspace.
  check.perpendicular = check.anchor_distance <= 1e-14 * config_.fill_distance ||
                        tangential <= 1e-8 * check.anchor_distance;
  check.within_roi = check.anchor_distance <= config_.mu();
  check.nearest_sample_distance = index_.nearest(frame.origin).distance;
  check.near_samples = check.nearest_sample_distance <= config_.fill_distance;
  return check;
}

LocalFrame find_local_frame(const PointCloud& cloud, const Eigen::Ref<const Eigen::VectorXd>& r,
                            const MMLSConfig& config) {
  return ManifoldMLS(cloud, config).find_local_frame(r);
}

VectorPolynomial fit_local_polynomial(const PointCloud& cloud, const LocalFrame& frame,
                                      const MMLSConfig& config) {
  return ManifoldMLS(cloud, config).fit_local_polynomial(frame);
}

Eigen::VectorXd project(const PointCloud& cloud, const Eigen::Ref<const Eigen::VectorXd>& r,
                        const MMLSConfig& config) {
  return ManifoldMLS(cloud, config).project(r);
}

}  // namespace mmls
