#include "mmls/resample.hpp"

#include "mmls/error.hpp"

#include <algorithm>
#include <exception>
#include <random>

namespace mmls {

double estimate_sigma(const PointCloud& cloud, int intrinsic_dim, int k, std::uint64_t seed) {
  const Index target = monomial_count(intrinsic_dim, k);  // C(k + d, k)
  if (cloud.size() < target)
    throw ValidationError("cloud smaller than C(k+d, k) = " + std::to_string(target));

  const KdTree tree(cloud.coords());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> pick(0, static_cast<std::uint64_t>(cloud.size() - 1));
  double sigma = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    const auto i = static_cast<Index>(pick(rng));
    // The draw itself is the first of the `target` points in the ball.
    const auto nn = tree.knn(cloud.point(i), target);
    sigma = std::max(sigma, nn.back().distance);
  }
  return sigma;
}

Eigen::MatrixXd tangent_grid(int intrinsic_dim, int enlarging_factor, double sigma) {
  if (enlarging_factor < 1) throw ValidationError("enlarging factor K must be at least 1");
  Index nodes = 1;
  for (int a = 0; a < intrinsic_dim; ++a) nodes *= enlarging_factor;
  Eigen::MatrixXd grid = Eigen::MatrixXd::Zero(intrinsic_dim, nodes);
  if (enlarging_factor == 1) return grid;
  const double step = 2.0 * sigma / (enlarging_factor - 1);
  for (Index j = 0; j < nodes; ++j) {
    Index rest = j;
    for (int a = 0; a < intrinsic_dim; ++a) {
      grid(a, j) = -sigma + step * static_cast<double>(rest % enlarging_factor);
      rest /= enlarging_factor;
    }
  }
  return grid;
}

namespace {

// Projects every grid node around sample i into out[i*K^d, (i+1)*K^d).
void resample_source(const ManifoldMLS& projector, const Eigen::MatrixXd& grid, Index i,
                     Eigen::MatrixXd& out, std::vector<std::string>& messages) {
  const Index nodes = grid.cols();
  LocalFrame frame;
  try {
    frame = projector.find_local_frame(projector.cloud().point(i));
  } catch (const Error& e) {
    for (Index j = 0; j < nodes; ++j) messages[static_cast<std::size_t>(i * nodes + j)] = e.what();
    return;
  }
  for (Index j = 0; j < nodes; ++j) {
    try {
      out.col(i * nodes + j) = projector.project(frame.lift(grid.col(j)));
    } catch (const Error& e) {
      messages[static_cast<std::size_t>(i * nodes + j)] = e.what();
    }
  }
}

template <bool Parallel>
ResampleResult resample_impl(const ManifoldMLS& projector, const ResampleConfig& config) {
  const auto& cloud = projector.cloud();
  const int d = projector.config().intrinsic_dim;

  ResampleResult result;
  result.sigma = config.sigma > 0.0 ? config.sigma
                                    : estimate_sigma(cloud, d, projector.config().k, config.seed);
  const Eigen::MatrixXd grid = tangent_grid(d, config.enlarging_factor, result.sigma);
  const Index nodes = grid.cols();
  const Index n = cloud.size();

  Eigen::MatrixXd raw(cloud.dim(), n * nodes);
  std::vector<std::string> messages(static_cast<std::size_t>(n * nodes));
#pragma omp parallel for schedule(dynamic, 1) if (Parallel)
  for (Index i = 0; i < n; ++i) resample_source(projector, grid, i, raw, messages);

  std::vector<Index> kept;
  kept.reserve(static_cast<std::size_t>(n * nodes));
  for (Index l = 0; l < n * nodes; ++l) {
    const auto& msg = messages[static_cast<std::size_t>(l)];
    if (msg.empty()) {
      kept.push_back(l);
      continue;
    }
    if (!config.skip_failures)
      throw NumericalError("projection failed for source " + std::to_string(l / nodes) + ", grid node " +
                           std::to_string(l % nodes) + ": " + msg);
    result.failures.push_back({l / nodes, l % nodes, msg});
  }

  result.points = PointCloud(cloud.dim(), static_cast<Index>(kept.size()));
  result.points.provenance.reserve(kept.size());
  for (std::size_t c = 0; c < kept.size(); ++c) {
    result.points.point(static_cast<Index>(c)) = raw.col(kept[c]);
    result.points.provenance.push_back({kept[c] / nodes, kept[c] % nodes});
  }
  return result;
}

}  // namespace

ResampleResult resample(const ManifoldMLS& projector, const ResampleConfig& config) {
  return resample_impl<true>(projector, config);
}

ResampleResult resample_serial(const ManifoldMLS& projector, const ResampleConfig& config) {
  return resample_impl<false>(projector, config);
}

}  // namespace mmls
