#include "test_support.hpp"

#include <Eigen/Dense>

namespace mmls::testing {

Eigen::MatrixXd random_rotation(Index dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) m(i, j) = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

PointCloud tilted_plane_grid(Index per_side, double a, double b, double c) {
  PointCloud cloud(3, per_side * per_side);
  for (Index i = 0; i < per_side; ++i) {
    for (Index j = 0; j < per_side; ++j) {
      const double x = static_cast<double>(i) / static_cast<double>(per_side - 1);
      const double y = static_cast<double>(j) / static_cast<double>(per_side - 1);
      cloud.point(i * per_side + j) << x, y, a * x + b * y + c;
    }
  }
  return cloud;
}

double loglog_slope(const std::vector<double>& hs, const std::vector<double>& errors) {
  const auto n = static_cast<double>(hs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double x = std::log(hs[i]);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace mmls::testing
