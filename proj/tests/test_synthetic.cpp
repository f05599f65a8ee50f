#include "doctest.h"
#include "test_support.hpp"

#include "mmls/error.hpp"
#include "mmls/sampling_stats.hpp"
#include "mmls/synthetic.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace mmls;

TEST_CASE("sphere samples lie on the sphere inside the unit cube") {
  const auto [cloud, emb] = sample_sphere(2, 20, 0.5, 500, 3);
  CHECK((emb.frame * emb.frame.transpose() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((emb.center - Eigen::VectorXd::Constant(20, 0.5)).norm() == 0.0);
  for (Index i = 0; i < cloud.size(); ++i) {
    CHECK(std::abs((cloud.point(i) - emb.center).norm() - 0.5) <= 1e-10);
    CHECK(cloud.point(i).minCoeff() >= -1e-10);
    CHECK(cloud.point(i).maxCoeff() <= 1.0 + 1e-10);
  }
  const auto circle = sample_sphere(1, 2, 1.0, 100, 4, Eigen::VectorXd(Eigen::VectorXd::Zero(2))).first;
  for (Index i = 0; i < circle.size(); ++i) CHECK(std::abs(circle.point(i).norm() - 1.0) <= 1e-10);
}

TEST_CASE("sphere samples are uniform on average and reproducible") {
  const auto [cloud, emb] = sample_sphere(2, 4, 1.0, 100000, 11);
  const Eigen::VectorXd mean = cloud.coords().rowwise().mean();
  CHECK((mean - emb.center).cwiseAbs().maxCoeff() <= 0.02);
  const auto again = sample_sphere(2, 4, 1.0, 100000, 11).first;
  CHECK(again.coords() == cloud.coords());
  CHECK_THROWS_AS(sample_sphere(2, 2, 1.0, 10, 1), ValidationError);
  CHECK_THROWS_AS(sample_sphere(2, 3, 0.0, 10, 1), ValidationError);
}

TEST_CASE("great-circle oracle") {
  const auto emb = sample_sphere(2, 6, 0.5, 1, 9).second;
  const Eigen::VectorXd a = emb.embed(Eigen::Vector3d(0.5, 0.0, 0.0));
  const Eigen::VectorXd b = emb.embed(Eigen::Vector3d(0.0, 0.5, 0.0));
  CHECK(sphere_geodesic_oracle(emb, a, a) == 0.0);
  CHECK(sphere_geodesic_oracle(emb, a, b) == doctest::Approx(std::numbers::pi / 4).epsilon(1e-14));

  // Arc length by quadrature along the slerp curve.
  const Eigen::Vector3d u = Eigen::Vector3d(0.3, -0.2, 0.9).normalized() * 0.5;
  const Eigen::Vector3d v = Eigen::Vector3d(-0.7, 0.1, 0.2).normalized() * 0.5;
  const double omega = std::acos(u.dot(v) / 0.25);
  const int steps = 20000;
  double arc = 0.0;
  Eigen::VectorXd prev = emb.embed(u);
  for (int s = 1; s <= steps; ++s) {
    const double t = static_cast<double>(s) / steps;
    const Eigen::Vector3d w = (std::sin((1 - t) * omega) * u + std::sin(t * omega) * v) / std::sin(omega);
    const Eigen::VectorXd cur = emb.embed(w);
    arc += (cur - prev).norm();
    prev = cur;
  }
  CHECK(std::abs(sphere_geodesic_oracle(emb, emb.embed(u), emb.embed(v)) - arc) <= 1e-8);

  // Invariant under an orthonormal change of the embedding.
  const Eigen::MatrixXd rot = mmls::testing::random_rotation(6, 2);
  SphereEmbedding moved = emb;
  moved.frame = emb.frame * rot.transpose();
  moved.center = rot * emb.center;
  CHECK(std::abs(sphere_geodesic_oracle(moved, rot * emb.embed(u), rot * emb.embed(v)) -
                 sphere_geodesic_oracle(emb, emb.embed(u), emb.embed(v))) <= 1e-10);

  CHECK_THROWS_AS(sphere_geodesic_oracle(emb, a * 1.1, b), ValidationError);
}

TEST_CASE("noise statistics") {
  const auto cloud = sample_sphere(2, 5, 1.0, 20000, 1).first;
  CHECK(add_noise(cloud, 0.0, 3).coords() == cloud.coords());
  const double sigma = 0.01;
  const auto noisy = add_noise(cloud, sigma, 3);
  CHECK(add_noise(cloud, sigma, 3).coords() == noisy.coords());
  const Eigen::MatrixXd eps = noisy.coords() - cloud.coords();
  const double n = static_cast<double>(eps.cols());
  for (Index r = 0; r < eps.rows(); ++r) {
    const double mean = eps.row(r).mean();
    const double var = (eps.row(r).array() - mean).square().sum() / (n - 1.0);
    CHECK(var == doctest::Approx(sigma * sigma).epsilon(0.03));
    CHECK(std::abs(mean) <= 4.0 * sigma / std::sqrt(n));
  }
  CHECK_THROWS_AS(add_noise(cloud, -1.0, 3), ValidationError);
}

TEST_CASE("farthest point subsampling") {
  const PointCloud seg = mmls::testing::line_cloud({0.0, 0.25, 0.5, 0.75, 1.0});
  const PointCloud two = farthest_point_subsample(seg, 2, 5);
  std::vector<double> xs{two.point(0)(0), two.point(1)(0)};
  std::sort(xs.begin(), xs.end());
  // Starting anywhere, the farthest point is an end; the next farthest is the other end
  // unless the start itself was an end.
  CHECK((xs == std::vector<double>{0.0, 1.0} || xs.front() == 0.0 || xs.back() == 1.0));

  const auto pool = sample_sphere(2, 3, 1.0, 600, 2).first;
  const PointCloud all = farthest_point_subsample(pool, pool.size(), 1);
  CHECK(all.size() == pool.size());
  std::vector<std::vector<double>> a, b;
  for (Index i = 0; i < pool.size(); ++i) {
    a.emplace_back(pool.point(i).data(), pool.point(i).data() + 3);
    b.emplace_back(all.point(i).data(), all.point(i).data() + 3);
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);

  const PointCloud sub = farthest_point_subsample(pool, 80, 3);
  CHECK(separation_radius(sub) >= 0.5 * fill_distance_estimate(sub, pool));
  CHECK(farthest_point_subsample_serial(pool, 80, 3).coords() == sub.coords());
  CHECK_THROWS_AS(farthest_point_subsample(pool, pool.size() + 1, 3), ValidationError);
}

TEST_CASE("embedding sidecar round trip") {
  const auto emb = sample_sphere(2, 7, 0.5, 1, 42).second;
  const auto path = std::filesystem::temp_directory_path() / "mmls_test_embedding.txt";
  write_embedding(path.string(), emb);
  const auto back = read_embedding(path.string());
  CHECK(back.intrinsic_dim == 2);
  CHECK(back.ambient_dim == 7);
  CHECK(back.radius == emb.radius);
  CHECK(back.seed == 42);
  CHECK(back.center == emb.center);
  CHECK(back.frame == emb.frame);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_embedding(path.string()), IoError);
}

TEST_CASE("seed derivation") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}
