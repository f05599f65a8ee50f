#include "mmls/synthetic.hpp"

#include "mmls/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace mmls {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over the combined state
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Eigen::VectorXd SphereEmbedding::embed(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  return center + frame.transpose() * u;
}

std::pair<PointCloud, SphereEmbedding> sample_sphere(int d, int D, double R, Index n, std::uint64_t seed,
                                                     std::optional<Eigen::VectorXd> center) {
  if (d < 1) throw ValidationError("sphere dimension must be at least 1");
  if (D < d + 1) throw ValidationError("ambient dimension must be at least d + 1");
  if (!(R > 0.0)) throw ValidationError("sphere radius must be positive");
  if (n < 1) throw ValidationError("sample count must be positive");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SphereEmbedding emb;
  emb.intrinsic_dim = d;
  emb.ambient_dim = D;
  emb.radius = R;
  emb.seed = seed;
  emb.center = center ? *center : Eigen::VectorXd::Constant(D, 0.5);
  if (emb.center.size() != D) throw ValidationError("center dimension mismatch");

  Eigen::MatrixXd g(D, d + 1);
  for (Index j = 0; j < d + 1; ++j)
    for (Index i = 0; i < D; ++i) g(i, j) = gauss(rng);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() *
                            Eigen::MatrixXd::Identity(D, d + 1);
  emb.frame = q.transpose();

  PointCloud cloud(D, n);
  Eigen::VectorXd u(d + 1);
  for (Index i = 0; i < n; ++i) {
    double norm = 0.0;
    do {
      for (Index j = 0; j < d + 1; ++j) u(j) = gauss(rng);
      norm = u.norm();
    } while (norm < 1e-12);
    cloud.point(i) = emb.embed(u * (R / norm));
  }
  return {std::move(cloud), std::move(emb)};
}

double sphere_geodesic_oracle(const SphereEmbedding& embedding, const Eigen::Ref<const Eigen::VectorXd>& p1,
                              const Eigen::Ref<const Eigen::VectorXd>& p2) {
  const double R = embedding.radius;
  const Eigen::VectorXd a = p1 - embedding.center;
  const Eigen::VectorXd b = p2 - embedding.center;
  const auto on_sphere = [&](const Eigen::VectorXd& v) {
    // Off-sphere points include ones with a component outside the embedding frame.
    const Eigen::VectorXd in_frame = embedding.frame.transpose() * (embedding.frame * v);
    return std::abs(v.norm() - R) <= 1e-6 * R && (v - in_frame).norm() <= 1e-6 * R;
  };
  if (!on_sphere(a) || !on_sphere(b)) throw ValidationError("oracle point is off the sphere");
  const double c = std::clamp(a.dot(b) / (R * R), -1.0, 1.0);
  return R * std::acos(c);
}

PointCloud add_noise(const PointCloud& cloud, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw ValidationError("noise level must be non-negative");
  PointCloud out = cloud;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  for (Index i = 0; i < out.size(); ++i)
    for (Index j = 0; j < out.dim(); ++j) out.coords()(j, i) += gauss(rng);
  return out;
}

namespace {

Index fps_start(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return static_cast<Index>(std::uniform_int_distribution<std::uint64_t>(0, static_cast<std::uint64_t>(n - 1))(rng));
}

PointCloud gather_points(const PointCloud& cloud, const std::vector<Index>& picked) {
  PointCloud out(cloud.dim(), static_cast<Index>(picked.size()));
  for (std::size_t i = 0; i < picked.size(); ++i) out.point(static_cast<Index>(i)) = cloud.point(picked[i]);
  return out;
}

template <bool Parallel>
PointCloud fps_impl(const PointCloud& cloud, Index m, std::uint64_t seed) {
  const Index n = cloud.size();
  if (m > n) throw ValidationError("cannot subsample more points than the cloud holds");
  if (m <= 0) return PointCloud(cloud.dim(), 0);

  std::vector<Index> picked;
  picked.reserve(static_cast<std::size_t>(m));
  std::vector<double> dist(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  Index current = fps_start(n, seed);

  while (true) {
    picked.push_back(current);
    if (static_cast<Index>(picked.size()) == m) break;
    const auto p = cloud.point(current);
#pragma omp parallel for schedule(static) if (Parallel)
    for (Index i = 0; i < n; ++i) {
      const double d2 = (cloud.point(i) - p).squaredNorm();
      auto& slot = dist[static_cast<std::size_t>(i)];
      if (d2 < slot) slot = d2;
    }
    // Serial argmax keeps the lowest index on ties regardless of threading.
    Index best = 0;
    for (Index i = 1; i < n; ++i)
      if (dist[static_cast<std::size_t>(i)] > dist[static_cast<std::size_t>(best)]) best = i;
    current = best;
  }
  return gather_points(cloud, picked);
}

}  // namespace

PointCloud farthest_point_subsample(const PointCloud& cloud, Index m, std::uint64_t seed) {
  return fps_impl<true>(cloud, m, seed);
}

PointCloud farthest_point_subsample_serial(const PointCloud& cloud, Index m, std::uint64_t seed) {
  return fps_impl<false>(cloud, m, seed);
}

void write_embedding(const std::string& path, const SphereEmbedding& e) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "# sphere embedding sidecar\n" << std::setprecision(17);
  out << "intrinsic_dim " << e.intrinsic_dim << '\n';
  out << "ambient_dim " << e.ambient_dim << '\n';
  out << "radius " << e.radius << '\n';
  out << "seed " << e.seed << '\n';
  out << "center";
  for (Index i = 0; i < e.center.size(); ++i) out << ' ' << e.center(i);
  out << '\n';
  for (Index r = 0; r < e.frame.rows(); ++r) {
    out << "frame";
    for (Index c = 0; c < e.frame.cols(); ++c) out << ' ' << e.frame(r, c);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

SphereEmbedding read_embedding(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  SphereEmbedding e;
  std::vector<std::vector<double>> frame_rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "intrinsic_dim") {
      ss >> e.intrinsic_dim;
    } else if (key == "ambient_dim") {
      ss >> e.ambient_dim;
    } else if (key == "radius") {
      ss >> e.radius;
    } else if (key == "seed") {
      ss >> e.seed;
    } else if (key == "center" || key == "frame") {
      std::vector<double> v;
      double x = 0.0;
      while (ss >> x) v.push_back(x);
      if (key == "center") {
        e.center = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
      } else {
        frame_rows.push_back(std::move(v));
      }
    } else {
      throw IoError(path + ": unknown key '" + key + "'");
    }
    if (ss.fail() && !ss.eof()) throw IoError(path + ": malformed line '" + line + "'");
  }
  if (e.center.size() != e.ambient_dim || static_cast<int>(frame_rows.size()) != e.intrinsic_dim + 1)
    throw IoError(path + ": incomplete embedding sidecar");
  e.frame.resize(e.intrinsic_dim + 1, e.ambient_dim);
  for (Index r = 0; r < e.frame.rows(); ++r) {
    if (static_cast<int>(frame_rows[static_cast<std::size_t>(r)].size()) != e.ambient_dim)
      throw IoError(path + ": frame row has wrong length");
    for (Index c = 0; c < e.frame.cols(); ++c) e.frame(r, c) = frame_rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  return e;
}

}  // namespace mmls
