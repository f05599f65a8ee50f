#include "doctest.h"
#include "test_support.hpp"

#include "mmls/error.hpp"
#include "mmls/geodesic.hpp"
#include "mmls/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>

using namespace mmls;
using mmls::testing::line_cloud;

namespace {

using EdgeSet = std::set<std::pair<Index, Index>>;

EdgeSet edges_of(const GeodesicGraph& g) {
  EdgeSet out;
  for (Index u = 0; u < g.node_count; ++u)
    for (const Edge& e : g.adjacency[static_cast<std::size_t>(u)]) out.emplace(u, e.target);
  return out;
}

EdgeSet brute_radius_edges(const PointCloud& c, double r) {
  EdgeSet out;
  for (Index i = 0; i < c.size(); ++i)
    for (Index j = 0; j < c.size(); ++j) {
      const double dist = (c.point(i) - c.point(j)).norm();
      if (i != j && dist <= r && dist >= 1e-12) out.emplace(i, j);
    }
  return out;
}

// Shortest simple path by exhaustive depth-first enumeration.
void enumerate(const GeodesicGraph& g, Index at, Index target, double length, std::vector<bool>& seen,
               double& best) {
  if (at == target) {
    best = std::min(best, length);
    return;
  }
  for (const Edge& e : g.adjacency[static_cast<std::size_t>(at)]) {
    if (seen[static_cast<std::size_t>(e.target)]) continue;
    seen[static_cast<std::size_t>(e.target)] = true;
    enumerate(g, e.target, target, length + e.length, seen, best);
    seen[static_cast<std::size_t>(e.target)] = false;
  }
}

double brute_shortest(const GeodesicGraph& g, Index s, Index t) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> seen(static_cast<std::size_t>(g.node_count), false);
  seen[static_cast<std::size_t>(s)] = true;
  enumerate(g, s, t, 0.0, seen, best);
  return best;
}

}  // namespace

TEST_CASE("radius rule on collinear points") {
  const auto g = build_graph(line_cloud({0.0, 1.0, 2.0}), ConnectionRule::radius(1.5));
  CHECK(edges_of(g) == EdgeSet{{0, 1}, {1, 0}, {1, 2}, {2, 1}});
  for (const auto& adj : g.adjacency)
    for (const Edge& e : adj) CHECK(e.length == doctest::Approx(1.0));
  CHECK(g.component_count == 1);
  CHECK(g.edge_count() == 2);
}

TEST_CASE("knn rule symmetrizes by union") {
  const auto g = build_graph(line_cloud({0.0, 1.0, 3.0}), ConnectionRule::knn(1));
  CHECK(edges_of(g) == EdgeSet{{0, 1}, {1, 0}, {1, 2}, {2, 1}});
}

TEST_CASE("isolated nodes and coincident pairs are recorded") {
  const auto g = build_graph(line_cloud({0.0, 0.5, 10.0}), ConnectionRule::radius(1.0));
  CHECK(g.isolated_count == 1);
  CHECK(g.component_count == 2);
  CHECK_FALSE(g.warnings.empty());
  CHECK_FALSE(dijkstra(g, 0, 2).reached);
  CHECK(std::isinf(dijkstra(g, 0, 2).length));

  const auto dup = build_graph(line_cloud({0.0, 0.0, 1.0}), ConnectionRule::radius(2.0));
  CHECK(dup.coincident_pairs == 1);
  for (const auto& adj : dup.adjacency)
    for (const Edge& e : adj) CHECK(e.length > 0.0);
}

TEST_CASE("radius and knn graphs equal exhaustive scans") {
  const auto [cloud, emb] = sample_sphere(2, 3, 1.0, 100, 17);
  for (double r : {0.2, 0.35, 0.6}) {
    const EdgeSet want = brute_radius_edges(cloud, r);
    CHECK(edges_of(build_graph(cloud, ConnectionRule::radius(r))) == want);
    CHECK(edges_of(build_graph(cloud, ConnectionRule::radius(r), SearchMode::brute_force)) == want);
    CHECK(edges_of(build_graph_serial(cloud, ConnectionRule::radius(r))) == want);
  }
  for (Index m : {1, 4, 9}) {
    EdgeSet want;
    for (Index i = 0; i < cloud.size(); ++i) {
      std::vector<std::pair<double, Index>> d;
      for (Index j = 0; j < cloud.size(); ++j)
        if (j != i) d.emplace_back((cloud.point(i) - cloud.point(j)).norm(), j);
      std::sort(d.begin(), d.end());
      for (Index t = 0; t < m; ++t) {
        want.emplace(i, d[static_cast<std::size_t>(t)].second);
        want.emplace(d[static_cast<std::size_t>(t)].second, i);
      }
    }
    CHECK(edges_of(build_graph(cloud, ConnectionRule::knn(m))) == want);
    CHECK(edges_of(build_graph_serial(cloud, ConnectionRule::knn(m))) == want);
  }
}

TEST_CASE("graph invariants: symmetry and Euclidean edge lengths") {
  const auto [cloud, emb] = sample_sphere(2, 5, 0.5, 150, 4);
  const auto g = build_graph(cloud, ConnectionRule::knn(6));
  for (Index u = 0; u < g.node_count; ++u)
    for (const Edge& e : g.adjacency[static_cast<std::size_t>(u)]) {
      CHECK(std::abs(e.length - (cloud.point(u) - cloud.point(e.target)).norm()) <= 1e-12);
      const auto& back = g.adjacency[static_cast<std::size_t>(e.target)];
      CHECK(std::any_of(back.begin(), back.end(), [&](const Edge& b) { return b.target == u && b.length == e.length; }));
    }
}

TEST_CASE("dijkstra basic cases") {
  const PointCloud tri = PointCloud::from_rows({{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}});
  GeodesicGraph g;
  g.node_count = 3;
  g.adjacency = {{{1, 1.0}, {2, 3.0}}, {{0, 1.0}, {2, 1.0}}, {{0, 3.0}, {1, 1.0}}};
  const auto p = dijkstra(g, 0, 2);
  CHECK(p.reached);
  CHECK(p.length == doctest::Approx(2.0));
  CHECK(p.nodes == std::vector<Index>{0, 1, 2});
  const auto self = dijkstra(g, 1, 1);
  CHECK(self.length == 0.0);
  CHECK(self.nodes == std::vector<Index>{1});
  CHECK_THROWS_AS(dijkstra(g, 0, 3), ValidationError);
  CHECK_THROWS_AS(dijkstra(g, -1, 0), ValidationError);
  (void)tri;
}

TEST_CASE("dijkstra equals path enumeration on small random graphs") {
  for (int s = 0; s < 20; ++s) {
    std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(s));
    const Index n = 4 + static_cast<Index>(rng() % 7);
    const PointCloud c = mmls::testing::uniform_cube(2, n, 50 + static_cast<std::uint64_t>(s));
    const auto g = build_graph(c, ConnectionRule::radius(0.55));
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b) {
        const auto p = dijkstra(g, a, b);
        const double want = brute_shortest(g, a, b);
        if (std::isinf(want)) {
          CHECK_FALSE(p.reached);
        } else {
          CHECK(p.length == doctest::Approx(want).epsilon(1e-12));
          double sum = 0.0;
          for (std::size_t t = 1; t < p.nodes.size(); ++t)
            sum += (c.point(p.nodes[t]) - c.point(p.nodes[t - 1])).norm();
          CHECK(std::abs(sum - p.length) <= 1e-10);
        }
      }
  }
}

TEST_CASE("graph metric properties") {
  const auto [cloud, emb] = sample_sphere(2, 3, 1.0, 120, 3);
  const auto sparse = build_graph(cloud, ConnectionRule::radius(0.4));
  const auto dense = build_graph(cloud, ConnectionRule::radius(0.6));
  const auto ds = dijkstra_distances(sparse, 0);
  const auto dd = dijkstra_distances(dense, 0);
  for (Index j = 0; j < cloud.size(); ++j) {
    const double eu = (cloud.point(0) - cloud.point(j)).norm();
    if (std::isfinite(ds[static_cast<std::size_t>(j)])) CHECK(ds[static_cast<std::size_t>(j)] >= eu - 1e-12);
    CHECK(dd[static_cast<std::size_t>(j)] <= ds[static_cast<std::size_t>(j)] + 1e-12);
    CHECK(dijkstra(dense, 0, j).length == doctest::Approx(dd[static_cast<std::size_t>(j)]).epsilon(1e-14));
  }

  // Reversing the node order leaves distances unchanged.
  PointCloud reversed(3, cloud.size());
  for (Index i = 0; i < cloud.size(); ++i) reversed.point(i) = cloud.point(cloud.size() - 1 - i);
  const auto rg = build_graph(reversed, ConnectionRule::radius(0.6));
  const auto rd = dijkstra_distances(rg, cloud.size() - 1);
  for (Index j = 0; j < cloud.size(); ++j)
    CHECK(rd[static_cast<std::size_t>(cloud.size() - 1 - j)] ==
          doctest::Approx(dd[static_cast<std::size_t>(j)]).epsilon(1e-12));
}

TEST_CASE("connection radius helpers") {
  const PointCloud line = line_cloud({0.0, 1.0, 2.0, 3.0, 10.0});
  CHECK(default_connection_radius(line) == doctest::Approx(2.2));
  const double r = connected_radius(line, 1.0);
  CHECK(r >= 7.0);
  CHECK(build_graph(line, ConnectionRule::radius(r)).component_count == 1);
  CHECK(build_graph(line, ConnectionRule::radius(r / 1.25)).component_count > 1);
  CHECK_THROWS_AS(default_connection_radius(line_cloud({1.0})), ValidationError);
  CHECK_THROWS_AS(build_graph(line, ConnectionRule::radius(-1.0)), ValidationError);
}

TEST_CASE("rmse percent") {
  const std::vector<double> t{1.0, 2.0, 3.0};
  CHECK(rmse_percent(t, t) == 0.0);
  CHECK(rmse_percent(std::vector<double>{1.1}, std::vector<double>{1.0}) == doctest::Approx(10.0));
  CHECK_THROWS_AS(rmse_percent(std::vector<double>{1.0}, t), ValidationError);
  CHECK_THROWS_AS(rmse_percent(std::vector<double>{}, std::vector<double>{}), ValidationError);
  CHECK_THROWS_AS(rmse_percent(std::vector<double>{1.0}, std::vector<double>{0.0}), ValidationError);
}

TEST_CASE("geodesic estimate on a flat square approaches the straight line") {
  PointCloud grid(2, 11 * 11);
  for (Index i = 0; i < 11; ++i)
    for (Index j = 0; j < 11; ++j) grid.point(i * 11 + j) << 0.1 * i, 0.1 * j;
  // Padding with a third, constant coordinate makes the square a surface in R^3.
  PointCloud square(3, grid.size());
  for (Index i = 0; i < grid.size(); ++i) square.point(i) << grid.point(i), 0.0;
  MMLSConfig cfg;
  cfg.intrinsic_dim = 2;
  cfg.k = 2;
  cfg.fill_distance = 0.1;
  const ManifoldMLS mls(square, cfg);
  ResampleConfig rc;
  rc.enlarging_factor = 9;
  rc.sigma = 0.1;
  rc.skip_failures = true;  // grid corners past the square's border are dropped
  const auto est = geodesic_estimate(mls, Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 1, 0), rc,
                                     ConnectionRule::radius(0.15));
  CHECK(est.length == doctest::Approx(std::sqrt(2.0)).epsilon(0.02));
  CHECK(est.length >= std::sqrt(2.0) - 1e-9);

  const auto same = geodesic_estimate(mls, Eigen::Vector3d(0.5, 0.5, 0), Eigen::Vector3d(0.5, 0.5, 0), rc,
                                      ConnectionRule::radius(0.15));
  CHECK(same.length == 0.0);

  const auto batch = geodesic_lengths(mls, square, {{0, 120}, {5, 5}}, rc, ConnectionRule::radius(0.15));
  CHECK(batch[0] == doctest::Approx(est.length).epsilon(1e-12));
  CHECK(batch[1] == 0.0);
}

TEST_CASE("geodesic estimate on a densified sphere") {
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(3, 0.5);
  const PointCloud pool = sample_sphere(2, 3, 0.5, 4000, 21, c).first;
  const PointCloud cloud = farthest_point_subsample(pool, 300, 2);
  const auto emb = sample_sphere(2, 3, 0.5, 1, 21, c).second;
  MMLSConfig cfg;
  cfg.intrinsic_dim = 2;
  cfg.k = 3;
  const ManifoldMLS mls(cloud, cfg);
  ResampleConfig rc;
  rc.enlarging_factor = 5;
  rc.skip_failures = true;
  const Eigen::Vector3d p1 = c + Eigen::Vector3d(0.5, 0, 0);
  const Eigen::Vector3d p2 = c + Eigen::Vector3d(0, 0.5, 0);
  const auto est = geodesic_estimate(mls, p1, p2, rc, ConnectionRule::knn(24));
  const double truth = sphere_geodesic_oracle(emb, p1, p2);
  CHECK(truth == doctest::Approx(std::numbers::pi / 4));
  CHECK(est.length >= 0.98 * truth);
  CHECK(est.length <= 1.05 * truth);
}

TEST_CASE("disconnected densified cloud is reported") {
  const PointCloud far = PointCloud::from_rows({{0, 0, 0}, {0.1, 0, 0}, {0.2, 0, 0}, {0.3, 0, 0}, {0.4, 0, 0},
                                                {5, 0, 0}, {5.1, 0, 0}, {5.2, 0, 0}, {5.3, 0, 0}, {5.4, 0, 0}});
  MMLSConfig cfg;
  cfg.intrinsic_dim = 1;
  cfg.k = 2;
  cfg.fill_distance = 0.1;
  const ManifoldMLS mls(far, cfg);
  ResampleConfig rc;
  rc.enlarging_factor = 3;
  rc.sigma = 0.05;
  CHECK_THROWS_WITH_AS(
      geodesic_estimate(mls, Eigen::Vector3d(0.2, 0, 0), Eigen::Vector3d(5.2, 0, 0), rc, ConnectionRule::knn(2)),
      doctest::Contains("disconnected"), NumericalError);
}
