#include "mmls/geodesic.hpp"

#include "mmls/error.hpp"
#include "mmls/sampling_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace mmls {

Index GeodesicGraph::edge_count() const {
  Index total = 0;
  for (const auto& list : adjacency) total += static_cast<Index>(list.size());
  return total / 2;
}

namespace {

void validate_rule(const PointCloud& cloud, const ConnectionRule& rule) {
  if (cloud.empty()) throw ValidationError("cannot build a graph over an empty cloud");
  if (!(rule.parameter > 0.0)) throw ValidationError("connection rule parameter must be positive");
}

// Union of directed candidate lists, symmetrized, deduplicated and sorted.
GeodesicGraph finish_graph(const PointCloud& cloud, ConnectionRule rule,
                           std::vector<std::vector<Index>> candidates) {
  const Index n = cloud.size();
  GeodesicGraph g;
  g.node_count = n;
  g.rule = rule;
  std::vector<std::vector<Index>> sym(static_cast<std::size_t>(n));
  for (Index u = 0; u < n; ++u) {
    for (Index v : candidates[static_cast<std::size_t>(u)]) {
      if (v == u) continue;
      sym[static_cast<std::size_t>(u)].push_back(v);
      sym[static_cast<std::size_t>(v)].push_back(u);
    }
  }
  g.adjacency.resize(static_cast<std::size_t>(n));
  for (Index u = 0; u < n; ++u) {
    auto& list = sym[static_cast<std::size_t>(u)];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    for (Index v : list) {
      const double len = (cloud.point(u) - cloud.point(v)).norm();
      if (len < kCoincidenceTolerance) {
        if (u < v) ++g.coincident_pairs;
        continue;
      }
      g.adjacency[static_cast<std::size_t>(u)].push_back({v, len});
    }
  }

  // Connected components by iterative DFS.
  std::vector<Index> label(static_cast<std::size_t>(n), -1);
  std::vector<Index> stack;
  for (Index s = 0; s < n; ++s) {
    if (label[static_cast<std::size_t>(s)] >= 0) continue;
    const Index comp = g.component_count++;
    label[static_cast<std::size_t>(s)] = comp;
    stack.push_back(s);
    while (!stack.empty()) {
      const Index u = stack.back();
      stack.pop_back();
      for (const auto& e : g.adjacency[static_cast<std::size_t>(u)]) {
        if (label[static_cast<std::size_t>(e.target)] < 0) {
          label[static_cast<std::size_t>(e.target)] = comp;
          stack.push_back(e.target);
        }
      }
    }
    if (g.adjacency[static_cast<std::size_t>(s)].empty()) ++g.isolated_count;
  }
  if (g.isolated_count > 0)
    g.warnings.push_back(std::to_string(g.isolated_count) + " isolated nodes");
  if (g.coincident_pairs > 0)
    g.warnings.push_back(std::to_string(g.coincident_pairs) + " coincident pairs left unconnected");
  return g;
}

std::vector<Index> knn_candidates(const KdTree* tree, const PointCloud& cloud, Index u, Index m) {
  // m + 1 because the query point is its own nearest neighbor.
  const auto nn = tree ? tree->knn(cloud.point(u), m + 1) : brute_force_knn(cloud.coords(), cloud.point(u), m + 1);
  std::vector<Index> out;
  for (const auto& nb : nn)
    if (nb.index != u && static_cast<Index>(out.size()) < m) out.push_back(nb.index);
  return out;
}

template <bool Parallel>
GeodesicGraph build_impl(const PointCloud& cloud, ConnectionRule rule, SearchMode mode) {
  validate_rule(cloud, rule);
  const Index n = cloud.size();
  std::vector<std::vector<Index>> candidates(static_cast<std::size_t>(n));
  KdTree tree;
  if (mode == SearchMode::kd_tree) tree = KdTree(cloud.coords());
  const KdTree* tp = mode == SearchMode::kd_tree ? &tree : nullptr;

  if (rule.kind == ConnectionRule::Kind::radius) {
#pragma omp parallel for schedule(dynamic, 64) if (Parallel)
    for (Index u = 0; u < n; ++u) {
      auto hits = tp ? tp->radius_search(cloud.point(u), rule.parameter)
                     : brute_force_radius(cloud.coords(), cloud.point(u), rule.parameter);
      // Keep each pair once from its lower endpoint; symmetrization restores the rest.
      hits.erase(std::remove_if(hits.begin(), hits.end(), [u](Index v) { return v <= u; }), hits.end());
      candidates[static_cast<std::size_t>(u)] = std::move(hits);
    }
  } else {
    const auto m = static_cast<Index>(std::llround(rule.parameter));
    if (m < 1) throw ValidationError("knn rule needs at least one neighbor");
#pragma omp parallel for schedule(dynamic, 64) if (Parallel)
    for (Index u = 0; u < n; ++u) candidates[static_cast<std::size_t>(u)] = knn_candidates(tp, cloud, u, m);
  }
  return finish_graph(cloud, rule, std::move(candidates));
}

}  // namespace

GeodesicGraph build_graph(const PointCloud& cloud, ConnectionRule rule, SearchMode mode) {
  return build_impl<true>(cloud, rule, mode);
}

GeodesicGraph build_graph_serial(const PointCloud& cloud, ConnectionRule rule) {
  return build_impl<false>(cloud, rule, SearchMode::brute_force);
}

namespace {

struct Search {
  std::vector<double> dist;
  std::vector<Index> prev;
};

Search run_dijkstra(const GeodesicGraph& graph, Index source, Index stop_at) {
  const auto n = static_cast<std::size_t>(graph.node_count);
  Search s{std::vector<double>(n, std::numeric_limits<double>::infinity()), std::vector<Index>(n, -1)};
  using Item = std::pair<double, Index>;
  // Min-heap on (distance, node): equal distances settle the smaller index first.
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  std::vector<char> settled(n, 0);
  s.dist[static_cast<std::size_t>(source)] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    const auto [du, u] = heap.top();
    heap.pop();
    if (settled[static_cast<std::size_t>(u)]) continue;
    settled[static_cast<std::size_t>(u)] = 1;
    if (u == stop_at) break;
    for (const auto& e : graph.adjacency[static_cast<std::size_t>(u)]) {
      const double cand = du + e.length;
      auto& dv = s.dist[static_cast<std::size_t>(e.target)];
      if (cand < dv) {
        dv = cand;
        s.prev[static_cast<std::size_t>(e.target)] = u;
        heap.push({cand, e.target});
      }
    }
  }
  return s;
}

void check_index(const GeodesicGraph& graph, Index i) {
  if (i < 0 || i >= graph.node_count) throw ValidationError("node index out of range");
}

}  // namespace

PathResult dijkstra(const GeodesicGraph& graph, Index source, Index target) {
  check_index(graph, source);
  check_index(graph, target);
  const auto s = run_dijkstra(graph, source, target);
  PathResult result;
  const double len = s.dist[static_cast<std::size_t>(target)];
  if (!std::isfinite(len)) return result;
  result.reached = true;
  result.length = len;
  for (Index v = target; v != -1; v = s.prev[static_cast<std::size_t>(v)]) result.nodes.push_back(v);
  std::reverse(result.nodes.begin(), result.nodes.end());
  return result;
}

std::vector<double> dijkstra_distances(const GeodesicGraph& graph, Index source) {
  check_index(graph, source);
  return run_dijkstra(graph, source, -1).dist;
}

double default_connection_radius(const PointCloud& cloud, double factor) {
  if (cloud.size() < 2) throw ValidationError("connection radius needs at least two points");
  return factor * median_nn_distance(cloud);
}

double connected_radius(const PointCloud& cloud, double base, double growth, int max_steps) {
  if (!(base > 0.0) || !(growth > 1.0)) throw ValidationError("invalid connected-radius search");
  double r = base;
  for (int step = 0; step <= max_steps; ++step, r *= growth)
    if (build_graph(cloud, ConnectionRule::radius(r)).component_count == 1) return r;
  throw NumericalError("cloud stays disconnected up to radius " + std::to_string(r / growth));
}

GeodesicEstimate geodesic_estimate(const ManifoldMLS& projector, const Eigen::Ref<const Eigen::VectorXd>& p1,
                                   const Eigen::Ref<const Eigen::VectorXd>& p2, const ResampleConfig& rconfig,
                                   ConnectionRule rule) {
  GeodesicEstimate est;
  est.p1_projected = projector.project(p1);
  est.p2_projected = projector.project(p2);

  PointCloud dense = resample(projector, rconfig).points;
  est.densified_size = dense.size();
  if (!(rule.parameter > 0.0)) rule = ConnectionRule::radius(default_connection_radius(dense));

  // Reuse an existing node when a projected endpoint coincides with it.
  const KdTree tree(dense.coords());
  const auto insert = [&](const Eigen::VectorXd& p) {
    if (dense.size() > 0) {
      const auto nn = tree.nearest(p);
      if (nn.distance < kCoincidenceTolerance) return nn.index;
    }
    dense.append(p);
    return dense.size() - 1;
  };
  const Index a = insert(est.p1_projected);
  const Index b = (est.p2_projected - est.p1_projected).norm() < kCoincidenceTolerance ? a : insert(est.p2_projected);

  const auto graph = build_graph(dense, rule);
  est.path = dijkstra(graph, a, b);
  if (!est.path.reached)
    throw NumericalError("disconnected densified cloud - increase K or connection radius");
  est.length = est.path.length;
  return est;
}

std::vector<double> geodesic_lengths(const ManifoldMLS& projector, const PointCloud& endpoints,
                                     const std::vector<std::pair<Index, Index>>& pairs,
                                     const ResampleConfig& rconfig, ConnectionRule rule) {
  for (const auto& [a, b] : pairs)
    if (a < 0 || b < 0 || a >= endpoints.size() || b >= endpoints.size())
      throw ValidationError("pair index out of range");

  PointCloud dense = resample(projector, rconfig).points;
  if (dense.size() < 2) throw NumericalError("resampling left fewer than two points; try a larger h");

  const KdTree tree(dense.coords());
  const Index base = dense.size();
  std::vector<Index> node(static_cast<std::size_t>(endpoints.size()), -1);
  for (Index e = 0; e < endpoints.size(); ++e) {
    Eigen::VectorXd p;
    try {
      p = projector.project(endpoints.point(e));
    } catch (const Error&) {
      continue;
    }
    const auto nn = tree.nearest(p);
    if (nn.distance < kCoincidenceTolerance) {
      node[static_cast<std::size_t>(e)] = nn.index;
      continue;
    }
    for (Index j = base; j < dense.size(); ++j)
      if ((dense.point(j) - p).norm() < kCoincidenceTolerance) node[static_cast<std::size_t>(e)] = j;
    if (node[static_cast<std::size_t>(e)] < 0) {
      dense.append(p);
      node[static_cast<std::size_t>(e)] = dense.size() - 1;
    }
  }

  if (!(rule.parameter > 0.0))
    rule = ConnectionRule::radius(connected_radius(dense, default_connection_radius(dense)));
  const auto graph = build_graph(dense, rule);
  std::vector<double> out(pairs.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<std::vector<double>> from(static_cast<std::size_t>(dense.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Index a = node[static_cast<std::size_t>(pairs[i].first)];
    const Index b = node[static_cast<std::size_t>(pairs[i].second)];
    if (a < 0 || b < 0) continue;
    auto& dist = from[static_cast<std::size_t>(a)];
    if (dist.empty()) dist = dijkstra_distances(graph, a);
    if (std::isfinite(dist[static_cast<std::size_t>(b)])) out[i] = dist[static_cast<std::size_t>(b)];
  }
  return out;
}

double rmse_percent(std::span<const double> estimates, std::span<const double> truths) {
  if (estimates.size() != truths.size() || truths.empty())
    throw ValidationError("rmse needs equal nonzero-length inputs");
  double sq = 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const double e = estimates[i] - truths[i];
    sq += e * e;
    mean += truths[i];
  }
  mean /= static_cast<double>(truths.size());
  if (mean == 0.0) throw ValidationError("rmse undefined for zero mean truth");
  return 100.0 * std::sqrt(sq / static_cast<double>(truths.size())) / mean;
}

}  // namespace mmls
