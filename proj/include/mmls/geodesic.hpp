#pragma once

#include "mmls/point_cloud.hpp"
#include "mmls/resample.hpp"
#include "mmls/spatial_index.hpp"

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace mmls {

struct ConnectionRule {
  enum class Kind { radius, knn };
  Kind kind = Kind::radius;
  double parameter = 0.0;  // radius, or neighbor count for knn

  static ConnectionRule radius(double r) { return {Kind::radius, r}; }
  static ConnectionRule knn(Index m) { return {Kind::knn, static_cast<double>(m)}; }
};

struct Edge {
  Index target = 0;
  double length = 0.0;
};

/// Undirected proximity graph with Euclidean edge lengths. Adjacency lists are
/// sorted by neighbor index.
struct GeodesicGraph {
  Index node_count = 0;
  std::vector<std::vector<Edge>> adjacency;
  ConnectionRule rule;
  Index component_count = 0;
  Index isolated_count = 0;
  Index coincident_pairs = 0;  // pairs closer than kCoincidenceTolerance, left unconnected
  std::vector<std::string> warnings;

  Index edge_count() const;
};

struct PathResult {
  double length = std::numeric_limits<double>::infinity();
  std::vector<Index> nodes;
  bool reached = false;
};

GeodesicGraph build_graph(const PointCloud& cloud, ConnectionRule rule,
                          SearchMode mode = SearchMode::kd_tree);
GeodesicGraph build_graph_serial(const PointCloud& cloud, ConnectionRule rule);

/// Shortest path; unreachable targets report reached = false and infinite length.
PathResult dijkstra(const GeodesicGraph& graph, Index source, Index target);

/// Single-source distances to every node (infinity when unreachable).
std::vector<double> dijkstra_distances(const GeodesicGraph& graph, Index source);

/// 2.2 times the median nearest-neighbor distance of the cloud.
double default_connection_radius(const PointCloud& cloud, double factor = 2.2);

/// Smallest radius of the form base * growth^j (j >= 0) giving one connected
/// component.
double connected_radius(const PointCloud& cloud, double base, double growth = 1.25,
                        int max_steps = 40);

struct GeodesicEstimate {
  double length = 0.0;
  PathResult path;
  Eigen::VectorXd p1_projected;
  Eigen::VectorXd p2_projected;
  Index densified_size = 0;
};

/// Resample M^h, insert the projected endpoints and run Dijkstra between them.
/// A non-positive rule parameter selects the default radius rule.
GeodesicEstimate geodesic_estimate(const ManifoldMLS& projector,
                                   const Eigen::Ref<const Eigen::VectorXd>& p1,
                                   const Eigen::Ref<const Eigen::VectorXd>& p2,
                                   const ResampleConfig& rconfig, ConnectionRule rule);

/// Many endpoint pairs over one densified cloud. `pairs` index columns of
/// `endpoints`. Entries are NaN when an endpoint fails to project or the
/// pair is disconnected. A non-positive rule parameter selects the default
/// radius, grown until the densified cloud is connected.
std::vector<double> geodesic_lengths(const ManifoldMLS& projector, const PointCloud& endpoints,
                                     const std::vector<std::pair<Index, Index>>& pairs,
                                     const ResampleConfig& rconfig, ConnectionRule rule);

/// 100 * sqrt(mean squared error) / mean(truths).
double rmse_percent(std::span<const double> estimates, std::span<const double> truths);

}  // namespace mmls
