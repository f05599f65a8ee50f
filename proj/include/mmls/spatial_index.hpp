#pragma once

#include "mmls/point_cloud.hpp"

#include <Eigen/Core>

#include <utility>
#include <vector>

namespace mmls {

/// Selects between the kd-tree and the exhaustive scan it is tested against.
enum class SearchMode { kd_tree, brute_force };

struct Neighbor {
  Index index = 0;
  double distance = 0.0;
};

/// Static kd-tree over a point cloud. Splits on the widest axis at the median;
/// read-only after construction so concurrent queries are safe.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(const Eigen::MatrixXd& coords, Index leaf_size = 12);

  Index size() const noexcept { return coords_.cols(); }
  Index dim() const noexcept { return coords_.rows(); }

  /// All points with distance <= radius, sorted by index.
  std::vector<Index> radius_search(const Eigen::Ref<const Eigen::VectorXd>& query,
                                   double radius) const;

  /// The m nearest points sorted by (distance, index).
  std::vector<Neighbor> knn(const Eigen::Ref<const Eigen::VectorXd>& query, Index m) const;

  Neighbor nearest(const Eigen::Ref<const Eigen::VectorXd>& query) const;

 private:
  struct Node {
    Index begin = 0;
    Index end = 0;
    Index split_dim = -1;  // -1 marks a leaf
    double split_value = 0.0;
    Index left = -1;
    Index right = -1;
  };

  Index build(Index begin, Index end);
  double box_distance2(Index node, const double* q) const;
  void radius_recurse(Index node, const double* q, double r2, std::vector<Index>& out) const;
  void knn_recurse(Index node, const double* q, Index m, std::vector<std::pair<double, Index>>& heap) const;

  Eigen::MatrixXd coords_;
  std::vector<Index> order_;
  std::vector<Node> nodes_;
  std::vector<double> boxes_;  // per node: dim lower bounds then dim upper bounds
  Index leaf_size_ = 12;
};

std::vector<Index> brute_force_radius(const Eigen::MatrixXd& coords,
                                      const Eigen::Ref<const Eigen::VectorXd>& query,
                                      double radius);
std::vector<Neighbor> brute_force_knn(const Eigen::MatrixXd& coords,
                                      const Eigen::Ref<const Eigen::VectorXd>& query, Index m);

}  // namespace mmls
