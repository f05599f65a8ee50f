#include "mmls/spatial_index.hpp"

#include "mmls/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mmls {

namespace {

double squared_distance(const double* a, const double* b, Index dim) {
  double s = 0.0;
  for (Index k = 0; k < dim; ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

bool heap_less(const std::pair<double, Index>& a, const std::pair<double, Index>& b) {
  return a.first < b.first || (a.first == b.first && a.second < b.second);
}

}  // namespace

KdTree::KdTree(const Eigen::MatrixXd& coords, Index leaf_size)
    : coords_(coords), leaf_size_(std::max<Index>(1, leaf_size)) {
  order_.resize(static_cast<std::size_t>(coords_.cols()));
  std::iota(order_.begin(), order_.end(), Index{0});
  if (coords_.cols() > 0) {
    nodes_.reserve(static_cast<std::size_t>(2 * coords_.cols() / leaf_size_ + 2));
    build(0, coords_.cols());
  }
}

Index KdTree::build(Index begin, Index end) {
  const Index id = static_cast<Index>(nodes_.size());
  nodes_.push_back(Node{begin, end});

  const Index dim = coords_.rows();
  const auto box = static_cast<std::size_t>(2 * dim * id);
  boxes_.resize(box + static_cast<std::size_t>(2 * dim));
  Index best_dim = 0;
  double best_spread = -1.0;
  for (Index k = 0; k < dim; ++k) {
    double lo = coords_(k, order_[begin]);
    double hi = lo;
    for (Index i = begin + 1; i < end; ++i) {
      const double v = coords_(k, order_[i]);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    boxes_[box + static_cast<std::size_t>(k)] = lo;
    boxes_[box + static_cast<std::size_t>(dim + k)] = hi;
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      best_dim = k;
    }
  }
  if (end - begin <= leaf_size_) return id;
  if (best_spread <= 0.0) return id;  // all points identical: keep as leaf

  const Index mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](Index a, Index b) { return coords_(best_dim, a) < coords_(best_dim, b); });
  const double split = coords_(best_dim, order_[mid]);

  const Index left = build(begin, mid);
  const Index right = build(mid, end);
  Node& node = nodes_[static_cast<std::size_t>(id)];
  node.split_dim = best_dim;
  node.split_value = split;
  node.left = left;
  node.right = right;
  return id;
}

double KdTree::box_distance2(Index id, const double* q) const {
  const Index dim = coords_.rows();
  const double* lo = boxes_.data() + 2 * dim * id;
  const double* hi = lo + dim;
  double s = 0.0;
  for (Index k = 0; k < dim; ++k) {
    const double t = q[k] < lo[k] ? lo[k] - q[k] : (q[k] > hi[k] ? q[k] - hi[k] : 0.0);
    s += t * t;
  }
  return s;
}

void KdTree::radius_recurse(Index id, const double* q, double r2, std::vector<Index>& out) const {
  if (box_distance2(id, q) > r2) return;
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.split_dim < 0) {
    for (Index i = node.begin; i < node.end; ++i) {
      const Index p = order_[i];
      if (squared_distance(coords_.col(p).data(), q, coords_.rows()) <= r2) out.push_back(p);
    }
    return;
  }
  // Left holds values <= split, right holds values >= split.
  const double diff = q[node.split_dim] - node.split_value;
  const Index near = diff <= 0.0 ? node.left : node.right;
  const Index far = diff <= 0.0 ? node.right : node.left;
  radius_recurse(near, q, r2, out);
  radius_recurse(far, q, r2, out);
}

std::vector<Index> KdTree::radius_search(const Eigen::Ref<const Eigen::VectorXd>& query,
                                         double radius) const {
  if (query.size() != coords_.rows()) throw ValidationError("query dimension mismatch");
  std::vector<Index> out;
  if (nodes_.empty() || radius < 0.0) return out;
  const Eigen::VectorXd q = query;
  radius_recurse(0, q.data(), radius * radius, out);
  std::sort(out.begin(), out.end());
  return out;
}

void KdTree::knn_recurse(Index id, const double* q, Index m,
                         std::vector<std::pair<double, Index>>& heap) const {
  if (static_cast<Index>(heap.size()) >= m && box_distance2(id, q) > heap.front().first) return;
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.split_dim < 0) {
    for (Index i = node.begin; i < node.end; ++i) {
      const Index p = order_[i];
      const std::pair<double, Index> cand{squared_distance(coords_.col(p).data(), q, coords_.rows()), p};
      if (static_cast<Index>(heap.size()) < m) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), heap_less);
      } else if (heap_less(cand, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), heap_less);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), heap_less);
      }
    }
    return;
  }
  const double diff = q[node.split_dim] - node.split_value;
  const Index near = diff <= 0.0 ? node.left : node.right;
  const Index far = diff <= 0.0 ? node.right : node.left;
  knn_recurse(near, q, m, heap);
  knn_recurse(far, q, m, heap);
}

std::vector<Neighbor> KdTree::knn(const Eigen::Ref<const Eigen::VectorXd>& query, Index m) const {
  if (query.size() != coords_.rows()) throw ValidationError("query dimension mismatch");
  m = std::min(m, size());
  std::vector<std::pair<double, Index>> heap;
  if (m <= 0 || nodes_.empty()) return {};
  heap.reserve(static_cast<std::size_t>(m));
  const Eigen::VectorXd q = query;
  knn_recurse(0, q.data(), m, heap);
  std::sort(heap.begin(), heap.end(), heap_less);
  std::vector<Neighbor> out;
  out.reserve(heap.size());
  for (const auto& [d2, i] : heap) out.push_back({i, std::sqrt(d2)});
  return out;
}

Neighbor KdTree::nearest(const Eigen::Ref<const Eigen::VectorXd>& query) const {
  auto nn = knn(query, 1);
  if (nn.empty()) throw ValidationError("nearest-neighbor query on empty index");
  return nn.front();
}

std::vector<Index> brute_force_radius(const Eigen::MatrixXd& coords,
                                      const Eigen::Ref<const Eigen::VectorXd>& query, double radius) {
  std::vector<Index> out;
  const double r2 = radius * radius;
  for (Index i = 0; i < coords.cols(); ++i)
    if ((coords.col(i) - query).squaredNorm() <= r2) out.push_back(i);
  return out;
}

std::vector<Neighbor> brute_force_knn(const Eigen::MatrixXd& coords,
                                      const Eigen::Ref<const Eigen::VectorXd>& query, Index m) {
  std::vector<std::pair<double, Index>> all;
  all.reserve(static_cast<std::size_t>(coords.cols()));
  for (Index i = 0; i < coords.cols(); ++i) all.emplace_back((coords.col(i) - query).squaredNorm(), i);
  m = std::min<Index>(m, coords.cols());
  std::partial_sort(all.begin(), all.begin() + m, all.end(), heap_less);
  std::vector<Neighbor> out;
  for (Index i = 0; i < m; ++i) {
    const auto& [d2, idx] = all[static_cast<std::size_t>(i)];
    out.push_back({idx, std::sqrt(d2)});
  }
  return out;
}

}  // namespace mmls
