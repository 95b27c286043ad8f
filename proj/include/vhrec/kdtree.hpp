#pragma once

#include <queue>

#include "vhrec/core.hpp"

namespace vhrec {

// Static 3D kd-tree over a copied point set; median split.
class KdTree {
 public:
  explicit KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
    if (points_.empty()) throw std::invalid_argument("KdTree: empty point set");
    order_.resize(points_.size());
    for (size_t i = 0; i < order_.size(); ++i) order_[i] = (int)i;
    nodes_.reserve(points_.size() * 2);
    root_ = build(0, (int)order_.size());
  }

  size_t size() const { return points_.size(); }
  const Vec3& point(int i) const { return points_[i]; }

  // Index of the nearest point and its squared distance.
  std::pair<int, double> nearest(const Vec3& q) const {
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    nearest_rec(root_, q, best, best_d2);
    return {best, best_d2};
  }

  // k nearest neighbors, ascending by distance. Returns (index, squared
  // distance) pairs; fewer than k if the set is smaller.
  std::vector<std::pair<int, double>> knearest(const Vec3& q, int k) const {
    std::priority_queue<std::pair<double, int>> heap;  // max-heap on distance
    knearest_rec(root_, q, k, heap);
    std::vector<std::pair<int, double>> out(heap.size());
    for (size_t i = heap.size(); i-- > 0;) {
      out[i] = {heap.top().second, heap.top().first};
      heap.pop();
    }
    return out;
  }

 private:
  struct Node {
    int left = -1, right = -1;
    int point = -1;
    int axis = 0;
  };

  int build(int begin, int end) {
    if (begin >= end) return -1;
    Aabb box;
    for (int i = begin; i < end; ++i) box.expand(points_[order_[i]]);
    const Vec3 e = box.extent();
    const int axis = e.x >= e.y ? (e.x >= e.z ? 0 : 2) : (e.y >= e.z ? 1 : 2);
    const int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
    const int node_index = (int)nodes_.size();
    nodes_.emplace_back();
    nodes_[node_index].point = order_[mid];
    nodes_[node_index].axis = axis;
    const int l = build(begin, mid);
    const int r = build(mid + 1, end);
    nodes_[node_index].left = l;
    nodes_[node_index].right = r;
    return node_index;
  }

  void nearest_rec(int node_index, const Vec3& q, int& best, double& best_d2) const {
    if (node_index < 0) return;
    const Node& node = nodes_[node_index];
    const Vec3& p = points_[node.point];
    const double d2 = norm_sq(q - p);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = node.point;
    }
    const double delta = q[node.axis] - p[node.axis];
    const int near = delta < 0 ? node.left : node.right;
    const int far = delta < 0 ? node.right : node.left;
    nearest_rec(near, q, best, best_d2);
    if (delta * delta < best_d2) nearest_rec(far, q, best, best_d2);
  }

  void knearest_rec(int node_index, const Vec3& q, int k,
                    std::priority_queue<std::pair<double, int>>& heap) const {
    if (node_index < 0) return;
    const Node& node = nodes_[node_index];
    const Vec3& p = points_[node.point];
    const double d2 = norm_sq(q - p);
    if ((int)heap.size() < k) {
      heap.emplace(d2, node.point);
    } else if (d2 < heap.top().first) {
      heap.pop();
      heap.emplace(d2, node.point);
    }
    const double delta = q[node.axis] - p[node.axis];
    const int near = delta < 0 ? node.left : node.right;
    const int far = delta < 0 ? node.right : node.left;
    knearest_rec(near, q, k, heap);
    if ((int)heap.size() < k || delta * delta < heap.top().first) knearest_rec(far, q, k, heap);
  }

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace vhrec
