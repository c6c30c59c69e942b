#include "spacl/knn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <thread>

namespace spacl::detail {

namespace {

// (squared distance, index) with the lower index winning distance ties.
using Cand = std::pair<double, Index>;

struct TopR {
  std::vector<Cand> heap;  // max-heap on Cand ordering
  size_t r;
  explicit TopR(int r_) : r(static_cast<size_t>(r_)) { heap.reserve(r); }
  double worst() const {
    return heap.size() < r ? std::numeric_limits<double>::infinity() : heap.front().first;
  }
  void offer(double d2, Index idx) {
    Cand c{d2, idx};
    if (heap.size() < r) {
      heap.push_back(c);
      std::push_heap(heap.begin(), heap.end());
    } else if (c < heap.front()) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = c;
      std::push_heap(heap.begin(), heap.end());
    }
  }
  double mean_distance() const {
    double s = 0.0;
    for (const auto& [d2, idx] : heap) s += std::sqrt(std::max(0.0, d2));
    return s / static_cast<double>(heap.size());
  }
};

class KDTree {
 public:
  KDTree(const Matrix& pts) : pts_(pts), dim_(static_cast<int>(pts.cols())) {
    ids_.resize(static_cast<size_t>(pts.rows()));
    std::iota(ids_.begin(), ids_.end(), Index{0});
    nodes_.reserve(2 * ids_.size() / kLeafSize + 2);
    root_ = build(0, static_cast<Index>(ids_.size()));
  }

  void query(const Eigen::RowVectorXd& q, Index self, TopR& top) const {
    search(root_, q, self, top);
  }

 private:
  static constexpr Index kLeafSize = 16;
  struct Node {
    int split_dim = -1;      // -1 marks a leaf
    double split_val = 0.0;
    Index begin = 0, end = 0;  // leaf range in ids_
    int left = -1, right = -1;
  };

  int build(Index lo, Index hi) {
    Node node;
    if (hi - lo <= kLeafSize) {
      node.begin = lo;
      node.end = hi;
      nodes_.push_back(node);
      return static_cast<int>(nodes_.size()) - 1;
    }
    // Split the widest dimension at the median.
    int dim = 0;
    double best_spread = -1.0;
    for (int d = 0; d < dim_; ++d) {
      double mn = std::numeric_limits<double>::infinity(), mx = -mn;
      for (Index i = lo; i < hi; ++i) {
        const double v = pts_(ids_[static_cast<size_t>(i)], d);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
      }
      if (mx - mn > best_spread) {
        best_spread = mx - mn;
        dim = d;
      }
    }
    if (best_spread <= 0.0) {  // all points identical: keep as one leaf
      node.begin = lo;
      node.end = hi;
      nodes_.push_back(node);
      return static_cast<int>(nodes_.size()) - 1;
    }
    const Index mid = lo + (hi - lo) / 2;
    std::nth_element(ids_.begin() + lo, ids_.begin() + mid, ids_.begin() + hi,
                     [&](Index a, Index b) { return pts_(a, dim) < pts_(b, dim); });
    node.split_dim = dim;
    node.split_val = pts_(ids_[static_cast<size_t>(mid)], dim);
    const int me = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    const int left = build(lo, mid);
    const int right = build(mid, hi);
    nodes_[static_cast<size_t>(me)].left = left;
    nodes_[static_cast<size_t>(me)].right = right;
    return me;
  }

  void search(int ni, const Eigen::RowVectorXd& q, Index self, TopR& top) const {
    const Node& node = nodes_[static_cast<size_t>(ni)];
    if (node.split_dim < 0) {
      for (Index i = node.begin; i < node.end; ++i) {
        const Index id = ids_[static_cast<size_t>(i)];
        if (id == self) continue;
        top.offer((pts_.row(id) - q).squaredNorm(), id);
      }
      return;
    }
    const double delta = q[node.split_dim] - node.split_val;
    const int near = delta < 0.0 ? node.left : node.right;
    const int far = delta < 0.0 ? node.right : node.left;
    search(near, q, self, top);
    if (delta * delta <= top.worst()) search(far, q, self, top);
  }

  const Matrix& pts_;
  int dim_;
  std::vector<Index> ids_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

void parallel_for(Index count, const std::function<void(Index, Index)>& body) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const Index chunks = std::min<Index>(count, static_cast<Index>(std::min(hw, 16u)));
  if (chunks <= 1) {
    body(0, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(chunks));
  const Index step = (count + chunks - 1) / chunks;
  for (Index c = 0; c < chunks; ++c) {
    const Index lo = c * step, hi = std::min(count, lo + step);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

Vector mean_knn_distance(const Matrix& points, const std::vector<Index>& queries, int r) {
  const Index n = points.rows();
  if (r < 1) throw ValueError("mean_knn_distance: r must be >= 1");
  if (n <= r) throw ValueError("mean_knn_distance: need more rows than neighbors");

  Vector out(static_cast<Index>(queries.size()));
  const bool use_tree = n > 20000 && points.cols() <= 16;

  if (use_tree) {
    KDTree tree(points);
    parallel_for(static_cast<Index>(queries.size()), [&](Index lo, Index hi) {
      for (Index qi = lo; qi < hi; ++qi) {
        TopR top(r);
        const Index self = queries[static_cast<size_t>(qi)];
        tree.query(points.row(self), self, top);
        out[qi] = top.mean_distance();
      }
    });
  } else {
    parallel_for(static_cast<Index>(queries.size()), [&](Index lo, Index hi) {
      for (Index qi = lo; qi < hi; ++qi) {
        TopR top(r);
        const Index self = queries[static_cast<size_t>(qi)];
        const auto q = points.row(self);
        for (Index j = 0; j < n; ++j) {
          if (j == self) continue;
          top.offer((points.row(j) - q).squaredNorm(), j);
        }
        out[qi] = top.mean_distance();
      }
    });
  }
  return out;
}

}  // namespace spacl::detail
