#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include "lesiontrack/error.hpp"

namespace lesiontrack {

enum class Metric { L1, L2 };

template <typename Scalar, int Dim>
using PointList = Eigen::Matrix<Scalar, Eigen::Dynamic, Dim, Eigen::RowMajor>;

template <typename Scalar, int Dim>
using Point = Eigen::Matrix<Scalar, Dim, 1>;

template <typename Scalar, int Dim, Metric M>
struct NearestHit {
  Eigen::Index index = -1;
  Scalar distance = std::numeric_limits<Scalar>::infinity();
};

/// Static kd-tree answering exact nearest-point queries under L1 or L2.
/// Equidistant candidates resolve to the lowest point index so results match
/// a first-minimum linear scan.
template <typename Scalar, int Dim, Metric M>
class KdTree {
 public:
  using Points = PointList<Scalar, Dim>;
  using Query = Point<Scalar, Dim>;
  using Hit = NearestHit<Scalar, Dim, M>;

  KdTree() = default;

  template <typename Derived>
  explicit KdTree(const Eigen::MatrixBase<Derived>& points) : points_(points) {
    order_.resize(points_.rows());
    std::iota(order_.begin(), order_.end(), Eigen::Index{0});
    if (points_.rows() > 0) {
      nodes_.reserve(2 * points_.rows() / kLeafSize + 2);
      build(0, static_cast<Eigen::Index>(order_.size()));
    }
  }

  Eigen::Index size() const { return points_.rows(); }
  bool empty() const { return points_.rows() == 0; }
  const Points& points() const { return points_; }

  Hit nearest(const Query& q) const {
    if (empty()) fail(ErrorKind::EmptyIndex, "nearest-neighbour query on an empty index");
    Hit best;
    Scalar best_key = std::numeric_limits<Scalar>::infinity();
    search(0, q, best, best_key);
    best.distance = M == Metric::L2 ? std::sqrt(best_key) : best_key;
    return best;
  }

  /// Distance in the comparison domain (squared for L2).
  static Scalar key(const Query& a, const Eigen::Ref<const Query>& b) {
    if constexpr (M == Metric::L2) {
      return (a - b).squaredNorm();
    } else {
      return (a - b).template lpNorm<1>();
    }
  }

 private:
  static constexpr Eigen::Index kLeafSize = 8;

  struct Node {
    Eigen::Index begin = 0, end = 0;
    int axis = -1;  // -1 marks a leaf
    Scalar split = 0;
    std::int32_t left = -1, right = -1;
  };

  std::int32_t build(Eigen::Index begin, Eigen::Index end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({begin, end});
    if (end - begin <= kLeafSize) return id;

    Query lo = Query::Constant(std::numeric_limits<Scalar>::infinity());
    Query hi = -lo;
    for (Eigen::Index i = begin; i < end; ++i) {
      lo = lo.cwiseMin(points_.row(order_[i]).transpose());
      hi = hi.cwiseMax(points_.row(order_[i]).transpose());
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    if (hi[axis] <= lo[axis]) return id;  // all coincident

    const Eigen::Index mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](Eigen::Index a, Eigen::Index b) { return points_(a, axis) < points_(b, axis); });
    const Scalar split = points_(order_[mid], axis);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    const auto left = build(begin, mid);
    const auto right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void search(std::int32_t id, const Query& q, Hit& best, Scalar& best_key) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (Eigen::Index i = node.begin; i < node.end; ++i) {
        const Eigen::Index p = order_[i];
        const Scalar k = key(q, points_.row(p).transpose());
        if (k < best_key || (k == best_key && p < best.index)) {
          best_key = k;
          best.index = p;
        }
      }
      return;
    }
    const Scalar delta = q[node.axis] - node.split;
    const auto near = delta < 0 ? node.left : node.right;
    const auto far = delta < 0 ? node.right : node.left;
    search(near, q, best, best_key);
    const Scalar bound = M == Metric::L2 ? delta * delta : std::abs(delta);
    // Equality still descends: an equidistant point with a lower index may live there.
    if (bound <= best_key) search(far, q, best, best_key);
  }

  Points points_;
  std::vector<Eigen::Index> order_;
  std::vector<Node> nodes_;
};

using SpatialIndex = KdTree<double, 3, Metric::L2>;
using UvIndex = KdTree<double, 2, Metric::L1>;

/// Index of the nearest indexed point to `point` (L2); ties go to the lowest index.
inline Eigen::Index nearest_vertex(const SpatialIndex& index, const Eigen::Vector3d& point) {
  return index.nearest(point).index;
}

}  // namespace lesiontrack
