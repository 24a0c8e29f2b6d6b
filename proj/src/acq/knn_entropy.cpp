#include "inp/acq/knn_entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

#include <boost/math/special_functions/digamma.hpp>

#include "inp/core/errors.hpp"
#include "inp/core/rng.hpp"

namespace inp::acq {

namespace {
constexpr std::size_t kLeafSize = 16;
}

KdTree::KdTree(std::vector<double> points, std::size_t dim) : pts_(std::move(points)), dim_(dim) {
  if (dim_ == 0 || pts_.size() % dim_ != 0) throw ValidationError("kd-tree: points are not whole rows");
  n_ = pts_.size() / dim_;
  order_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) order_[i] = i;
  nodes_.reserve(2 * n_ / kLeafSize + 2);
  if (n_ > 0) build(0, n_, 0);
}

int KdTree::build(std::size_t begin, std::size_t end, std::size_t depth) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({begin, end});
  if (end - begin <= kLeafSize) return id;
  // split on the widest axis
  std::size_t axis = depth % dim_;
  double best = -1.0;
  for (std::size_t a = 0; a < dim_; ++a) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = begin; i < end; ++i) {
      lo = std::min(lo, pts_[order_[i] * dim_ + a]);
      hi = std::max(hi, pts_[order_[i] * dim_ + a]);
    }
    if (hi - lo > best) {
      best = hi - lo;
      axis = a;
    }
  }
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::size_t a, std::size_t b) { return pts_[a * dim_ + axis] < pts_[b * dim_ + axis]; });
  const double split = pts_[order_[mid] * dim_ + axis];
  const int left = build(begin, mid, depth + 1);
  const int right = build(mid, end, depth + 1);
  nodes_[id].axis = static_cast<int>(axis);
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

double KdTree::kth_neighbor_distance(std::size_t i, std::size_t k) const {
  if (k == 0 || k >= n_) throw ValidationError("kd-tree: need 1 <= k < n");
  const double* q = &pts_[i * dim_];
  std::priority_queue<double> heap;  // k smallest squared distances
  auto worst = [&] { return heap.size() < k ? INFINITY : heap.top(); };
  auto visit = [&](auto&& self, int id) -> void {
    const Node& nd = nodes_[id];
    if (nd.axis < 0) {
      for (std::size_t p = nd.begin; p < nd.end; ++p) {
        const std::size_t j = order_[p];
        if (j == i) continue;
        double d2 = 0.0;
        for (std::size_t a = 0; a < dim_; ++a) {
          const double d = pts_[j * dim_ + a] - q[a];
          d2 += d * d;
        }
        if (d2 < worst()) {
          heap.push(d2);
          if (heap.size() > k) heap.pop();
        }
      }
      return;
    }
    const double diff = q[nd.axis] - nd.split;
    const int near = diff < 0 ? nd.left : nd.right;
    const int far = diff < 0 ? nd.right : nd.left;
    self(self, near);
    if (diff * diff <= worst()) self(self, far);
  };
  visit(visit, 0);
  return std::sqrt(heap.top());
}

double kozachenko_leonenko_entropy(std::span<const double> samples, std::size_t dim, std::size_t k) {
  if (dim == 0 || samples.size() % dim != 0) throw ValidationError("entropy: samples are not whole rows");
  const std::size_t n = samples.size() / dim;
  if (k < 1 || n <= k) throw ValidationError("entropy: need n > k >= 1");
  std::vector<double> pts(samples.begin(), samples.end());

  // detect exact duplicates
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  auto row_less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(pts.begin() + a * dim, pts.begin() + (a + 1) * dim, pts.begin() + b * dim,
                                        pts.begin() + (b + 1) * dim);
  };
  std::sort(idx.begin(), idx.end(), row_less);
  bool dup = false;
  for (std::size_t i = 1; i < n && !dup; ++i) dup = !row_less(idx[i - 1], idx[i]);
  if (dup) {
    Rng rng(stream_seed(0, "kl-jitter"));
    for (auto& v : pts) v += 1e-12 * standard_normal(rng);
  }

  KdTree tree(std::move(pts), dim);
  double sum_log = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double eps = 2.0 * tree.kth_neighbor_distance(i, k);
    if (!(eps > 0.0)) throw NumericalError("entropy: zero neighbour distance");
    sum_log += std::log(eps);
  }
  const double d = static_cast<double>(dim);
  // unit-diameter ball: pi^(d/2) / Gamma(d/2 + 1) / 2^d
  const double log_cd = 0.5 * d * std::log(std::numbers::pi) - std::lgamma(0.5 * d + 1.0) - d * std::log(2.0);
  using boost::math::digamma;
  return -digamma(static_cast<double>(k)) + digamma(static_cast<double>(n)) + log_cd +
         d / static_cast<double>(n) * sum_log;
}

}  // namespace inp::acq
