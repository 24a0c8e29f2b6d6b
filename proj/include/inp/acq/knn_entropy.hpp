#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace inp::acq {

/// Exact k-nearest-neighbour search in Euclidean space.
class KdTree {
 public:
  /// points: n x dim row-major; the tree keeps a copy.
  KdTree(std::vector<double> points, std::size_t dim);

  /// Distance from point `i` to its k-th nearest other point.
  double kth_neighbor_distance(std::size_t i, std::size_t k) const;

  std::size_t size() const { return n_; }

 private:
  struct Node {
    std::size_t begin, end;  // range in order_
    int axis = -1;           // -1 for leaves
    double split = 0.0;
    int left = -1, right = -1;
  };

  int build(std::size_t begin, std::size_t end, std::size_t depth);

  std::vector<double> pts_;
  std::size_t dim_, n_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

/// Kozachenko-Leonenko entropy estimate in nats:
///   -psi(k) + psi(n) + log c_d + (d/n) sum_i log eps_i,
/// eps_i twice the distance to the k-th neighbour and c_d the volume of the
/// d-ball of unit diameter. Exact duplicates get a 1e-12 jitter.
double kozachenko_leonenko_entropy(std::span<const double> samples, std::size_t dim, std::size_t k = 3);

}  // namespace inp::acq
