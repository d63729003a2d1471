#pragma once

#include "vbdm/point_cloud.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vbdm {

using IndexMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using DistanceMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Row i: the point itself first, then neighbours by ascending (distance, index).
struct NeighborGraph {
  int k = 0;
  IndexMatrix indices;
  DistanceMatrix distances;

  long size() const { return indices.rows(); }
};

NeighborGraph knn(const PointCloud& cloud, int k);

// O(N^2) reference search with the same ordering rules.
NeighborGraph knn_brute_force(const PointCloud& cloud, int k);

// Symmetric CSR pattern of the union of (i, j) and (j, i) over all listed
// neighbour pairs. mult counts how many of the two directions list the pair,
// so (K + K^T) / 2 on the truncated kernel is mult / 2 times the full entry.
struct SparsityPattern {
  long n = 0;
  std::vector<int> row_ptr;
  std::vector<int> cols;
  std::vector<std::uint8_t> mult;
  std::vector<int> diag_pos;

  long nnz() const { return long(cols.size()); }
  bool contains(long i, long j) const;
};

SparsityPattern symmetrized_support(const NeighborGraph& graph);
SparsityPattern full_support(long n);

void write_neighbors_csv(const NeighborGraph& graph, const std::string& path);

}  // namespace vbdm
