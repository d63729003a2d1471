#pragma once

#include "vbdm/neighbors.hpp"
#include "vbdm/point_cloud.hpp"

#include <string>
#include <utility>

namespace vbdm {

struct BandwidthProfile {
  VectorXd rho0;        // pilot bandwidth, ambient length
  double eps0 = 0.0;    // (mean rho0)^2
  VectorXd rho0_tilde;  // rho0 / sqrt(eps0)
  VectorXd q0;          // density estimate
  double beta = 0.0;
  VectorXd rho;         // q0^beta
  int d = 1;
};

// Root-mean-square distance to neighbours 2..k0.
VectorXd pilot_bandwidth(const NeighborGraph& graph, int k0);

// Above this size the KDE sum runs over the sparse support plus diagonal.
inline constexpr long kDenseKdeLimit = 5000;

// Returns (q0, eps0). support may be null when N <= kDenseKdeLimit.
std::pair<VectorXd, double> kde_pilot(const PointCloud& cloud, const VectorXd& rho0, int d,
                                      const SparsityPattern* support = nullptr);

VectorXd bandwidth_from_density(const VectorXd& q0, double beta);

struct CConstants {
  double c1, c2;
};
CConstants c_constants(double alpha, double beta, int d);

BandwidthProfile build_bandwidth(const PointCloud& cloud, const NeighborGraph& graph, int k0, double beta, int d,
                                 const SparsityPattern* support = nullptr);

void write_bandwidth_csv(const BandwidthProfile& bw, const std::string& path);

}  // namespace vbdm
