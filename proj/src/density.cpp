#include "vbdm/density.hpp"

#include "vbdm/errors.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace vbdm {

VectorXd pilot_bandwidth(const NeighborGraph& graph, int k0) {
  if (k0 < 2 || k0 > graph.k) throw Error(ErrorCode::InvalidArgument, "need 2 <= k0 <= k");
  const long N = graph.size();
  VectorXd rho0(N);
  for (long i = 0; i < N; ++i) {
    double s = 0.0;
    for (int t = 1; t < k0; ++t) s += graph.distances(i, t) * graph.distances(i, t);
    rho0[i] = std::sqrt(s / double(k0 - 1));
    if (!(rho0[i] > 0.0)) throw Error::duplicate_points(i);
  }
  return rho0;
}

namespace {

double sqdist(const MatrixXd& P, long a, long b) {
  double s = 0.0;
  for (long c = 0; c < P.cols(); ++c) {
    const double d = P(a, c) - P(b, c);
    s += d * d;
  }
  return s;
}

}  // namespace

std::pair<VectorXd, double> kde_pilot(const PointCloud& cloud, const VectorXd& rho0, int d,
                                      const SparsityPattern* support) {
  const long N = cloud.size();
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  if (rho0.size() != N || (rho0.array() <= 0.0).any())
    throw Error(ErrorCode::InvalidArgument, "rho0 must be positive with one entry per point");
  const MatrixXd& P = cloud.points();
  VectorXd sum = VectorXd::Zero(N);
  if (N <= kDenseKdeLimit || support == nullptr) {
    for (long i = 0; i < N; ++i) {
      sum[i] += 1.0;
      for (long l = i + 1; l < N; ++l) {
        const double v = std::exp(-sqdist(P, i, l) / (2.0 * rho0[i] * rho0[l]));
        sum[i] += v;
        sum[l] += v;
      }
    }
  } else {
    for (long i = 0; i < N; ++i) {
      for (int t = support->row_ptr[i]; t < support->row_ptr[i + 1]; ++t) {
        const long l = support->cols[t];
        sum[i] += l == i ? 1.0 : std::exp(-sqdist(P, i, l) / (2.0 * rho0[i] * rho0[l]));
      }
    }
  }
  const double norm = std::pow(2.0 * std::numbers::pi, -0.5 * d);
  VectorXd q0(N);
  for (long i = 0; i < N; ++i) q0[i] = norm * sum[i] / (std::pow(rho0[i], d) * double(N));
  const double m = rho0.mean();
  return {q0, m * m};
}

VectorXd bandwidth_from_density(const VectorXd& q0, double beta) {
  if ((q0.array() <= 0.0).any()) throw Error(ErrorCode::InvalidArgument, "density must be positive");
  if (beta == 0.0) return VectorXd::Ones(q0.size());
  return q0.array().pow(beta).matrix();
}

CConstants c_constants(double alpha, double beta, int d) {
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  return {2.0 - 2.0 * alpha + d * beta + 2.0 * beta, 0.5 - 2.0 * alpha + 2.0 * d * alpha + d * beta / 2.0 + beta};
}

BandwidthProfile build_bandwidth(const PointCloud& cloud, const NeighborGraph& graph, int k0, double beta, int d,
                                 const SparsityPattern* support) {
  BandwidthProfile bw;
  bw.d = d;
  bw.beta = beta;
  bw.rho0 = pilot_bandwidth(graph, k0);
  auto [q0, eps0] = kde_pilot(cloud, bw.rho0, d, support);
  bw.q0 = std::move(q0);
  bw.eps0 = eps0;
  bw.rho0_tilde = bw.rho0 / std::sqrt(eps0);
  bw.rho = bandwidth_from_density(bw.q0, beta);
  return bw;
}

void write_bandwidth_csv(const BandwidthProfile& bw, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
  std::fputs("i,rho0,q0,rho\n", f);
  for (long i = 0; i < bw.rho.size(); ++i)
    std::fprintf(f, "%ld,%.17g,%.17g,%.17g\n", i, bw.rho0[i], bw.q0[i], bw.rho[i]);
  std::fclose(f);
}

}  // namespace vbdm
