#include "vbdm/point_cloud.hpp"

#include "vbdm/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace vbdm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_unit_rows(const MatrixXd& pts, const char* what) {
  for (long i = 0; i < pts.rows(); ++i) {
    if (std::abs(pts.row(i).norm() - 1.0) > 1e-12)
      throw Error(ErrorCode::InvalidArgument, std::string(what) + " row off the unit sphere");
  }
}

MatrixXd embed_circle(const VectorXd& theta) {
  MatrixXd pts(theta.size(), 2);
  for (long i = 0; i < theta.size(); ++i) {
    pts(i, 0) = std::cos(theta[i]);
    pts(i, 1) = std::sin(theta[i]);
  }
  return pts;
}

void require_n(long N, long min) {
  if (N < min) throw Error(ErrorCode::InvalidArgument, "need at least " + std::to_string(min) + " points");
}

}  // namespace

PointCloud::PointCloud(MatrixXd points, std::optional<MatrixXd> latent, std::optional<int> intrinsic_dim,
                       std::string label)
    : points_(std::move(points)),
      latent_(std::move(latent)),
      intrinsic_dim_(intrinsic_dim),
      label_(std::move(label)) {
  if (points_.rows() < 2) throw Error(ErrorCode::InvalidArgument, "point cloud needs N >= 2");
  if (!points_.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite coordinate");
  if (latent_ && latent_->rows() != points_.rows())
    throw Error(ErrorCode::InvalidArgument, "latent row count mismatch");
  if (intrinsic_dim_ && *intrinsic_dim_ < 1) throw Error(ErrorCode::InvalidArgument, "intrinsic_dim < 1");
  if (is_sphere()) check_unit_rows(points_, "sphere");
  if (is_circle()) {
    check_unit_rows(points_, "circle");
    if (latent_) {
      for (long i = 0; i < latent_->rows(); ++i) {
        double t = (*latent_)(i, 0);
        if (!(t >= 0.0 && t < kTwoPi)) throw Error(ErrorCode::InvalidArgument, "circle theta outside [0, 2pi)");
      }
    }
  }
}

PointCloud PointCloud::subset(const std::vector<long>& kept) const {
  MatrixXd pts(kept.size(), points_.cols());
  std::optional<MatrixXd> lat;
  if (latent_) lat = MatrixXd(kept.size(), latent_->cols());
  for (size_t r = 0; r < kept.size(); ++r) {
    pts.row(r) = points_.row(kept[r]);
    if (lat) lat->row(r) = latent_->row(kept[r]);
  }
  return PointCloud(std::move(pts), std::move(lat), intrinsic_dim_, label_);
}

double erf_inv(double y) {
  if (!(y > -1.0 && y < 1.0)) {
    if (y == 1.0) return INFINITY;
    if (y == -1.0) return -INFINITY;
    throw Error(ErrorCode::InvalidArgument, "erf_inv argument outside (-1, 1)");
  }
  if (y == 0.0) return 0.0;
  // Winitzki's closed form as the starting point.
  const double a = 0.147;
  const double ln = std::log1p(-y * y);
  const double t = 2.0 / (std::numbers::pi * a) + 0.5 * ln;
  double x = std::copysign(std::sqrt(std::sqrt(t * t - ln / a) - t), y);
  const double c = 2.0 / std::sqrt(std::numbers::pi);
  for (int it = 0; it < 100; ++it) {
    const double r = std::erf(x) - y;
    const double dx = r / (c * std::exp(-x * x));
    x -= dx;
    if (std::abs(dx) < 1e-14) return x;
  }
  throw Error(ErrorCode::InversionFailure, "erf_inv Newton iteration did not settle");
}

double circle_cdf(double theta) { return (2.0 * theta + std::sin(theta)) / (4.0 * std::numbers::pi); }

double circle_cdf_inverse(double t) {
  if (!(t > 0.0 && t < 1.0)) throw Error(ErrorCode::InvalidArgument, "circle_cdf_inverse needs t in (0, 1)");
  if (t == 0.5) return std::numbers::pi;
  // F(2 pi - theta) = 1 - F(theta); solve on the lower half only.
  const bool upper = t > 0.5;
  const double target = upper ? 1.0 - t : t;
  double lo = 0.0, hi = std::numbers::pi;
  int it = 0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (circle_cdf(mid) < target) lo = mid;
    else hi = mid;
    if (++it > 200) throw Error(ErrorCode::InversionFailure, "bisection on F did not settle");
  }
  const double theta = 0.5 * (lo + hi);
  return upper ? kTwoPi - theta : theta;
}

PointCloud gen_circle_nonuniform(long N) {
  require_n(N, 2);
  VectorXd theta(N);
  for (long i = 0; i < N; ++i) theta[i] = circle_cdf_inverse(double(i + 1) / double(N + 1));
  return PointCloud(embed_circle(theta), MatrixXd(theta), 1, "circle_nonuniform");
}

PointCloud gen_circle_uniform(long N) {
  require_n(N, 2);
  VectorXd theta(N);
  for (long i = 0; i < N; ++i) theta[i] = kTwoPi * double(i) / double(N);
  return PointCloud(embed_circle(theta), MatrixXd(theta), 1, "circle_uniform");
}

PointCloud gen_circle_von_mises(long N, std::uint64_t seed) {
  require_n(N, 2);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  VectorXd theta(N);
  for (long i = 0; i < N;) {
    const double t = kTwoPi * u01(rng);
    if (u01(rng) < std::exp(std::cos(t) - 1.0) && t < kTwoPi) theta[i++] = t;
  }
  return PointCloud(embed_circle(theta), MatrixXd(theta), 1, "circle_vonmises");
}

PointCloud gen_gaussian_nice_1d(long N) {
  require_n(N, 2);
  MatrixXd x(N, 1);
  for (long i = 0; i < N; ++i) {
    const double xt = double(i + 1) / double(N + 1);
    x(i, 0) = std::numbers::sqrt2 * erf_inv(2.0 * xt - 1.0);
  }
  return PointCloud(std::move(x), std::nullopt, 1, "gaussian_nice_1d");
}

namespace {

Eigen::MatrixXd cholesky_factor(const MatrixXd& cov, int dim) {
  if (cov.rows() != dim || cov.cols() != dim) throw Error(ErrorCode::InvalidCovariance, "covariance shape mismatch");
  if (!cov.allFinite() || (cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + cov.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::InvalidCovariance, "covariance not symmetric");
  Eigen::LLT<MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::InvalidCovariance, "covariance not positive definite");
  return llt.matrixL();
}

}  // namespace

PointCloud gen_gaussian_random(long N, int dim, const MatrixXd& cov, std::uint64_t seed) {
  require_n(N, 2);
  const MatrixXd L = cholesky_factor(cov, dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXd pts(N, dim);
  VectorXd z(dim);
  for (long i = 0; i < N; ++i) {
    for (int c = 0; c < dim; ++c) z[c] = g(rng);
    pts.row(i) = (L * z).transpose();
  }
  return PointCloud(std::move(pts), std::nullopt, dim, "gaussian");
}

PointCloud gen_sphere_nonuniform(long N, const MatrixXd& cov, std::uint64_t seed) {
  require_n(N, 2);
  const MatrixXd L = cholesky_factor(cov, 3);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXd pts(N, 3);
  Eigen::Vector3d z;
  for (long i = 0; i < N;) {
    for (int c = 0; c < 3; ++c) z[c] = g(rng);
    Eigen::Vector3d p = L * z;
    const double n = p.norm();
    if (n == 0.0) continue;
    pts.row(i++) = (p / n).transpose();
  }
  return PointCloud(std::move(pts), std::nullopt, 2, "sphere");
}

PointCloud gen_torus_grid(long n_per_dim) {
  require_n(n_per_dim, 2);
  const long N = n_per_dim * n_per_dim;
  MatrixXd pts(N, 4), lat(N, 2);
  for (long a = 0; a < n_per_dim; ++a) {
    const double th = kTwoPi * double(a) / double(n_per_dim);
    for (long b = 0; b < n_per_dim; ++b) {
      const double ph = kTwoPi * double(b) / double(n_per_dim);
      const long i = a * n_per_dim + b;
      pts.row(i) << std::cos(th), std::sin(th), std::cos(ph), std::sin(ph);
      lat.row(i) << th, ph;
    }
  }
  return PointCloud(std::move(pts), std::move(lat), 2, "torus");
}

PointCloud perturb_circle(const PointCloud& cloud, double amplitude, std::uint64_t seed) {
  if (!cloud.is_circle() || !cloud.latent())
    throw Error(ErrorCode::WrongManifold, "perturb_circle needs a circle cloud with theta");
  if (amplitude < 0.0) throw Error(ErrorCode::InvalidArgument, "negative perturbation amplitude");
  if (amplitude == 0.0) return cloud;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, amplitude);
  VectorXd theta = cloud.latent()->col(0);
  for (long i = 0; i < theta.size(); ++i) {
    double t = std::fmod(theta[i] + u(rng), kTwoPi);
    if (t >= kTwoPi) t -= kTwoPi;
    if (t < 0.0) t = 0.0;
    theta[i] = t;
  }
  return PointCloud(embed_circle(theta), MatrixXd(theta), 1, "circle_perturbed");
}

MatrixXd random_spd_covariance(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXd A(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) A(r, c) = g(rng);
  return A.transpose() * A + 0.1 * MatrixXd::Identity(dim, dim);
}

void write_cloud_csv(const PointCloud& cloud, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
  const long n = cloud.ambient_dim();
  const long nl = cloud.latent() ? cloud.latent()->cols() : 0;
  for (long c = 0; c < n; ++c) std::fprintf(f, c ? ",x%ld" : "x%ld", c + 1);
  if (nl >= 1) std::fputs(",theta", f);
  if (nl >= 2) std::fputs(",phi", f);
  std::fputc('\n', f);
  for (long i = 0; i < cloud.size(); ++i) {
    for (long c = 0; c < n; ++c) std::fprintf(f, c ? ",%.17g" : "%.17g", cloud.points()(i, c));
    for (long c = 0; c < nl && c < 2; ++c) std::fprintf(f, ",%.17g", (*cloud.latent())(i, c));
    std::fputc('\n', f);
  }
  std::fclose(f);
}

PointCloud read_cloud_csv(const std::string& path, std::optional<int> intrinsic_dim, const std::string& label) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Io, "empty file " + path);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) header.push_back(tok);
  }
  long n = 0, nl = 0;
  for (const auto& h : header) {
    if (h == "theta" || h == "phi") ++nl;
    else ++n;
  }
  std::vector<double> vals;
  long rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    long cols = 0;
    while (std::getline(ss, tok, ',')) {
      vals.push_back(std::stod(tok));
      ++cols;
    }
    if (cols != long(header.size())) throw Error(ErrorCode::Io, "ragged row in " + path);
    ++rows;
  }
  MatrixXd pts(rows, n);
  std::optional<MatrixXd> lat;
  if (nl) lat = MatrixXd(rows, nl);
  for (long r = 0; r < rows; ++r) {
    long pc = 0, lc = 0;
    for (size_t c = 0; c < header.size(); ++c) {
      const double v = vals[r * header.size() + c];
      if (header[c] == "theta" || header[c] == "phi") (*lat)(r, lc++) = v;
      else pts(r, pc++) = v;
    }
  }
  return PointCloud(std::move(pts), std::move(lat), intrinsic_dim, label);
}

}  // namespace vbdm
