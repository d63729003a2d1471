#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>

namespace vbdm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// N ambient points, optionally with latent coordinates (theta, or theta and
// phi) and a known intrinsic dimension. Immutable once built.
class PointCloud {
 public:
  PointCloud(MatrixXd points, std::optional<MatrixXd> latent, std::optional<int> intrinsic_dim,
             std::string label);

  const MatrixXd& points() const { return points_; }
  const std::optional<MatrixXd>& latent() const { return latent_; }
  const std::optional<int>& intrinsic_dim() const { return intrinsic_dim_; }
  const std::string& label() const { return label_; }

  long size() const { return points_.rows(); }
  long ambient_dim() const { return points_.cols(); }
  bool is_circle() const { return label_.rfind("circle", 0) == 0; }
  bool is_sphere() const { return label_.rfind("sphere", 0) == 0; }

  // Copy with rows kept[i] (in order).
  PointCloud subset(const std::vector<long>& kept) const;

 private:
  MatrixXd points_;
  std::optional<MatrixXd> latent_;
  std::optional<int> intrinsic_dim_;
  std::string label_;
};

double erf_inv(double y);

// F(theta) = (2 theta + sin theta) / (4 pi) on [0, 2 pi).
double circle_cdf(double theta);
double circle_cdf_inverse(double t);

PointCloud gen_circle_nonuniform(long N);
PointCloud gen_circle_uniform(long N);
// Random draws with density proportional to exp(cos theta).
PointCloud gen_circle_von_mises(long N, std::uint64_t seed);
PointCloud gen_gaussian_nice_1d(long N);
PointCloud gen_gaussian_random(long N, int dim, const MatrixXd& cov, std::uint64_t seed);
PointCloud gen_sphere_nonuniform(long N, const MatrixXd& cov, std::uint64_t seed);
PointCloud gen_torus_grid(long n_per_dim);
PointCloud perturb_circle(const PointCloud& cloud, double amplitude, std::uint64_t seed);

// A^T A + 0.1 I with A standard normal.
MatrixXd random_spd_covariance(int dim, std::uint64_t seed);

void write_cloud_csv(const PointCloud& cloud, const std::string& path);
PointCloud read_cloud_csv(const std::string& path, std::optional<int> intrinsic_dim = std::nullopt,
                          const std::string& label = "external");

}  // namespace vbdm
