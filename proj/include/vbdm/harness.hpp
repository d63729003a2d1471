#pragma once

#include "vbdm/density.hpp"
#include "vbdm/errors.hpp"
#include "vbdm/kernel.hpp"
#include "vbdm/neighbors.hpp"
#include "vbdm/point_cloud.hpp"
#include "vbdm/spectral.hpp"
#include "vbdm/tuning.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace vbdm {

struct ExperimentConfig {
  // ou1d_nice, ou1d_random, ou2d, circle, circle_random, circle_uniform,
  // sphere, torus_operator, circle_operator, outlier_study
  std::string experiment = "ou1d_nice";
  long N = 2000;
  std::string preset;                  // laplacian-vb, gradientflow-vb, laplacian-fixed, gradientflow-fixed
  std::optional<double> alpha, beta;   // override the preset
  std::string eps = "sweep";           // "sweep", "auto", a number, or a comma list
  double eps_min = 1e-5, eps_max = 1.0;
  int eps_count = 65;
  double eps_multiplier = 1.0;
  long k_support = 0;                  // 0 picks the experiment default
  int k0 = 8;
  std::uint64_t seed = 1;
  int eigenfunctions = 0;              // M; 0 picks the experiment default
  int d = 0;                           // intrinsic dimension override
  std::string output_dir;
  std::string input;                   // external cloud for the eigs/build commands
  std::string solver = "auto";
  double sigma = 1e-3;
  double tol = 1e-10;
  bool record_timing = false;
  bool write_eigvecs = true;
  double perturb = 0.5;
  // OU error mask |x| <= r; unset means 2 for the outlier study and no mask
  // elsewhere, <= 0 disables
  std::optional<double> mask_radius;
  std::string formulation = "symmetric";
  std::string sampling = "uniform";    // circle_operator: uniform or vonmises
  std::string bandwidth = "exp_cos";   // circle_operator/torus_operator: exp_cos or density
  std::vector<long> outlier_N = {1000, 10000, 100000};
  int tune_lo = -30, tune_hi = 10;

  void set(const std::string& key, const std::string& value);
  void load_file(const std::string& path);
  std::vector<std::pair<std::string, std::string>> echo() const;
};

struct ResultRow {
  double eps = 0.0;
  double mse = 0.0;
  double eig_err = 0.0;
  double wall_time_s = 0.0;
  VectorXd eigenvalues;
  std::map<std::string, double> extra;
};

struct FailedRow {
  double eps;
  ErrorCode code;
  std::string message;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::vector<FailedRow> failures;
  std::vector<std::pair<std::string, std::string>> meta;
  std::optional<TuningCurve> tuning;

  const ResultRow* best() const;  // smallest mse
};

struct AlphaBeta {
  double alpha, beta;
};
AlphaBeta preset_alpha_beta(const std::string& preset, int d);

// 65 log-spaced values by default, times the multiplier.
std::vector<double> default_sweep(const ExperimentConfig& cfg);
std::vector<double> parse_eps_list(const std::string& s);

// Everything that does not depend on eps.
struct PreparedCloud {
  std::shared_ptr<const PointCloud> cloud;
  std::shared_ptr<const SparsityPattern> support;
  BandwidthProfile bandwidth;
  int d = 1;
  double alpha = 0.0;
};

// Support for the S(eps) sums: every pair up to kDenseKdeLimit points, the
// truncated pattern above.
const SparsityPattern* tuning_support(const PreparedCloud& pc);

PointCloud make_experiment_cloud(const ExperimentConfig& cfg);
long default_k_support(const ExperimentConfig& cfg, long N);
PreparedCloud prepare(const ExperimentConfig& cfg, const PointCloud& cloud);

ResultTable run_experiment(const ExperimentConfig& cfg);
ResultTable outlier_study(const ExperimentConfig& cfg);

struct PowerLaw {
  double exponent, prefactor;
};
PowerLaw fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

void write_results(const ResultTable& table, const std::string& dir);

}  // namespace vbdm
