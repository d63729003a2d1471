#pragma once

#include "vbdm/point_cloud.hpp"

#include <functional>

namespace vbdm {

enum class TargetKind { Ou1dHermite, Ou2dProduct, CircleFourier, SphereCoordinate, CustomOperator };
enum class Parity { Sin, Cos };

struct AnalyticTarget {
  TargetKind kind = TargetKind::Ou1dHermite;
  int n = 0, nx = 0, ny = 0, k = 1, axis = 0;
  Parity parity = Parity::Sin;
  double eigenvalue = 0.0;

  static AnalyticTarget ou1d(int n);
  static AnalyticTarget ou2d(int nx, int ny);
  static AnalyticTarget circle(int k, Parity parity);
  static AnalyticTarget sphere(int axis);
};

// He_n(x) / sqrt(n!), orthonormal under the standard normal law.
VectorXd hermite(int n, const VectorXd& x);
double hermite(int n, double x);

VectorXd ou2d_eigenfunction(int nx, int ny, const MatrixXd& pts);
VectorXd circle_eigenfunction(int k, Parity parity, const VectorXd& theta);

// Evaluates a target on a cloud (latent theta for circles, ambient
// coordinates otherwise).
VectorXd evaluate_target(const AnalyticTarget& target, const PointCloud& cloud);

// A function of one latent angle with its first two derivatives.
struct AngularFunction {
  std::function<double(double)> f, df, d2f;
  static AngularFunction sin_k(int k);
};

enum class ReferenceKind { Laplacian, GradientFlow, BandwidthDrift };

struct ReferenceOperator {
  ReferenceKind kind = ReferenceKind::Laplacian;
  double c1 = 0.0;  // GradientFlow
  int d = 1;        // BandwidthDrift
  // d/dtheta log q (GradientFlow) or d/dtheta log rho (BandwidthDrift).
  std::function<double(double)> log_gradient;

  static ReferenceOperator laplacian();
  static ReferenceOperator gradient_flow(double c1, std::function<double(double)> log_q_gradient);
  static ReferenceOperator bandwidth_drift(int d, std::function<double(double)> log_rho_gradient);
};

// d/dtheta of log exp(cos theta)
double exp_cos_log_gradient(double theta);

// Delta f, Delta f + c1 f' (log q)', or Delta f + (d + 2) f' (log rho)' at the
// first latent angle of every point. The second angle of a torus does not
// enter because f depends on theta only.
VectorXd reference_operator(const ReferenceOperator& op, const AngularFunction& f, const PointCloud& cloud);

}  // namespace vbdm
