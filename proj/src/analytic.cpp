#include "vbdm/analytic.hpp"

#include "vbdm/errors.hpp"

#include <cmath>

namespace vbdm {

AnalyticTarget AnalyticTarget::ou1d(int n) {
  AnalyticTarget t;
  t.kind = TargetKind::Ou1dHermite;
  t.n = n;
  t.eigenvalue = -double(n);
  return t;
}

AnalyticTarget AnalyticTarget::ou2d(int nx, int ny) {
  AnalyticTarget t;
  t.kind = TargetKind::Ou2dProduct;
  t.nx = nx;
  t.ny = ny;
  t.eigenvalue = -double(nx + ny);
  return t;
}

AnalyticTarget AnalyticTarget::circle(int k, Parity parity) {
  AnalyticTarget t;
  t.kind = TargetKind::CircleFourier;
  t.k = k;
  t.parity = parity;
  t.eigenvalue = -double(k) * k;
  return t;
}

AnalyticTarget AnalyticTarget::sphere(int axis) {
  AnalyticTarget t;
  t.kind = TargetKind::SphereCoordinate;
  t.axis = axis;
  t.eigenvalue = -2.0;
  return t;
}

double hermite(int n, double x) {
  if (n < 0 || n > 6) throw Error(ErrorCode::InvalidArgument, "hermite order must be in 0..6");
  double prev = 1.0, cur = x;
  if (n == 0) return 1.0;
  double fact = 1.0;
  for (int m = 1; m < n; ++m) {
    const double next = x * cur - m * prev;
    prev = cur;
    cur = next;
    fact *= m + 1;
  }
  return cur / std::sqrt(fact);
}

VectorXd hermite(int n, const VectorXd& x) {
  VectorXd out(x.size());
  for (long i = 0; i < x.size(); ++i) out[i] = hermite(n, x[i]);
  return out;
}

VectorXd ou2d_eigenfunction(int nx, int ny, const MatrixXd& pts) {
  if (nx < 0 || ny < 0 || nx + ny > 4) throw Error(ErrorCode::InvalidArgument, "need nx + ny <= 4");
  if (pts.cols() != 2) throw Error(ErrorCode::InvalidArgument, "ou2d eigenfunction needs 2-D points");
  VectorXd out(pts.rows());
  for (long i = 0; i < pts.rows(); ++i) out[i] = hermite(nx, pts(i, 0)) * hermite(ny, pts(i, 1));
  return out;
}

VectorXd circle_eigenfunction(int k, Parity parity, const VectorXd& theta) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "circle mode needs k >= 1");
  VectorXd out(theta.size());
  for (long i = 0; i < theta.size(); ++i)
    out[i] = parity == Parity::Sin ? std::sin(k * theta[i]) : std::cos(k * theta[i]);
  return out;
}

VectorXd evaluate_target(const AnalyticTarget& t, const PointCloud& cloud) {
  switch (t.kind) {
    case TargetKind::Ou1dHermite:
      return hermite(t.n, VectorXd(cloud.points().col(0)));
    case TargetKind::Ou2dProduct:
      return ou2d_eigenfunction(t.nx, t.ny, cloud.points());
    case TargetKind::CircleFourier:
      if (!cloud.latent()) throw Error(ErrorCode::NoLatent, "circle target needs theta");
      return circle_eigenfunction(t.k, t.parity, VectorXd(cloud.latent()->col(0)));
    case TargetKind::SphereCoordinate:
      return cloud.points().col(t.axis);
    case TargetKind::CustomOperator:
      break;
  }
  throw Error(ErrorCode::InvalidArgument, "target has no closed-form eigenfunction");
}

AngularFunction AngularFunction::sin_k(int k) {
  const double kk = k;
  return {[kk](double t) { return std::sin(kk * t); }, [kk](double t) { return kk * std::cos(kk * t); },
          [kk](double t) { return -kk * kk * std::sin(kk * t); }};
}

ReferenceOperator ReferenceOperator::laplacian() { return {}; }

ReferenceOperator ReferenceOperator::gradient_flow(double c1, std::function<double(double)> g) {
  ReferenceOperator op;
  op.kind = ReferenceKind::GradientFlow;
  op.c1 = c1;
  op.log_gradient = std::move(g);
  return op;
}

ReferenceOperator ReferenceOperator::bandwidth_drift(int d, std::function<double(double)> g) {
  ReferenceOperator op;
  op.kind = ReferenceKind::BandwidthDrift;
  op.d = d;
  op.log_gradient = std::move(g);
  return op;
}

double exp_cos_log_gradient(double theta) { return -std::sin(theta); }

VectorXd reference_operator(const ReferenceOperator& op, const AngularFunction& f, const PointCloud& cloud) {
  if (!cloud.latent()) throw Error(ErrorCode::NoLatent, "reference operator needs latent coordinates");
  const MatrixXd& lat = *cloud.latent();
  VectorXd out(cloud.size());
  for (long i = 0; i < cloud.size(); ++i) {
    const double t = lat(i, 0);
    double v = f.d2f(t);
    if (op.kind == ReferenceKind::GradientFlow) v += op.c1 * f.df(t) * op.log_gradient(t);
    if (op.kind == ReferenceKind::BandwidthDrift) v += (op.d + 2) * f.df(t) * op.log_gradient(t);
    out[i] = v;
  }
  return out;
}

}  // namespace vbdm
