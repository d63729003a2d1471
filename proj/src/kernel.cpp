#include "vbdm/kernel.hpp"

#include "vbdm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace vbdm {

ShapeConstants ShapeConstants::gaussian(int d) {
  const double a = std::pow(4.0 * std::numbers::pi, 0.5 * d);
  const double b = std::pow(2.0 * std::numbers::pi, 0.5 * d);
  return {a, a, 1.0, b, b};
}

SparseSymmetric::SparseSymmetric(std::shared_ptr<const SparsityPattern> pattern, VectorXd values)
    : pattern_(std::move(pattern)), values_(std::move(values)) {
  if (!pattern_ || values_.size() != pattern_->nnz())
    throw Error(ErrorCode::InvalidArgument, "values do not match the sparsity pattern");
}

void SparseSymmetric::multiply(const VectorXd& x, VectorXd& y) const {
  const auto& p = *pattern_;
  y.resize(p.n);
  const int* rp = p.row_ptr.data();
  const int* cj = p.cols.data();
  const double* v = values_.data();
  const double* xv = x.data();
  for (long i = 0; i < p.n; ++i) {
    double s = 0.0;
    for (int t = rp[i]; t < rp[i + 1]; ++t) s += v[t] * xv[cj[t]];
    y[i] = s;
  }
}

VectorXd SparseSymmetric::row_sums() const {
  const auto& p = *pattern_;
  VectorXd s = VectorXd::Zero(p.n);
  for (long i = 0; i < p.n; ++i)
    for (int t = p.row_ptr[i]; t < p.row_ptr[i + 1]; ++t) s[i] += values_[t];
  return s;
}

double SparseSymmetric::at(long i, long j) const {
  const auto& p = *pattern_;
  auto b = p.cols.begin() + p.row_ptr[i], e = p.cols.begin() + p.row_ptr[i + 1];
  auto it = std::lower_bound(b, e, int(j));
  if (it == e || *it != j) return 0.0;
  return values_[it - p.cols.begin()];
}

double SparseSymmetric::asymmetry() const {
  const auto& p = *pattern_;
  double worst = 0.0, scale = 0.0;
  for (long i = 0; i < p.n; ++i) {
    for (int t = p.row_ptr[i]; t < p.row_ptr[i + 1]; ++t) {
      const long j = p.cols[t];
      scale = std::max(scale, std::abs(values_[t]));
      if (j > i) worst = std::max(worst, std::abs(values_[t] - at(j, i)));
    }
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

MatrixXd SparseSymmetric::to_dense() const {
  const auto& p = *pattern_;
  MatrixXd A = MatrixXd::Zero(p.n, p.n);
  for (long i = 0; i < p.n; ++i)
    for (int t = p.row_ptr[i]; t < p.row_ptr[i + 1]; ++t) A(i, p.cols[t]) = values_[t];
  return A;
}

void SparseSymmetric::write_triples(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
  std::fputs("i,j,value\n", f);
  const auto& p = *pattern_;
  for (long i = 0; i < p.n; ++i)
    for (int t = p.row_ptr[i]; t < p.row_ptr[i + 1]; ++t) std::fprintf(f, "%ld,%d,%.17g\n", i, p.cols[t], values_[t]);
  std::fclose(f);
}

VectorXd GeneratorMatrices::apply_L(const VectorXd& f) const {
  VectorXd g = S.cwiseProduct(f), h;
  Lhat.multiply(g, h);
  return h.cwiseQuotient(S);
}

VectorXd GeneratorMatrices::khat_row_sums() const {
  if (!Kalpha.empty()) return Kalpha.row_sums().cwiseQuotient(q_eps_alpha);
  const auto& p = Lhat.pattern();
  const VectorXd& v = Lhat.values();
  VectorXd s = VectorXd::Zero(p.n);
  for (long i = 0; i < p.n; ++i) {
    for (int t = p.row_ptr[i]; t < p.row_ptr[i + 1]; ++t) {
      const long j = p.cols[t];
      const double ka = (eps * P[i] * P[j] * v[t] + (i == j ? 1.0 : 0.0)) * std::sqrt(D[i] * D[j]);
      s[i] += ka / D[i];
    }
  }
  return s;
}

namespace {

double sqdist(const MatrixXd& X, long a, long b) {
  double s = 0.0;
  for (long c = 0; c < X.cols(); ++c) {
    const double d = X(a, c) - X(b, c);
    s += d * d;
  }
  return s;
}

void check_inputs(const PointCloud& cloud, const VectorXd& rho, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  if (rho.size() != cloud.size() || !(rho.array() > 0.0).all())
    throw Error(ErrorCode::InvalidArgument, "rho must be positive with one entry per point");
}

void fill_kernel(const PointCloud& cloud, const VectorXd& rho, double eps, const SparsityPattern& p, VectorXd& v) {
  const MatrixXd& X = cloud.points();
  v.resize(p.nnz());
  for (long i = 0; i < p.n; ++i) {
    const double si = 1.0 / (4.0 * eps * rho[i]);
    for (int t = p.row_ptr[i]; t < p.row_ptr[i + 1]; ++t) {
      const long j = p.cols[t];
      v[t] = j == i ? 1.0 : 0.5 * p.mult[t] * std::exp(-sqdist(X, i, j) * si / rho[j]);
    }
  }
}

VectorXd row_sums(const SparsityPattern& p, const VectorXd& v) {
  VectorXd s = VectorXd::Zero(p.n);
  for (long i = 0; i < p.n; ++i)
    for (int t = p.row_ptr[i]; t < p.row_ptr[i + 1]; ++t) s[i] += v[t];
  return s;
}

void scale_entries(const SparsityPattern& p, VectorXd& v, const VectorXd& w) {
  for (long i = 0; i < p.n; ++i)
    for (int t = p.row_ptr[i]; t < p.row_ptr[i + 1]; ++t) v[t] *= w[i] * w[p.cols[t]];
}

void to_lhat(const SparsityPattern& p, VectorXd& v, const VectorXd& q, const VectorXd& rho, double eps) {
  const VectorXd w = q.cwiseSqrt().cwiseInverse();
  scale_entries(p, v, w);
  for (long i = 0; i < p.n; ++i) v[p.diag_pos[i]] -= 1.0;
  const VectorXd r = rho.cwiseInverse() / std::sqrt(eps);
  scale_entries(p, v, r);
}

}  // namespace

SparseSymmetric kernel_matrix(const PointCloud& cloud, const VectorXd& rho, double eps,
                              std::shared_ptr<const SparsityPattern> support) {
  check_inputs(cloud, rho, eps);
  if (!support || support->n != cloud.size()) throw Error(ErrorCode::InvalidArgument, "support size mismatch");
  VectorXd v;
  fill_kernel(cloud, rho, eps, *support, v);
  return SparseSymmetric(std::move(support), std::move(v));
}

VectorXd qS_normalization(const SparseSymmetric& K, const VectorXd& rho, int d) {
  return K.row_sums().cwiseQuotient(rho.array().pow(double(d)).matrix());
}

std::pair<SparseSymmetric, VectorXd> alpha_normalize(const SparseSymmetric& K, const VectorXd& qS, double alpha) {
  if (!(qS.array() > 0.0).all()) throw Error(ErrorCode::InvalidArgument, "qS must be positive");
  VectorXd v = K.values();
  if (alpha != 0.0) scale_entries(K.pattern(), v, qS.array().pow(-alpha).matrix());
  VectorXd q = row_sums(K.pattern(), v);
  return {SparseSymmetric(K.pattern_ptr(), std::move(v)), std::move(q)};
}

GeneratorMatrices generator_symmetric(const SparseSymmetric& Kalpha, const VectorXd& q_eps_alpha,
                                      const VectorXd& rho, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  GeneratorMatrices gm;
  gm.eps = eps;
  gm.Kalpha = Kalpha;
  gm.q_eps_alpha = q_eps_alpha;
  gm.P = rho;
  gm.D = q_eps_alpha;
  gm.S = rho.cwiseProduct(q_eps_alpha.cwiseSqrt());
  VectorXd v = Kalpha.values();
  to_lhat(Kalpha.pattern(), v, q_eps_alpha, rho, eps);
  gm.Lhat = SparseSymmetric(Kalpha.pattern_ptr(), std::move(v));
  return gm;
}

GeneratorMatrices build_generator(const PointCloud& cloud, const VectorXd& rho, double eps, double alpha, int d,
                                  std::shared_ptr<const SparsityPattern> support, bool keep_intermediate) {
  if (keep_intermediate) {
    SparseSymmetric K = kernel_matrix(cloud, rho, eps, support);
    VectorXd qS = qS_normalization(K, rho, d);
    auto [Ka, qa] = alpha_normalize(K, qS, alpha);
    GeneratorMatrices gm = generator_symmetric(Ka, qa, rho, eps);
    gm.alpha = alpha;
    gm.K = std::move(K);
    gm.qS = std::move(qS);
    return gm;
  }
  check_inputs(cloud, rho, eps);
  const SparsityPattern& p = *support;
  GeneratorMatrices gm;
  gm.eps = eps;
  gm.alpha = alpha;
  gm.P = rho;
  VectorXd v;
  fill_kernel(cloud, rho, eps, p, v);
  gm.qS = row_sums(p, v).cwiseQuotient(rho.array().pow(double(d)).matrix());
  if (alpha != 0.0) scale_entries(p, v, gm.qS.array().pow(-alpha).matrix());
  gm.q_eps_alpha = row_sums(p, v);
  gm.D = gm.q_eps_alpha;
  gm.S = rho.cwiseProduct(gm.D.cwiseSqrt());
  to_lhat(p, v, gm.D, rho, eps);
  gm.Lhat = SparseSymmetric(std::move(support), std::move(v));
  return gm;
}

Formulation parse_formulation(const std::string& s) {
  if (s == "left") return Formulation::Left;
  if (s == "right") return Formulation::Right;
  if (s == "symmetric") return Formulation::Symmetric;
  throw Error(ErrorCode::InvalidArgument, "unknown formulation '" + s + "'");
}

VectorXd apply_generator(const PointCloud& cloud, const VectorXd& rho, double eps, double alpha,
                         Formulation formulation, const VectorXd& f, int d, const SparsityPattern* support) {
  check_inputs(cloud, rho, eps);
  const long N = cloud.size();
  if (f.size() != N || !f.allFinite()) throw Error(ErrorCode::InvalidArgument, "f must be finite, one entry per point");
  const MatrixXd& X = cloud.points();

  auto weight = [&](long i, long j, double r2) {
    switch (formulation) {
      case Formulation::Left: return std::exp(-r2 / (4.0 * eps * rho[i]));
      case Formulation::Right: return std::exp(-r2 / (4.0 * eps * rho[j]));
      case Formulation::Symmetric: break;
    }
    return std::exp(-r2 / (4.0 * eps * rho[i] * rho[j]));
  };
  // Visits every (j, kernel weight) of row i.
  auto for_row = [&](long i, auto&& fn) {
    if (support) {
      for (int t = support->row_ptr[i]; t < support->row_ptr[i + 1]; ++t) {
        const long j = support->cols[t];
        fn(j, j == i ? 1.0 : 0.5 * support->mult[t] * weight(i, j, sqdist(X, i, j)));
      }
    } else {
      for (long j = 0; j < N; ++j) fn(j, j == i ? 1.0 : weight(i, j, sqdist(X, i, j)));
    }
  };

  VectorXd scale = VectorXd::Ones(N);  // qS^-alpha
  if (alpha != 0.0) {
    for (long i = 0; i < N; ++i) {
      double s = 0.0;
      for_row(i, [&](long, double w) { s += w; });
      scale[i] = std::pow(s / std::pow(rho[i], d), -alpha);
    }
  }
  const double m = ShapeConstants::gaussian(d).m;
  const int power = formulation == Formulation::Symmetric ? 2 : 1;
  VectorXd out(N);
  for (long i = 0; i < N; ++i) {
    double num = 0.0, den = 0.0;
    for_row(i, [&](long j, double w) {
      const double wa = w * scale[j];
      num += wa * f[j];
      den += wa;
    });
    out[i] = (num / den - f[i]) / (eps * m * std::pow(rho[i], power));
  }
  return out;
}

}  // namespace vbdm
