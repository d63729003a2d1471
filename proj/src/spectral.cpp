#include "vbdm/spectral.hpp"

#include "vbdm/errors.hpp"
#include "vbdm/lanczos.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace vbdm {

SolverMode parse_solver_mode(const std::string& s) {
  if (s == "auto") return SolverMode::Auto;
  if (s == "direct") return SolverMode::Direct;
  if (s == "shift-invert" || s == "shift_invert") return SolverMode::ShiftInvert;
  throw Error(ErrorCode::InvalidArgument, "unknown solver mode '" + s + "'");
}

std::vector<long> connected_components(const SparseSymmetric& A) {
  const auto& p = A.pattern();
  const VectorXd& v = A.values();
  std::vector<long> comp(p.n, -1), sizes, stack;
  for (long s = 0; s < p.n; ++s) {
    if (comp[s] >= 0) continue;
    const long id = long(sizes.size());
    long count = 0;
    comp[s] = id;
    stack.push_back(s);
    while (!stack.empty()) {
      const long i = stack.back();
      stack.pop_back();
      ++count;
      for (int t = p.row_ptr[i]; t < p.row_ptr[i + 1]; ++t) {
        const long j = p.cols[t];
        if (j != i && v[t] != 0.0 && comp[j] < 0) {
          comp[j] = id;
          stack.push_back(j);
        }
      }
    }
    sizes.push_back(count);
  }
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  return sizes;
}

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

// Lower triangle of sigma I - A in compressed-column form. A is symmetric, so
// row i of its CSR storage is column i.
SpMat shifted_lower(const SparseSymmetric& A, double sigma) {
  const auto& p = A.pattern();
  const VectorXd& v = A.values();
  std::vector<int> outer(p.n + 1, 0);
  long count = 0;
  for (long i = 0; i < p.n; ++i) {
    for (int t = p.row_ptr[i]; t < p.row_ptr[i + 1]; ++t)
      if (p.cols[t] >= i) ++count;
    outer[i + 1] = int(count);
  }
  SpMat M(p.n, p.n);
  M.resizeNonZeros(count);
  std::copy(outer.begin(), outer.end(), M.outerIndexPtr());
  long pos = 0;
  for (long i = 0; i < p.n; ++i) {
    for (int t = p.row_ptr[i]; t < p.row_ptr[i + 1]; ++t) {
      const int j = p.cols[t];
      if (j < i) continue;
      M.innerIndexPtr()[pos] = j;
      M.valuePtr()[pos] = (j == i ? sigma : 0.0) - v[t];
      ++pos;
    }
  }
  return M;
}

}  // namespace

Spectrum eigs_near_zero(const GeneratorMatrices& gm, int M, const EigsOptions& opt) {
  const SparseSymmetric& A = gm.Lhat;
  const long N = A.rows();
  if (M < 1 || M >= N) throw Error(ErrorCode::InvalidArgument, "need 1 <= M < N");
  auto comps = connected_components(A);
  if (comps.size() > 1) throw Error::disconnected(std::move(comps));

  LanczosOptions lo;
  lo.nev = M;
  lo.ncv = opt.ncv;
  lo.tol = opt.tol;
  lo.max_matvecs = opt.max_iterations > 0 ? opt.max_iterations : long(10.0 * M * std::sqrt(double(N)));

  SolverMode mode = opt.mode;
  LanczosResult lr;
  if (mode != SolverMode::Direct) {
    using LDLT = Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>>;
    LDLT ldlt;
    const SpMat shifted = shifted_lower(A, opt.sigma);
    ldlt.analyzePattern(shifted);
    if (mode == SolverMode::Auto) {
      // Column counts are not exposed; assume an even spread of the fill.
      const double lnnz = double(ldlt.matrixL().nestedExpression().nonZeros());
      const double flops = lnnz * lnnz / double(N);
      const bool cheap = lnnz <= opt.max_factor_nnz && flops <= opt.factor_budget * double(A.pattern().nnz());
      mode = cheap ? SolverMode::ShiftInvert : SolverMode::Direct;
    }
    if (mode == SolverMode::ShiftInvert) {
      ldlt.factorize(shifted);
      if (ldlt.info() != Eigen::Success) throw Error::solver_failure(0);
      lr = lanczos_largest([&](const VectorXd& x, VectorXd& y) { y = ldlt.solve(x); }, N, lo);
    }
  }
  if (mode == SolverMode::Direct)
    lr = lanczos_largest([&](const VectorXd& x, VectorXd& y) { A.multiply(x, y); }, N, lo);

  // Rayleigh quotients with Lhat itself, in either mode.
  Spectrum sp;
  VectorXd lam(M), y;
  for (int c = 0; c < M; ++c) {
    const VectorXd v = lr.vectors.col(c);
    A.multiply(v, y);
    lam[c] = v.dot(y) / v.squaredNorm();
  }
  std::vector<int> order(M);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return lam[a] > lam[b]; });
  sp.eigenvalues.resize(M);
  sp.unit_vectors.resize(N, M);
  sp.eigenvectors.resize(N, M);
  for (int c = 0; c < M; ++c) {
    sp.eigenvalues[c] = lam[order[c]];
    sp.unit_vectors.col(c) = lr.vectors.col(order[c]).normalized();
    sp.eigenvectors.col(c) = sp.unit_vectors.col(c).cwiseQuotient(gm.S);
  }
  sp.matvecs = lr.matvecs;
  return sp;
}

Spectrum scale_sqrtN(const Spectrum& spectrum) {
  Spectrum out = spectrum;
  const double target = std::sqrt(double(out.eigenvectors.rows()));
  for (long c = 0; c < out.eigenvectors.cols(); ++c) {
    auto col = out.eigenvectors.col(c);
    const double n = col.norm();
    if (!(n > 0.0) || !std::isfinite(n))
      throw Error(ErrorCode::DegenerateEigenvector, "column " + std::to_string(c) + " has zero norm");
    col *= target / n;
    Eigen::Index imax;
    col.cwiseAbs().maxCoeff(&imax);
    if (col[imax] < 0.0) col *= -1.0;
  }
  out.scaled = true;
  return out;
}

std::vector<std::pair<int, int>> group_eigenvalues(const VectorXd& values, double rel) {
  std::vector<std::pair<int, int>> groups;
  const int n = int(values.size());
  int start = 0;
  for (int i = 1; i <= n; ++i) {
    const bool split = i == n || std::abs(values[i] - values[i - 1]) >
                                     rel * std::max(std::abs(values[i]), std::abs(values[i - 1]));
    if (split) {
      groups.emplace_back(start, i);
      start = i;
    }
  }
  return groups;
}

Alignment align_orthogonal(const MatrixXd& estimated, const MatrixXd& reference) {
  if (estimated.rows() != reference.rows() || estimated.cols() != reference.cols() || estimated.cols() < 1)
    throw Error(ErrorCode::InvalidArgument, "alignment shapes differ");
  const MatrixXd C = estimated.transpose() * reference;
  Eigen::JacobiSVD<MatrixXd> svd(C, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (!(s[0] > 0.0) || s[s.size() - 1] <= 1e-12 * s[0])
    throw Error(ErrorCode::AlignmentAmbiguous, "cross product is rank deficient");
  Alignment a;
  a.rotation = svd.matrixU() * svd.matrixV().transpose();
  a.aligned = estimated * a.rotation;
  return a;
}

LeastSquaresMap least_squares_map(const MatrixXd& estimated, const MatrixXd& targets) {
  if (estimated.rows() != targets.rows() || estimated.rows() < estimated.cols())
    throw Error(ErrorCode::InvalidArgument, "least squares needs N >= r and matching rows");
  LeastSquaresMap out;
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(estimated);
  out.B = cod.solve(targets);
  Eigen::JacobiSVD<MatrixXd> svd(estimated);
  const auto& s = svd.singularValues();
  out.condition = s[s.size() - 1] > 0.0 ? s[0] / s[s.size() - 1] : INFINITY;
  return out;
}

double mse(const VectorXd& a, const VectorXd& b, const std::optional<std::vector<long>>& mask) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "mse length mismatch");
  if (!mask) {
    if (a.size() == 0) throw Error(ErrorCode::EmptyMask, "no points");
    return (a - b).squaredNorm() / double(a.size());
  }
  if (mask->empty()) throw Error(ErrorCode::EmptyMask, "mask selects no points");
  double s = 0.0;
  for (long i : *mask) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / double(mask->size());
}

void write_spectrum_csv(const Spectrum& spectrum, const std::string& path, const MatrixXd* latent) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
  const long nl = latent ? latent->cols() : 0;
  const long M = spectrum.eigenvalues.size();
  for (long c = 0; c < nl; ++c) std::fputc(',', f);
  for (long c = 0; c < M; ++c) std::fprintf(f, c ? ",%.17g" : "%.17g", spectrum.eigenvalues[c]);
  std::fputc('\n', f);
  for (long i = 0; i < spectrum.eigenvectors.rows(); ++i) {
    for (long c = 0; c < nl; ++c) std::fprintf(f, "%.17g,", (*latent)(i, c));
    for (long c = 0; c < M; ++c) std::fprintf(f, c ? ",%.17g" : "%.17g", spectrum.eigenvectors(i, c));
    std::fputc('\n', f);
  }
  std::fclose(f);
}

}  // namespace vbdm
