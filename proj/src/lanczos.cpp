#include "vbdm/lanczos.hpp"

#include "vbdm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace vbdm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd random_unit(long n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  VectorXd v(n);
  for (long i = 0; i < n; ++i) v[i] = g(rng);
  return v / v.norm();
}

// Orthogonalize w against the first j+1 columns of V, twice. Returns the
// accumulated coefficients.
VectorXd reorthogonalize(const MatrixXd& V, long j, VectorXd& w) {
  auto B = V.leftCols(j + 1);
  VectorXd h = B.transpose() * w;
  w.noalias() -= B * h;
  VectorXd h2 = B.transpose() * w;
  w.noalias() -= B * h2;
  return h + h2;
}

LanczosResult dense_path(const LinearOperator& op, long n, int nev) {
  MatrixXd A(n, n);
  VectorXd e = VectorXd::Zero(n), y;
  for (long c = 0; c < n; ++c) {
    e[c] = 1.0;
    op(e, y);
    A.col(c) = y;
    e[c] = 0.0;
  }
  A = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(A);
  LanczosResult r;
  r.values.resize(nev);
  r.vectors.resize(n, nev);
  for (int t = 0; t < nev; ++t) {
    r.values[t] = es.eigenvalues()[n - 1 - t];
    r.vectors.col(t) = es.eigenvectors().col(n - 1 - t);
  }
  r.matvecs = n;
  return r;
}

}  // namespace

LanczosResult lanczos_largest(const LinearOperator& op, long n, const LanczosOptions& opt) {
  const int nev = opt.nev;
  if (nev < 1 || nev >= n) throw Error(ErrorCode::InvalidArgument, "need 1 <= nev < n");
  int m = opt.ncv > 0 ? opt.ncv : std::max(2 * nev + 20, 40);
  m = std::max(m, nev + 2);
  if (n <= 2 * long(m)) return dense_path(op, n, nev);

  std::mt19937_64 rng(opt.seed);
  MatrixXd V(n, m + 1);
  MatrixXd T = MatrixXd::Zero(m, m);
  V.col(0) = random_unit(n, rng);
  VectorXd w;
  long matvecs = 0;
  int k = 0;
  double beta_last = 0.0;

  while (true) {
    for (int j = k; j < m; ++j) {
      op(V.col(j), w);
      ++matvecs;
      VectorXd h = reorthogonalize(V, j, w);
      for (int i = 0; i <= j; ++i) T(i, j) = T(j, i) = h[i];
      double beta = w.norm();
      if (beta <= 1e-12 * std::max(1.0, std::abs(h[j]))) {
        // Invariant subspace: continue with a fresh orthogonal direction.
        w = random_unit(n, rng);
        reorthogonalize(V, j, w);
        V.col(j + 1) = w / w.norm();
        beta = 0.0;
      } else {
        V.col(j + 1) = w / beta;
      }
      if (j == m - 1) beta_last = beta;
    }

    Eigen::SelfAdjointEigenSolver<MatrixXd> es(T);
    const VectorXd& theta = es.eigenvalues();  // ascending
    const MatrixXd& Y = es.eigenvectors();
    const double anorm = std::max(std::abs(theta[0]), std::abs(theta[m - 1]));
    bool done = true;
    for (int t = 0; t < nev; ++t) {
      const double res = std::abs(beta_last * Y(m - 1, m - 1 - t));
      if (res > opt.tol * anorm) {
        done = false;
        break;
      }
    }

    if (done) {
      LanczosResult r;
      r.values.resize(nev);
      MatrixXd Ysel(m, nev);
      for (int t = 0; t < nev; ++t) {
        r.values[t] = theta[m - 1 - t];
        Ysel.col(t) = Y.col(m - 1 - t);
      }
      r.vectors = V.leftCols(m) * Ysel;
      r.matvecs = matvecs;
      return r;
    }
    if (opt.max_matvecs > 0 && matvecs >= opt.max_matvecs) throw Error::solver_failure(matvecs);

    const int keep = std::clamp(nev + (m - nev) / 2, nev + 1, m - 2);
    MatrixXd Ykeep(m, keep);
    for (int t = 0; t < keep; ++t) Ykeep.col(t) = Y.col(m - 1 - t);
    MatrixXd Vkeep = V.leftCols(m) * Ykeep;
    V.col(keep) = V.col(m);
    V.leftCols(keep) = Vkeep;
    T.setZero();
    for (int t = 0; t < keep; ++t) T(t, t) = theta[m - 1 - t];
    k = keep;
  }
}

}  // namespace vbdm
