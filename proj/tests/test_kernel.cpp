#include <doctest.h>

#include "vbdm/density.hpp"
#include "vbdm/errors.hpp"
#include "vbdm/kernel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace vbdm;

namespace {

PointCloud random_cloud(long N, int dim, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXd P(N, dim);
  for (long i = 0; i < N; ++i)
    for (int c = 0; c < dim; ++c) P(i, c) = g(rng);
  return PointCloud(P, std::nullopt, dim, "random");
}

VectorXd random_positive(long N, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  VectorXd v(N);
  for (long i = 0; i < N; ++i) v[i] = u(rng);
  return v;
}

std::shared_ptr<const SparsityPattern> dense(long n) {
  return std::make_shared<const SparsityPattern>(full_support(n));
}

MatrixXd dense_kernel(const PointCloud& c, const VectorXd& rho, double eps) {
  const long N = c.size();
  MatrixXd K(N, N);
  for (long i = 0; i < N; ++i)
    for (long j = 0; j < N; ++j)
      K(i, j) = std::exp(-(c.points().row(i) - c.points().row(j)).squaredNorm() / (4.0 * eps * rho[i] * rho[j]));
  return K;
}

}  // namespace

TEST_CASE("Gaussian shape constants") {
  for (int d = 1; d <= 3; ++d) {
    const ShapeConstants s = ShapeConstants::gaussian(d);
    CHECK(s.m == 1.0);
    CHECK(s.m0 == doctest::Approx(std::pow(4.0 * std::numbers::pi, d / 2.0)));
    CHECK(s.m2 == doctest::Approx(s.m0));
    CHECK(s.m0_hat == doctest::Approx(std::pow(2.0 * std::numbers::pi, d / 2.0)));
  }
  // one-dimensional midpoint quadrature of m0, m2 and the hatted moments
  double m0 = 0, m2 = 0, h0 = 0, h2 = 0;
  const double h = 1e-3;
  for (double z = -40.0 + h / 2; z < 40.0; z += h) {
    const double e = std::exp(-z * z / 4.0);
    m0 += e * h;
    m2 += 0.5 * z * z * e * h;
    h0 += e * e * h;
    h2 += z * z * e * e * h;
  }
  const ShapeConstants s = ShapeConstants::gaussian(1);
  CHECK(m0 == doctest::Approx(s.m0).epsilon(1e-10));
  CHECK(m2 == doctest::Approx(s.m2).epsilon(1e-10));
  CHECK(h0 == doctest::Approx(s.m0_hat).epsilon(1e-10));
  CHECK(h2 == doctest::Approx(s.m2_hat).epsilon(1e-10));
}

TEST_CASE("kernel entries") {
  const double eps = 0.3;
  MatrixXd P(2, 1);
  P << 0.0, 2.0 * std::sqrt(eps);
  const PointCloud c(P, std::nullopt, 1, "pair");
  const SparseSymmetric K = kernel_matrix(c, VectorXd::Ones(2), eps, dense(2));
  CHECK(K.at(0, 0) == 1.0);
  CHECK(K.at(1, 1) == 1.0);
  CHECK(K.at(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("full-support kernel equals the dense oracle") {
  const PointCloud c = random_cloud(30, 2, 1);
  const VectorXd rho = random_positive(30, 2);
  const SparseSymmetric K = kernel_matrix(c, rho, 0.2, dense(30));
  CHECK((K.to_dense() - dense_kernel(c, rho, 0.2)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(K.asymmetry() < 1e-14);
}

TEST_CASE("truncated kernel halves one-way entries") {
  const PointCloud c = random_cloud(40, 2, 3);
  const VectorXd rho = random_positive(40, 4);
  const NeighborGraph g = knn(c, 5);
  const auto sup = std::make_shared<const SparsityPattern>(symmetrized_support(g));
  const MatrixXd K = kernel_matrix(c, rho, 0.1, sup).to_dense();
  MatrixXd T = MatrixXd::Zero(40, 40);
  const MatrixXd F = dense_kernel(c, rho, 0.1);
  for (long i = 0; i < 40; ++i)
    for (int t = 0; t < 5; ++t) T(i, g.indices(i, t)) = F(i, g.indices(i, t));
  const MatrixXd S = 0.5 * (T + T.transpose());
  for (long i = 0; i < 40; ++i)
    for (long j = 0; j < 40; ++j) CHECK(std::abs(K(i, j) - (i == j ? 1.0 : S(i, j))) < 1e-15);
}

TEST_CASE("qS normalization") {
  SUBCASE("single point") {
    auto p = std::make_shared<SparsityPattern>();
    p->n = 1;
    p->row_ptr = {0, 1};
    p->cols = {0};
    p->mult = {2};
    p->diag_pos = {0};
    const SparseSymmetric K(p, VectorXd::Ones(1));
    const VectorXd q = qS_normalization(K, VectorXd::Constant(1, 2.0), 3);
    CHECK(q[0] == doctest::Approx(1.0 / 8.0));
  }
  SUBCASE("unit bandwidth gives row sums") {
    const PointCloud c = random_cloud(25, 2, 5);
    const SparseSymmetric K = kernel_matrix(c, VectorXd::Ones(25), 0.5, dense(25));
    CHECK((qS_normalization(K, VectorXd::Ones(25), 2) - K.row_sums()).norm() == 0.0);
  }
  SUBCASE("uniform circle density") {
    const long N = 2000;
    const double eps = 0.001;
    const PointCloud c = gen_circle_uniform(N);
    const SparseSymmetric K = kernel_matrix(c, VectorXd::Ones(N), eps, dense(N));
    const VectorXd q = qS_normalization(K, VectorXd::Ones(N), 1) / (N * std::sqrt(4.0 * std::numbers::pi * eps));
    for (long i = 0; i < N; i += 37) CHECK(std::abs(q[i] * 2.0 * std::numbers::pi - 1.0) < 0.10);
  }
}

TEST_CASE("alpha normalization") {
  const PointCloud c = random_cloud(20, 2, 6);
  const SparseSymmetric K = kernel_matrix(c, random_positive(20, 7), 0.3, dense(20));
  const VectorXd qS = random_positive(20, 8);
  const auto [K0, q0] = alpha_normalize(K, qS, 0.0);
  CHECK(K0.values() == K.values());
  CHECK((q0 - K.row_sums()).norm() == 0.0);
  const auto [K1, q1] = alpha_normalize(K, qS, 1.0);
  for (long i = 0; i < 20; ++i)
    for (long j = 0; j < 20; ++j)
      CHECK(K1.at(i, j) == doctest::Approx(K.at(i, j) / (qS[i] * qS[j])).epsilon(1e-14));
  const auto [Kh, qh] = alpha_normalize(K, qS, 0.37);
  CHECK(Kh.asymmetry() < 1e-14);
  CHECK((qh - Kh.row_sums()).norm() == 0.0);
}

TEST_CASE("symmetric generator") {
  const long N = 50;
  const PointCloud c = random_cloud(N, 2, 9);
  const VectorXd rho = random_positive(N, 10);
  const GeneratorMatrices gm = build_generator(c, rho, 0.4, 0.3, 2, dense(N));

  SUBCASE("invariants") {
    CHECK(gm.Lhat.asymmetry() < 1e-12);
    CHECK((gm.khat_row_sums().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(gm.apply_L(VectorXd::Ones(N)).cwiseAbs().maxCoeff() < 1e-10);
    VectorXd y;
    gm.Lhat.multiply(gm.S, y);
    CHECK(y.cwiseAbs().maxCoeff() < 1e-10);
    CHECK((gm.S - rho.cwiseProduct(gm.q_eps_alpha.cwiseSqrt())).norm() == 0.0);
  }
  SUBCASE("same spectrum as the non-symmetric generator") {
    const MatrixXd Ka = gm.Kalpha.to_dense();
    const MatrixXd L = rho.array().square().inverse().matrix().asDiagonal() *
                       (gm.q_eps_alpha.cwiseInverse().asDiagonal() * Ka - MatrixXd::Identity(N, N)) / 0.4;
    Eigen::EigenSolver<MatrixXd> es(L);
    std::vector<double> a;
    for (long i = 0; i < N; ++i) {
      CHECK(std::abs(es.eigenvalues()[i].imag()) < 1e-10);
      a.push_back(es.eigenvalues()[i].real());
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> ss(gm.Lhat.to_dense());
    std::sort(a.begin(), a.end());
    for (long i = 0; i < N; ++i) CHECK(std::abs(a[i] - ss.eigenvalues()[i]) < 1e-10 * std::max(1.0, std::abs(a[i])));
    CHECK(ss.eigenvalues().maxCoeff() <= 1e-8);
    CHECK(std::abs(ss.eigenvalues()[N - 1]) < 1e-8);
    CHECK(ss.eigenvalues()[N - 2] < -1e-8);
  }
  SUBCASE("lean build matches") {
    const GeneratorMatrices lean = build_generator(c, rho, 0.4, 0.3, 2, dense(N), false);
    CHECK(lean.K.empty());
    CHECK((lean.Lhat.values() - gm.Lhat.values()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((lean.khat_row_sums().array() - 1.0).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("unit bandwidth, alpha zero is the normalized graph Laplacian") {
  const long N = 40;
  const PointCloud c = random_cloud(N, 3, 11);
  const double eps = 0.25;
  const GeneratorMatrices gm = build_generator(c, VectorXd::Ones(N), eps, 0.0, 3, dense(N));
  const MatrixXd W = dense_kernel(c, VectorXd::Ones(N), eps);
  const VectorXd deg = W.rowwise().sum();
  const MatrixXd Dm = deg.cwiseSqrt().cwiseInverse().asDiagonal();
  const MatrixXd expect = (Dm * W * Dm - MatrixXd::Identity(N, N)) / eps;
  CHECK((gm.Lhat.to_dense() - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pointwise operators against direct sums") {
  const long N = 60;
  const PointCloud c = random_cloud(N, 2, 12);
  const VectorXd rho = random_positive(N, 13);
  const VectorXd f = random_positive(N, 14);
  const double eps = 0.3;
  for (auto form : {Formulation::Left, Formulation::Right, Formulation::Symmetric}) {
    for (double alpha : {0.0, 0.5}) {
      const VectorXd got = apply_generator(c, rho, eps, alpha, form, f, 2);
      MatrixXd K(N, N);
      for (long i = 0; i < N; ++i)
        for (long j = 0; j < N; ++j) {
          const double r2 = (c.points().row(i) - c.points().row(j)).squaredNorm();
          const double s = form == Formulation::Left ? rho[i] : form == Formulation::Right ? rho[j] : rho[i] * rho[j];
          K(i, j) = std::exp(-r2 / (4.0 * eps * s));
        }
      const VectorXd qS = K.rowwise().sum().cwiseQuotient(rho.array().square().matrix());
      const VectorXd w = qS.array().pow(-alpha);
      const MatrixXd Ka = K * w.asDiagonal();
      const int p = form == Formulation::Symmetric ? 2 : 1;
      for (long i = 0; i < N; ++i) {
        const double expect = (Ka.row(i).dot(f) / Ka.row(i).sum() - f[i]) / (eps * std::pow(rho[i], p));
        CHECK(got[i] == doctest::Approx(expect).epsilon(1e-12));
      }
    }
  }
  // full support pattern gives the same as the matrix-free sums
  const SparsityPattern full = full_support(N);
  const VectorXd a = apply_generator(c, rho, eps, 0.5, Formulation::Symmetric, f, 2);
  const VectorXd b = apply_generator(c, rho, eps, 0.5, Formulation::Symmetric, f, 2, &full);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("classical operators converge at first order") {
  const long N = 3000;
  const PointCloud c = gen_circle_uniform(N);
  VectorXd f(N), target(N);
  for (long i = 0; i < N; ++i) {
    const double t = (*c.latent())(i, 0);
    f[i] = std::sin(t) + 0.5 * std::cos(2 * t);
    target[i] = -std::sin(t) - 2.0 * std::cos(2 * t);
  }
  for (double alpha : {1.0, 0.5}) {
    double err[2];
    int n = 0;
    for (double eps : {0.1, 0.01}) {
      const VectorXd Lf = apply_generator(c, VectorXd::Ones(N), eps, alpha, Formulation::Symmetric, f, 1);
      err[n++] = std::sqrt((Lf - target).squaredNorm() / N);
    }
    const double slope = std::log10(err[0] / err[1]);
    CHECK(slope > 0.8);
    CHECK(slope < 1.2);
  }
}
