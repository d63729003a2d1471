#include <doctest.h>

#include "vbdm/errors.hpp"
#include "vbdm/point_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>

using namespace vbdm;

TEST_CASE("erf_inv inverts erf") {
  CHECK(erf_inv(0.0) == 0.0);
  for (double y = -0.999; y < 1.0; y += 0.0371) {
    const double x = erf_inv(y);
    CHECK(std::abs(std::erf(x) - y) < 1e-14);
    CHECK(erf_inv(-y) == doctest::Approx(-x).epsilon(1e-14));
  }
  CHECK(std::abs(std::erf(erf_inv(1.0 - 1e-10)) - (1.0 - 1e-10)) < 1e-15);
  CHECK_THROWS_AS(erf_inv(1.5), Error);
}

TEST_CASE("circle CDF inverse") {
  CHECK(circle_cdf_inverse(0.5) == std::numbers::pi);
  const long N = 1500;
  const PointCloud c = gen_circle_nonuniform(N);
  REQUIRE(c.size() == N);
  CHECK(c.intrinsic_dim() == 1);
  const auto& th = c.latent()->col(0);
  double ks = 0.0;
  for (long i = 0; i < N; ++i) {
    const double t = double(i + 1) / double(N + 1);
    CHECK(std::abs(circle_cdf(th[i]) - t) < 1e-10);
    CHECK(std::abs(c.points().row(i).norm() - 1.0) < 1e-12);
    CHECK(th[i] >= 0.0);
    CHECK(th[i] < 2.0 * std::numbers::pi);
    // empirical CDF jumps to (i+1)/N at theta_i
    ks = std::max({ks, std::abs(double(i + 1) / N - circle_cdf(th[i])), std::abs(double(i) / N - circle_cdf(th[i]))});
  }
  CHECK(ks < 2.0 / N);
}

TEST_CASE("nice Gaussian grid") {
  const PointCloud c = gen_gaussian_nice_1d(2001);
  const auto x = c.points().col(0);
  CHECK(x[1000] == 0.0);
  for (long i = 0; i < 2001; ++i) CHECK(std::abs(x[i] + x[2000 - i]) < 1e-12);
  for (long i = 1; i < 2001; ++i) CHECK(x[i] > x[i - 1]);
  const PointCloud c2 = gen_gaussian_nice_1d(2000);
  CHECK(c2.size() == 2000);
  CHECK(c2.points()(0, 0) == doctest::Approx(std::numbers::sqrt2 * erf_inv(2.0 / 2001.0 - 1.0)));
}

TEST_CASE("random Gaussian samples") {
  const long N = 20000;
  const PointCloud a = gen_gaussian_random(N, 1, MatrixXd::Identity(1, 1), 3);
  CHECK(std::abs(a.points().col(0).mean()) < 4.0 / std::sqrt(double(N)));
  const PointCloud b = gen_gaussian_random(10000, 2, MatrixXd::Identity(2, 2), 4);
  for (int c = 0; c < 2; ++c) CHECK(std::abs(b.points().col(c).mean()) < 4.0 / 100.0);
  const PointCloud a2 = gen_gaussian_random(N, 1, MatrixXd::Identity(1, 1), 3);
  CHECK(a.points() == a2.points());
  MatrixXd bad(2, 2);
  bad << 1, 2, 2, 1;
  CHECK_THROWS_AS(gen_gaussian_random(10, 2, bad, 1), Error);
  try {
    gen_gaussian_random(10, 2, bad, 1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidCovariance);
  }
}

TEST_CASE("sphere samples") {
  const PointCloud s = gen_sphere_nonuniform(3000, random_spd_covariance(3, 7), 8);
  CHECK(s.intrinsic_dim() == 2);
  for (long i = 0; i < s.size(); ++i) CHECK(std::abs(s.points().row(i).norm() - 1.0) < 1e-12);

  const long N = 8000;
  const PointCloud u = gen_sphere_nonuniform(N, MatrixXd::Identity(3, 3), 9);
  int counts[8] = {0};
  for (long i = 0; i < N; ++i) {
    int o = 0;
    for (int c = 0; c < 3; ++c) o |= (u.points()(i, c) > 0.0) << c;
    ++counts[o];
  }
  const double sd = std::sqrt(N * (1.0 / 8) * (7.0 / 8));
  for (int o = 0; o < 8; ++o) CHECK(std::abs(counts[o] - N / 8.0) < 5.0 * sd);
}

TEST_CASE("random covariance is SPD") {
  for (int s = 1; s <= 5; ++s) {
    const MatrixXd C = random_spd_covariance(3, s);
    CHECK((C - C.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(C);
    CHECK(es.eigenvalues().minCoeff() >= 0.1 - 1e-12);
  }
}

TEST_CASE("torus grid") {
  const PointCloud t = gen_torus_grid(250);
  CHECK(t.size() == 62500);
  CHECK(t.intrinsic_dim() == 2);
  for (long i = 0; i < t.size(); i += 97) CHECK(std::abs(t.points().row(i).norm() - std::sqrt(2.0)) < 1e-12);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<long> pick(0, t.size() - 1);
  for (int r = 0; r < 10; ++r) {
    const long a = pick(rng), b = pick(rng);
    const double dth = (*t.latent())(a, 0) - (*t.latent())(b, 0);
    const double dph = (*t.latent())(a, 1) - (*t.latent())(b, 1);
    const double chord = 2.0 * std::sqrt(std::pow(std::sin(dth / 2), 2) + std::pow(std::sin(dph / 2), 2));
    CHECK(std::abs((t.points().row(a) - t.points().row(b)).norm() - chord) < 1e-12);
  }
}

TEST_CASE("circle perturbation") {
  const PointCloud c = gen_circle_nonuniform(500);
  const PointCloud same = perturb_circle(c, 0.0, 1);
  CHECK(same.points() == c.points());
  CHECK(*same.latent() == *c.latent());
  const PointCloud p = perturb_circle(c, 0.5, 2);
  for (long i = 0; i < p.size(); ++i) {
    const double t = (*p.latent())(i, 0);
    CHECK(t >= 0.0);
    CHECK(t < 2.0 * std::numbers::pi);
    CHECK(std::abs(p.points().row(i).norm() - 1.0) < 1e-12);
    double shift = t - (*c.latent())(i, 0);
    if (shift < 0) shift += 2.0 * std::numbers::pi;
    CHECK(shift <= 0.5 + 1e-12);
  }
  const PointCloud g = gen_gaussian_nice_1d(10);
  CHECK_THROWS_AS(perturb_circle(g, 0.5, 1), Error);
  try {
    perturb_circle(g, 0.5, 1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::WrongManifold);
  }
}

TEST_CASE("von Mises circle sample") {
  const PointCloud c = gen_circle_von_mises(20000, 11);
  // E[cos theta] = I1(1) / I0(1)
  const double expect = std::cyl_bessel_i(1.0, 1.0) / std::cyl_bessel_i(0.0, 1.0);
  double m = 0.0;
  for (long i = 0; i < c.size(); ++i) m += std::cos((*c.latent())(i, 0));
  m /= c.size();
  CHECK(std::abs(m - expect) < 0.02);
}

TEST_CASE("cloud CSV round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "vbdm_cloud_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "c.csv").string();
  const PointCloud t = gen_torus_grid(5);
  write_cloud_csv(t, path);
  const PointCloud r = read_cloud_csv(path, 2, "torus");
  CHECK(r.points() == t.points());
  CHECK(*r.latent() == *t.latent());
  std::FILE* f = std::fopen(path.c_str(), "r");
  char header[64] = {0};
  REQUIRE(std::fgets(header, sizeof header, f));
  std::fclose(f);
  CHECK(std::string(header) == "x1,x2,x3,x4,theta,phi\n");
}

TEST_CASE("invalid clouds are rejected") {
  CHECK_THROWS_AS(PointCloud(MatrixXd::Zero(1, 2), std::nullopt, std::nullopt, "x"), Error);
  MatrixXd p = MatrixXd::Zero(3, 2);
  p(1, 1) = NAN;
  CHECK_THROWS_AS(PointCloud(p, std::nullopt, std::nullopt, "x"), Error);
  CHECK_THROWS_AS(PointCloud(MatrixXd::Ones(3, 3), std::nullopt, 2, "sphere"), Error);
}
