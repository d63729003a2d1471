#include "vbdm/tuning.hpp"

#include "vbdm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace vbdm {

TuningCurve s_curve(const PointCloud& cloud, const VectorXd& rho, int lo, int hi, const SparsityPattern* support) {
  if (hi < lo) throw Error(ErrorCode::InvalidArgument, "empty tuning grid");
  const long N = cloud.size();
  if (rho.size() != N || !(rho.array() > 0.0).all())
    throw Error(ErrorCode::InvalidArgument, "rho must be positive with one entry per point");
  const MatrixXd& X = cloud.points();
  auto t_of = [&](long i, long j) {
    double s = 0.0;
    for (long c = 0; c < X.cols(); ++c) {
      const double d = X(i, c) - X(j, c);
      s += d * d;
    }
    return s / (4.0 * rho[i] * rho[j]);
  };

  // Off-diagonal (scaled distance, weight) pairs, each unordered pair once.
  std::vector<double> t, w;
  if (support) {
    for (long i = 0; i < N; ++i)
      for (int e = support->row_ptr[i]; e < support->row_ptr[i + 1]; ++e) {
        const long j = support->cols[e];
        if (j <= i) continue;
        t.push_back(t_of(i, j));
        w.push_back(0.5 * support->mult[e]);
      }
  } else {
    t.reserve(N * (N - 1) / 2);
    for (long i = 0; i < N; ++i)
      for (long j = i + 1; j < N; ++j) t.push_back(t_of(i, j));
    w.assign(t.size(), 1.0);
  }

  TuningCurve c;
  const int n = hi - lo + 1;
  c.eps.resize(n);
  c.S.resize(n);
  for (int g = 0; g < n; ++g) {
    const int e = lo + g;
    c.exponents.push_back(e);
    const double eps = std::ldexp(1.0, e);
    double s = 0.0;
    for (size_t p = 0; p < t.size(); ++p) s += w[p] * std::exp(-t[p] / eps);
    c.eps[g] = eps;
    c.S[g] = (double(N) + 2.0 * s) / (double(N) * double(N));
  }
  finish_curve(c);
  return c;
}

void finish_curve(TuningCurve& c) {
  const long n = c.S.size();
  c.slopes.resize(std::max<long>(n - 1, 0));
  for (long g = 0; g + 1 < n; ++g)
    c.slopes[g] = (std::log(c.S[g + 1]) - std::log(c.S[g])) / (std::log(c.eps[g + 1]) - std::log(c.eps[g]));
  if (n >= 2) {
    try {
      const auto ch = select_epsilon(c);
      c.eps_star = ch.eps_star;
      c.a_max = ch.a_max;
      c.d_hat = ch.d_hat;
    } catch (const Error&) {
      c.eps_star = c.a_max = c.d_hat = 0.0;
    }
  }
}

EpsilonChoice select_epsilon(const TuningCurve& curve) {
  const long n = curve.slopes.size();
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "tuning curve needs two grid points");
  long best = 0;
  for (long g = 1; g < n; ++g)
    if (curve.slopes[g] > curve.slopes[best]) best = g;
  const double a = curve.slopes[best];
  if (!(a > 1e-12)) throw Error(ErrorCode::NoLinearRegion, "S(eps) is flat over the whole grid");
  return {curve.eps[best], a, 2.0 * a};
}

int round_dimension(double d_hat) { return std::max(1, int(std::lround(d_hat))); }

void write_tuning_csv(const TuningCurve& curve, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
  std::fputs("i,eps,S,slope\n", f);
  for (long g = 0; g < curve.S.size(); ++g) {
    std::fprintf(f, "%d,%.17g,%.17g,", curve.exponents[g], curve.eps[g], curve.S[g]);
    if (g < curve.slopes.size()) std::fprintf(f, "%.17g", curve.slopes[g]);
    std::fputc('\n', f);
  }
  std::fclose(f);
}

}  // namespace vbdm
