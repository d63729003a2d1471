#pragma once

#include "vbdm/neighbors.hpp"
#include "vbdm/point_cloud.hpp"

#include <string>
#include <vector>

namespace vbdm {

struct TuningCurve {
  std::vector<int> exponents;  // eps_i = 2^i
  VectorXd eps;
  VectorXd S;
  VectorXd slopes;             // forward differences, one fewer than S
  double eps_star = 0.0;
  double a_max = 0.0;
  double d_hat = 0.0;
};

// S(eps) = (1/N^2) sum_ij K_ij with the kernel used by kernel_matrix. Without a
// support every pair is summed.
TuningCurve s_curve(const PointCloud& cloud, const VectorXd& rho, int lo = -30, int hi = 10,
                    const SparsityPattern* support = nullptr);

struct EpsilonChoice {
  double eps_star, a_max, d_hat;
};
EpsilonChoice select_epsilon(const TuningCurve& curve);

// Fills the slope fields and the selection.
void finish_curve(TuningCurve& curve);

int round_dimension(double d_hat);

void write_tuning_csv(const TuningCurve& curve, const std::string& path);

}  // namespace vbdm
