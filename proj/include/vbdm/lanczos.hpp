#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>

namespace vbdm {

struct LanczosOptions {
  int nev = 1;
  int ncv = 0;              // basis size; 0 picks max(2 nev + 20, 40)
  double tol = 1e-10;       // residual relative to the largest Ritz magnitude
  long max_matvecs = 0;     // 0 means unlimited
  std::uint64_t seed = 0x5eed;
};

struct LanczosResult {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // orthonormal columns
  long matvecs = 0;
};

using LinearOperator = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

// Largest algebraic eigenpairs of a symmetric operator by thick-restart
// Lanczos with full (twice-iterated Gram-Schmidt) reorthogonalization.
// Throws SolverFailure when max_matvecs is exhausted.
LanczosResult lanczos_largest(const LinearOperator& op, long n, const LanczosOptions& opt);

}  // namespace vbdm
