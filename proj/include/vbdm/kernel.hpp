#pragma once

#include "vbdm/neighbors.hpp"
#include "vbdm/point_cloud.hpp"

#include <memory>
#include <string>
#include <utility>

namespace vbdm {

// Moments of the shape h(u) = exp(-u/4) in dimension d.
struct ShapeConstants {
  double m0, m2, m, m0_hat, m2_hat;
  static ShapeConstants gaussian(int d);
};

// Symmetric sparse matrix over a shared pattern.
class SparseSymmetric {
 public:
  SparseSymmetric() = default;
  SparseSymmetric(std::shared_ptr<const SparsityPattern> pattern, VectorXd values);

  const SparsityPattern& pattern() const { return *pattern_; }
  const std::shared_ptr<const SparsityPattern>& pattern_ptr() const { return pattern_; }
  const VectorXd& values() const { return values_; }
  VectorXd& values() { return values_; }
  bool empty() const { return !pattern_; }
  long rows() const { return pattern_ ? pattern_->n : 0; }

  void multiply(const VectorXd& x, VectorXd& y) const;
  VectorXd row_sums() const;
  double diagonal(long i) const { return values_[pattern_->diag_pos[i]]; }
  double at(long i, long j) const;
  // max |A_ij - A_ji| / max |A_ij|
  double asymmetry() const;
  MatrixXd to_dense() const;
  void write_triples(const std::string& path) const;

 private:
  std::shared_ptr<const SparsityPattern> pattern_;
  VectorXd values_;
};

struct GeneratorMatrices {
  double eps = 0.0;
  double alpha = 0.0;
  SparseSymmetric K;        // empty when built lean
  VectorXd qS;
  SparseSymmetric Kalpha;   // empty when built lean
  VectorXd q_eps_alpha;
  SparseSymmetric Lhat;
  VectorXd P, D, S;

  // L f = S^-1 Lhat S f = P^-2 (D^-1 Kalpha - I) f / eps
  VectorXd apply_L(const VectorXd& f) const;
  // Row sums of D^-1 Kalpha, recovered from Lhat.
  VectorXd khat_row_sums() const;
};

// K_ij = (mult_ij / 2) exp(-|xi - xj|^2 / (4 eps rho_i rho_j)), K_ii = 1.
SparseSymmetric kernel_matrix(const PointCloud& cloud, const VectorXd& rho, double eps,
                              std::shared_ptr<const SparsityPattern> support);
VectorXd qS_normalization(const SparseSymmetric& K, const VectorXd& rho, int d);
std::pair<SparseSymmetric, VectorXd> alpha_normalize(const SparseSymmetric& K, const VectorXd& qS, double alpha);
GeneratorMatrices generator_symmetric(const SparseSymmetric& Kalpha, const VectorXd& q_eps_alpha,
                                      const VectorXd& rho, double eps);

// Full cascade. With keep_intermediate = false only Lhat and the diagonals
// are kept, and a single value array is transformed in place.
GeneratorMatrices build_generator(const PointCloud& cloud, const VectorXd& rho, double eps, double alpha, int d,
                                  std::shared_ptr<const SparsityPattern> support, bool keep_intermediate = true);

enum class Formulation { Left, Right, Symmetric };
Formulation parse_formulation(const std::string& s);

// Pointwise operator estimate. Without a support the sums run over all pairs
// without storing the kernel. d is only used when alpha != 0.
VectorXd apply_generator(const PointCloud& cloud, const VectorXd& rho, double eps, double alpha,
                         Formulation formulation, const VectorXd& f, int d = 1,
                         const SparsityPattern* support = nullptr);

}  // namespace vbdm
