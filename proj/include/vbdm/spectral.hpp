#pragma once

#include "vbdm/kernel.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vbdm {

struct Spectrum {
  VectorXd eigenvalues;   // descending
  MatrixXd eigenvectors;  // U = S^-1 Uhat
  MatrixXd unit_vectors;  // Uhat, orthonormal
  bool scaled = false;
  long matvecs = 0;
};

enum class SolverMode { Auto, Direct, ShiftInvert };
SolverMode parse_solver_mode(const std::string& s);

struct EigsOptions {
  SolverMode mode = SolverMode::Auto;
  double sigma = 1e-3;       // shift for the inverted operator (sigma I - Lhat)^-1
  double tol = 1e-10;
  long max_iterations = 0;   // operator applications; 0 means 10 M sqrt(N)
  int ncv = 0;
  // Auto: shift-invert when the factor fits in max_factor_nnz entries and its
  // estimated cost is below factor_budget operator applications.
  double max_factor_nnz = 1.5e8;
  double factor_budget = 2000.0;
};

// Sizes of the connected components of the positive off-diagonal entries of
// Lhat, largest first.
std::vector<long> connected_components(const SparseSymmetric& A);

Spectrum eigs_near_zero(const GeneratorMatrices& gm, int M, const EigsOptions& opt = {});
Spectrum scale_sqrtN(const Spectrum& spectrum);

// Index ranges [first, last) of eigenvalues within relative rel of a neighbour.
std::vector<std::pair<int, int>> group_eigenvalues(const VectorXd& values, double rel = 1e-2);

struct Alignment {
  MatrixXd rotation;
  MatrixXd aligned;
};
Alignment align_orthogonal(const MatrixXd& estimated, const MatrixXd& reference);

struct LeastSquaresMap {
  MatrixXd B;
  double condition = 1.0;
};
LeastSquaresMap least_squares_map(const MatrixXd& estimated, const MatrixXd& targets);

double mse(const VectorXd& a, const VectorXd& b, const std::optional<std::vector<long>>& mask = std::nullopt);

void write_spectrum_csv(const Spectrum& spectrum, const std::string& path, const MatrixXd* latent = nullptr);

}  // namespace vbdm
