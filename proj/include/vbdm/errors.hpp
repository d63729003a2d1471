#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace vbdm {

enum class ErrorCode {
  InversionFailure,
  InvalidCovariance,
  WrongManifold,
  KTooLarge,
  DuplicatePoints,
  DisconnectedGraph,
  SolverFailure,
  DegenerateEigenvector,
  AlignmentAmbiguous,
  EmptyMask,
  NoLinearRegion,
  NoLatent,
  InvalidArgument,
  Io,
};

const char* to_string(ErrorCode code);

// Structured pipeline error. The payload fields are only meaningful for
// the codes that carry them.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const { return code_; }

  long index = -1;                      // DuplicatePoints
  long iterations = -1;                 // SolverFailure
  std::vector<long> component_sizes;    // DisconnectedGraph

  static Error duplicate_points(long i);
  static Error disconnected(std::vector<long> sizes);
  static Error solver_failure(long iterations);

 private:
  ErrorCode code_;
};

}  // namespace vbdm
