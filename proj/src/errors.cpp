#include "vbdm/errors.hpp"

#include <sstream>

namespace vbdm {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InversionFailure: return "InversionFailure";
    case ErrorCode::InvalidCovariance: return "InvalidCovariance";
    case ErrorCode::WrongManifold: return "WrongManifold";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::DuplicatePoints: return "DuplicatePoints";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::DegenerateEigenvector: return "DegenerateEigenvector";
    case ErrorCode::AlignmentAmbiguous: return "AlignmentAmbiguous";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::NoLinearRegion: return "NoLinearRegion";
    case ErrorCode::NoLatent: return "NoLatent";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

Error Error::duplicate_points(long i) {
  Error e(ErrorCode::DuplicatePoints, "zero pilot bandwidth at point " + std::to_string(i));
  e.index = i;
  return e;
}

Error Error::disconnected(std::vector<long> sizes) {
  std::ostringstream os;
  os << sizes.size() << " components, sizes";
  for (size_t c = 0; c < sizes.size() && c < 8; ++c) os << ' ' << sizes[c];
  if (sizes.size() > 8) os << " ...";
  Error e(ErrorCode::DisconnectedGraph, os.str());
  e.component_sizes = std::move(sizes);
  return e;
}

Error Error::solver_failure(long iterations) {
  Error e(ErrorCode::SolverFailure, "no convergence after " + std::to_string(iterations) + " operator applications");
  e.iterations = iterations;
  return e;
}

}  // namespace vbdm
