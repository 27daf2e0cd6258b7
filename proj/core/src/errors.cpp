#include "qscat/errors.hpp"

#include <cstdio>

namespace qscat {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::EdgeLeak: return "EdgeLeak";
    case ErrorKind::NonSymmetric: return "NonSymmetric";
    case ErrorKind::OpenChannel: return "OpenChannel";
    case ErrorKind::TailTooLarge: return "TailTooLarge";
    case ErrorKind::AtResonance: return "AtResonance";
    case ErrorKind::QuadratureFail: return "QuadratureFail";
    case ErrorKind::SharpResonanceUnresolved: return "SharpResonanceUnresolved";
    case ErrorKind::NoRootInBranch: return "NoRootInBranch";
    case ErrorKind::BranchCollision: return "BranchCollision";
    case ErrorKind::SignConventionViolation: return "SignConventionViolation";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::Diverging: return "Diverging";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::UnphysicalAmplitude: return "UnphysicalAmplitude";
    case ErrorKind::PoleInWindow: return "PoleInWindow";
    case ErrorKind::FitWindowTooSmall: return "FitWindowTooSmall";
    case ErrorKind::ContaminatedChannel: return "ContaminatedChannel";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace qscat
