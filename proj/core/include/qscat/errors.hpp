#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qscat {

enum class ErrorKind {
  InvalidArgument,
  EdgeLeak,
  NonSymmetric,
  OpenChannel,
  TailTooLarge,
  AtResonance,
  QuadratureFail,
  SharpResonanceUnresolved,
  NoRootInBranch,
  BranchCollision,
  SignConventionViolation,
  SingularSystem,
  Diverging,
  NoConvergence,
  UnphysicalAmplitude,
  PoleInWindow,
  FitWindowTooSmall,
  ContaminatedChannel,
};

std::string_view to_string(ErrorKind kind);

// Every solver failure is reported through this type; `kind()` is stable and
// machine-readable, `what()` is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

  // Coupling at which a pole was hit (AtResonance, SingularSystem).
  const std::optional<double>& pole() const noexcept { return pole_; }
  Error& with_pole(double coupling) {
    pole_ = coupling;
    return *this;
  }

 private:
  ErrorKind kind_;
  std::optional<double> pole_;
};

// Compact text for a double in error messages.
std::string format_number(double value);

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace qscat
