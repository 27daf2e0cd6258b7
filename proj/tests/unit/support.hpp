#pragma once

#include <functional>

#include <gtest/gtest.h>

#include "qscat/errors.hpp"
#include "qscat/lattice.hpp"

namespace qscat::test {

inline ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no qscat::Error thrown";
  return ErrorKind::InvalidArgument;
}

inline TransverseSpectrum harmonic_spectrum(double omega) {
  return solve_transverse(TrapSpec::harmonic(omega, auto_half_width(Harmonic{omega}, 1)));
}

// Hard-wall box of nc sites, every state kept.
inline TransverseSpectrum harmonic_box(double omega, int nc) {
  return solve_transverse(TrapSpec::harmonic(omega, (nc - 1) / 2), {.check_edges = false});
}

}  // namespace qscat::test
