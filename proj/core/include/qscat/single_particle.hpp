#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "qscat/lattice.hpp"

namespace qscat {

struct CutoffOptions {
  std::optional<int> n_cut;      // highest channel index summed; adaptive when empty
  double term_rel_tol = 1e-12;   // adaptive stop: next even term relative to the sum
  double tail_tol = 1e-10;       // TailTooLarge above this bound
};

struct CirValue {
  double inverse = 0.0;   // 1/U_CIR
  double k = 0.0;
  int n_cut = 0;          // highest channel index included
  double tail_bound = 0.0;

  // Empty when no closed channel couples to the origin.
  std::optional<double> value() const {
    if (inverse == 0.0) return std::nullopt;
    return 1.0 / inverse;
  }
};

struct ChannelAmplitude {
  int n;
  double alpha;
  double denominator;
  double amplitude;
};

struct ScatteringResult {
  double u = 0.0;
  double k = 0.0;
  double u1d = 0.0;
  std::optional<double> scattering_length;  // k = 0 only; empty when U1D = 0
  std::optional<double> delta;              // k > 0 only, in (-pi/2, pi/2]
  std::optional<double> tan_delta;
  std::vector<ChannelAmplitude> amplitudes;
  CirValue cir;
};

// Band energy of the incoming wave in the trap ground channel.
inline double band_energy(double e0, double k) { return -2.0 * kHopping * std::cos(k) + e0; }

CirValue u_cir(const TransverseSpectrum& spectrum, double k, const CutoffOptions& options = {});

// Effective 1D coupling for a given closed-channel sum. Throws AtResonance
// when U sits on the pole of 1/(1 - U/U_CIR).
ScatteringResult effective_u1d(const TransverseSpectrum& spectrum, double u, double k,
                               const CutoffOptions& options = {});
ScatteringResult effective_u1d(const TransverseSpectrum& spectrum, double u, const CirValue& cir);

}  // namespace qscat
