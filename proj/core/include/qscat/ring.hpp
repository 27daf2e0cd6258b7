#pragma once

#include <utility>
#include <vector>

#include "qscat/lattice.hpp"

namespace qscat {

struct RingSolution {
  int length = 0;
  double u = 0.0;
  int branch = 0;     // nearest free momentum 2*pi*branch/L
  double k = 0.0;
  double energy = 0.0;  // -2J cos k, trap zero mode excluded
  double residual = 0.0;
};

struct RingOptions {
  int scan_per_branch = 64;
  double collision_tol = 1e-8;
  double residual_tol = 1e-10;
  int max_branch = -1;  // ring_solutions stops after this branch; all when negative
};

// Closed-channel sum on a ring of L sites: sum_n |psi_n(0)|^2 (1 + a^L) /
// (J (1/a - a)(1 - a^L)). Open channels (|a| = 1) are included through the
// complex root and give a real contribution.
double ring_channel_sum(const TransverseSpectrum& spectrum, double k, int length);

// Quantization function whose zeros are the allowed momenta:
// 2J sin k sin(kL/2) (1 + U S_L) - U |psi_0(0)|^2 cos(kL/2).
double ring_residual(const TransverseSpectrum& spectrum, double u, int length, double k);

// Every allowed momentum in (0, pi), ascending.
std::vector<RingSolution> ring_solutions(const TransverseSpectrum& spectrum, double u, int length,
                                         const RingOptions& options = {});

RingSolution ring_momentum(const TransverseSpectrum& spectrum, double u, int length, int branch,
                           const RingOptions& options = {});

struct RingCrossing {
  int index;        // fermionized momentum (2 index + 1) pi / L
  double k;
  double u;
};

// Couplings at which an allowed energy equals a fermionized energy. Only
// momenta where every coupled channel is closed are considered.
std::vector<RingCrossing> ring_cir_crossings(const TransverseSpectrum& spectrum, int length,
                                             std::pair<double, double> window);

}  // namespace qscat
