#pragma once

#include <optional>
#include <vector>

#include "qscat/lattice.hpp"
#include "qscat/single_particle.hpp"

namespace qscat {

// Symmetric well that is flat (= v0) for |y| > R. inner[y] is V(y) for
// 0 <= y <= R.
struct WellProfile {
  std::vector<double> inner;
  double v0 = 0.0;

  int range() const { return static_cast<int>(inner.size()) - 1; }
  static WellProfile from_trap(const TrapSpec& spec);
};

// Even transverse scattering state that behaves like cos(q|y| + theta) for |y| >= R.
struct ContinuumState {
  double q = 0.0;
  double theta = 0.0;
  double phi0 = 0.0;       // amplitude at y = 0 relative to unit outer amplitude
  double dtheta_dq = 0.0;
  double energy = 0.0;     // v0 - 2J cos q
};

ContinuumState continuum_state(const WellProfile& well, double q);

// Number of even states per unit q on a box of half-length L.
double density_of_states(const ContinuumState& state, double length);

struct ContinuumOptions {
  double abs_tol = 1e-10;
  std::optional<int> ring_length;    // periodic variant: alpha -> alpha + alpha^(L-1)
  int scan_points = 4000;
  double sharp_threshold = 1e3;      // |dtheta/dq| above this flags a sharp resonance
  int trapezoid_points = 10000;      // fixed-grid cross-check
};

struct ContinuumSum {
  double value = 0.0;
  double sharp_resonance_part = 0.0;
  double quadrature_error = 0.0;
  std::optional<double> trapezoid_value;  // absent when a sharp resonance is present
  std::vector<double> resonance_momenta;
};

// Continuum contribution to 1/U_CIR at incoming momentum k.
ContinuumSum continuum_sum(const WellProfile& well, double e0, double k, const ContinuumOptions& options = {});

// Bound states below the continuum edge plus the continuum integral.
CirValue u_cir_with_continuum(const TransverseSpectrum& spectrum, const WellProfile& well, double k,
                              const ContinuumOptions& options = {});

}  // namespace qscat
