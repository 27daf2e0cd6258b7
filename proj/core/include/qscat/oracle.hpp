#pragma once

#include <optional>

#include <Eigen/Dense>

#include "qscat/lattice.hpp"

namespace qscat {

// Brute-force checks that bypass the channel expansion: the full lattice
// Hamiltonian is built directly and solved with a sparse direct solver.

enum class Boundary { Open, Periodic };

struct StripProblem {
  TrapSpec trap;
  int lx = 400;             // x runs over [-lx, lx]
  Boundary boundary = Boundary::Open;
  double u = 0.0;
  double fit_from = 0.25;   // fit window as fractions of lx
  double fit_to = 0.5;
  double contamination_tol = 1e-8;
};

struct OracleResult {
  std::optional<double> scattering_length;  // empty when the fitted slope vanishes (no scattering)
  double slope = 0.0;
  double intercept = 0.0;
  double threshold = 0.0;       // energy the linear system was solved at
  double contamination = 0.0;   // closed-channel weight in the fit window, relative
  double fit_residual = 0.0;
  int unknowns = 0;
};

// Transverse Hamiltonian of the trap, dense, rows ordered like the trap grid.
Eigen::MatrixXd transverse_hamiltonian(const TrapSpec& trap);

// One particle, impurity U at the origin; fits the ground-channel projection to s (|x| - a).
OracleResult strip_scattering_length(const StripProblem& problem);

// Two particles at total quasi-momentum K in relative coordinates (x, y1, y2),
// contact interaction U at x = 0, y1 = y2.
OracleResult pair_scattering_length(const StripProblem& problem, double total_momentum);

// All eigenvalues of one particle on a ring of L sites times the transverse grid.
Eigen::VectorXd ring_exact_energies(const TrapSpec& trap, int length, double u);

}  // namespace qscat
