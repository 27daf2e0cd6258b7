#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace qscat {

struct CurvePoint {
  double u;
  double u1d;
};

struct SpaFit {
  double c1 = 0.0;  // U1D -> c1 + c2 / U at strong coupling
  double c2 = 0.0;
  std::pair<double, double> window{0.0, 0.0};
  int n_points = 0;
  double estimate_c1 = 0.0;               // -c1 / R0000
  std::optional<double> estimate_c2;      // -sqrt(-c2 / R0000), needs c2 < 0
  std::optional<double> spread;
  double midpoint = 0.0;
  double max_residual = 0.0;              // largest |fit - data|
};

// Ordinary least squares of U1D against {1, 1/U}. Throws PoleInWindow if a
// known resonance coupling lies within the sampled range or too close to it.
SpaFit spa_fit(const std::vector<CurvePoint>& curve, double r0000, const std::vector<double>& known_poles = {});

// U R0000 / (1 - U / U_cir) sampled on `grid`.
std::vector<CurvePoint> spa_curve(const std::vector<double>& grid, double r0000, double u_cir);

// n equidistant points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace qscat
