#include "qscat/spa.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "qscat/errors.hpp"

namespace qscat {

std::vector<double> linspace(double lo, double hi, int n) {
  require(n >= 1, ErrorKind::InvalidArgument, "grid needs at least one point");
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
  out.back() = hi;
  return out;
}

SpaFit spa_fit(const std::vector<CurvePoint>& curve, double r0000, const std::vector<double>& known_poles) {
  require(curve.size() >= 2, ErrorKind::InvalidArgument, "fit needs at least two points");
  require(r0000 > 0.0, ErrorKind::InvalidArgument, "R(0,0;0,0) must be positive");
  double lo = curve.front().u, hi = curve.front().u;
  for (const auto& p : curve) {
    require(std::isfinite(p.u) && std::isfinite(p.u1d) && p.u != 0.0, ErrorKind::InvalidArgument,
            "fit points must be finite with U != 0");
    lo = std::min(lo, p.u);
    hi = std::max(hi, p.u);
  }
  require(hi > lo, ErrorKind::InvalidArgument, "fit window has zero width");
  for (double pole : known_poles) {
    bool close = pole >= lo && pole <= hi;
    for (const auto& p : curve) close = close || std::abs(1.0 - p.u / pole) < 1e-6;
    if (close) fail(ErrorKind::PoleInWindow, "resonance at U=" + format_number(pole) + " lies in the fit window");
  }

  const Eigen::Index n = static_cast<Eigen::Index>(curve.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = 1.0 / curve[i].u;
    b(i) = curve[i].u1d;
  }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);

  SpaFit fit;
  fit.c1 = c(0);
  fit.c2 = c(1);
  fit.window = {lo, hi};
  fit.n_points = static_cast<int>(n);
  fit.max_residual = (a * c - b).cwiseAbs().maxCoeff();
  fit.estimate_c1 = -fit.c1 / r0000;
  fit.midpoint = fit.estimate_c1;
  if (-fit.c2 / r0000 > 0.0) {
    fit.estimate_c2 = -std::sqrt(-fit.c2 / r0000);
    fit.spread = std::abs(fit.estimate_c1 - *fit.estimate_c2);
    fit.midpoint = 0.5 * (fit.estimate_c1 + *fit.estimate_c2);
  }
  return fit;
}

std::vector<CurvePoint> spa_curve(const std::vector<double>& grid, double r0000, double u_cir) {
  require(u_cir != 0.0 && std::isfinite(u_cir), ErrorKind::InvalidArgument, "resonance coupling must be nonzero");
  std::vector<CurvePoint> out;
  out.reserve(grid.size());
  for (double u : grid) {
    const double d = 1.0 - u / u_cir;
    out.push_back({u, d == 0.0 ? NAN : u * r0000 / d});
  }
  return out;
}

}  // namespace qscat
