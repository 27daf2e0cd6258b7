#include "qscat/oracle.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "qscat/errors.hpp"

namespace qscat {

namespace {

struct Grid {
  std::vector<int> sites;
  int origin = 0;
};

Grid trap_grid(const TrapSpec& trap) {
  Grid g;
  if (std::holds_alternative<TwoSite>(trap.kind)) {
    g.sites = {0, 1};
    g.origin = 0;
    return g;
  }
  require(trap.y_max >= 1, ErrorKind::InvalidArgument, "y_max must be >= 1");
  for (int y = -trap.y_max; y <= trap.y_max; ++y) g.sites.push_back(y);
  g.origin = trap.y_max;
  return g;
}

// Solves (H - E) phi = 0 on x in (-n, n) with phi(+-n) = entrance, where H is
// block (x) hopping `hop` plus the transverse block and an impurity at x = 0.
OracleResult solve_threshold(const Eigen::MatrixXd& block, const Eigen::VectorXd& impurity, double hop,
                             const StripProblem& prob) {
  const int n = prob.lx;
  require(n >= 8, ErrorKind::InvalidArgument, "strip half-length must be >= 8");
  require(prob.boundary == Boundary::Open, ErrorKind::InvalidArgument,
          "scattering-length oracle needs open longitudinal boundaries");
  const int m = static_cast<int>(block.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
  const Eigen::VectorXd entrance = es.eigenvectors().col(0);
  const double energy = es.eigenvalues()(0) - 2.0 * std::abs(hop);

  const int nx = 2 * n - 1;  // x = -n+1 .. n-1
  const int dim = nx * m;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(dim) * 8);
  for (int ix = 0; ix < nx; ++ix) {
    const int x = ix - (n - 1);
    const int base = ix * m;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        double v = block(i, j);
        if (i == j) {
          v -= energy;
          if (x == 0) v += impurity(i);
        }
        if (v != 0.0) trip.emplace_back(base + i, base + j, v);
      }
      if (ix > 0) trip.emplace_back(base + i, base - m + i, hop);
      if (ix + 1 < nx) trip.emplace_back(base + i, base + m + i, hop);
    }
  }
  Eigen::SparseMatrix<double> a(dim, dim);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  rhs.head(m) = -hop * entrance;
  rhs.tail(m) = -hop * entrance;

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  require(lu.info() == Eigen::Success, ErrorKind::SingularSystem, "strip Hamiltonian factorization failed");
  const Eigen::VectorXd phi = lu.solve(rhs);
  require(lu.info() == Eigen::Success, ErrorKind::SingularSystem, "strip solve failed");

  const int from = static_cast<int>(std::ceil(prob.fit_from * n));
  const int to = static_cast<int>(std::floor(prob.fit_to * n));
  if (to - from + 1 < 3 || to >= n) {
    fail(ErrorKind::FitWindowTooSmall, "fit window [" + std::to_string(from) + ", " + std::to_string(to) +
                                           "] holds fewer than 3 sites");
  }
  const int count = to - from + 1;
  Eigen::MatrixXd design(count, 2);
  Eigen::VectorXd proj(count);
  double closed = 0.0, scale = 0.0;
  for (int i = 0; i < count; ++i) {
    const int x = from + i;
    const auto seg = phi.segment((x + n - 1) * m, m);
    const double c = entrance.dot(seg);
    design(i, 0) = x;
    design(i, 1) = 1.0;
    proj(i) = c;
    closed = std::max(closed, (seg - c * entrance).norm());
    scale = std::max(scale, std::abs(c));
  }
  OracleResult out;
  out.unknowns = dim;
  out.threshold = energy;
  out.contamination = scale > 0.0 ? closed / scale : closed;
  if (out.contamination > prob.contamination_tol) {
    fail(ErrorKind::ContaminatedChannel, "closed-channel weight " + format_number(out.contamination) +
                                             " in the fit window; enlarge lx");
  }
  const Eigen::Vector2d fit = design.colPivHouseholderQr().solve(proj);
  out.slope = fit(0);
  out.intercept = fit(1);
  out.fit_residual = (design * fit - proj).cwiseAbs().maxCoeff();
  if (std::abs(out.slope) > 1e-12 * std::max(std::abs(out.intercept), 1.0)) out.scattering_length = -out.intercept / out.slope;
  return out;
}

}  // namespace

Eigen::MatrixXd transverse_hamiltonian(const TrapSpec& trap) {
  const Grid g = trap_grid(trap);
  const int n = static_cast<int>(g.sites.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    h(i, i) = trap.potential(g.sites[i]);
    if (i + 1 < n) h(i, i + 1) = h(i + 1, i) = -kHopping;
  }
  return h;
}

OracleResult strip_scattering_length(const StripProblem& prob) {
  require(std::isfinite(prob.u), ErrorKind::InvalidArgument, "coupling must be finite");
  const Grid g = trap_grid(prob.trap);
  const Eigen::MatrixXd hy = transverse_hamiltonian(prob.trap);
  Eigen::VectorXd imp = Eigen::VectorXd::Zero(hy.rows());
  imp(g.origin) = prob.u;
  return solve_threshold(hy, imp, -kHopping, prob);
}

OracleResult pair_scattering_length(const StripProblem& prob, double total_momentum) {
  require(std::isfinite(prob.u), ErrorKind::InvalidArgument, "coupling must be finite");
  require(std::abs(total_momentum) < M_PI, ErrorKind::InvalidArgument, "total momentum must satisfy |K| < pi");
  const Eigen::MatrixXd hy = transverse_hamiltonian(prob.trap);
  const int ny = static_cast<int>(hy.rows());
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(ny, ny);
  Eigen::MatrixXd block(ny * ny, ny * ny);
  for (int a = 0; a < ny; ++a)
    for (int b = 0; b < ny; ++b)
      block.block(a * ny, b * ny, ny, ny) = hy(a, b) * id + (a == b ? hy : Eigen::MatrixXd::Zero(ny, ny));
  Eigen::VectorXd imp = Eigen::VectorXd::Zero(ny * ny);
  for (int y = 0; y < ny; ++y) imp(y * ny + y) = prob.u;
  // Relative-coordinate hopping: -J (e^{iK/2} + e^{-iK/2}).
  const double hop = -2.0 * kHopping * std::cos(0.5 * total_momentum);
  return solve_threshold(block, imp, hop, prob);
}

Eigen::VectorXd ring_exact_energies(const TrapSpec& trap, int length, double u) {
  require(length >= 3, ErrorKind::InvalidArgument, "ring length must be >= 3");
  const Grid g = trap_grid(trap);
  const Eigen::MatrixXd hy = transverse_hamiltonian(trap);
  const int ny = static_cast<int>(hy.rows());
  const int dim = length * ny;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (int x = 0; x < length; ++x) {
    h.block(x * ny, x * ny, ny, ny) = hy;
    const int next = (x + 1) % length;
    for (int y = 0; y < ny; ++y) {
      h(x * ny + y, next * ny + y) += -kHopping;
      h(next * ny + y, x * ny + y) += -kHopping;
    }
  }
  h(g.origin, g.origin) += u;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace qscat
