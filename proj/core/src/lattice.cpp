#include "qscat/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "qscat/errors.hpp"

namespace qscat {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void validate(const TrapSpec& spec) {
  std::visit(Overloaded{
                 [](const Harmonic& h) {
                   require(std::isfinite(h.omega) && h.omega > 0, ErrorKind::InvalidArgument,
                           "harmonic trap needs omega > 0");
                 },
                 [](const DeltaWell& w) {
                   require(std::isfinite(w.v0) && w.v0 > 0, ErrorKind::InvalidArgument,
                           "delta well needs v0 > 0");
                 },
                 [](const TwoSite& t) {
                   require(std::isfinite(t.v), ErrorKind::InvalidArgument, "two-site step must be finite");
                 },
                 [](const Tabulated& t) {
                   for (const auto& [y, v] : t.values)
                     require(std::isfinite(v), ErrorKind::InvalidArgument,
                             "tabulated potential not finite at y=" + std::to_string(y));
                 },
             },
             spec.kind);
  if (!std::holds_alternative<TwoSite>(spec.kind))
    require(spec.y_max >= 1, ErrorKind::InvalidArgument, "y_max must be a positive integer");
}

struct Eigenpair {
  double energy;
  Eigen::VectorXd vec;  // over full grid
  Parity parity;
};

// Deterministic sign: the first component (scanning outward from y=0, then
// the negative side) that is not negligible is made positive.
void fix_sign(Eigen::VectorXd& v, const std::vector<int>& order) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (int row : order) {
    if (std::abs(v(row)) > 1e-6 * scale) {
      if (v(row) < 0) v = -v;
      return;
    }
  }
}

std::vector<Eigenpair> tridiagonal_pairs(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  if (diag.size() == 1) {
    return {{diag(0), Eigen::VectorXd::Ones(1), Parity::None}};
  }
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  require(solver.info() == Eigen::Success, ErrorKind::NoConvergence, "tridiagonal eigensolver failed");
  std::vector<Eigenpair> out;
  out.reserve(diag.size());
  for (Eigen::Index i = 0; i < diag.size(); ++i)
    out.push_back({solver.eigenvalues()(i), solver.eigenvectors().col(i), Parity::None});
  return out;
}

TransverseSpectrum assemble(std::vector<int> sites, std::vector<Eigenpair> pairs, const TransverseOptions& opt) {
  std::stable_sort(pairs.begin(), pairs.end(), [](const Eigenpair& a, const Eigenpair& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return a.parity == Parity::Even && b.parity != Parity::Even;
  });

  TransverseSpectrum s;
  const int n_sites = static_cast<int>(sites.size());
  const int n = static_cast<int>(pairs.size());
  s.sites = std::move(sites);
  s.origin_index = static_cast<int>(std::find(s.sites.begin(), s.sites.end(), 0) - s.sites.begin());
  s.energies.resize(n);
  s.states.resize(n_sites, n);
  s.origin_amplitudes.resize(n);
  s.parities.resize(n);

  std::vector<int> order(n_sites);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const int ya = s.sites[a], yb = s.sites[b];
    if (std::abs(ya) != std::abs(yb)) return std::abs(ya) < std::abs(yb);
    return ya > yb;
  });

  for (int i = 0; i < n; ++i) {
    fix_sign(pairs[i].vec, order);
    s.energies(i) = pairs[i].energy;
    s.states.col(i) = pairs[i].vec;
    s.parities[i] = pairs[i].parity;
    s.origin_amplitudes(i) = pairs[i].parity == Parity::Odd ? 0.0 : pairs[i].vec(s.origin_index);
  }

  if (!opt.check_edges) {
    s.confined_count = n;
  } else {
    const int first = 0, last = n_sites - 1;
    int confined = 0;
    while (confined < n && std::abs(s.states(first, confined)) < opt.edge_tol &&
           std::abs(s.states(last, confined)) < opt.edge_tol)
      ++confined;
    s.confined_count = confined;
  }
  if (opt.check_edges && opt.required_states > s.confined_count) {
    fail(ErrorKind::EdgeLeak, std::to_string(opt.required_states) + " states requested but only " +
                                  std::to_string(s.confined_count) + " decay below " +
                                  format_number(opt.edge_tol) + " at the grid edge");
  }
  require(opt.required_states <= n, ErrorKind::InvalidArgument,
          "more states requested than grid sites");
  return s;
}

std::vector<int> grid(int y_max) {
  std::vector<int> sites(2 * y_max + 1);
  std::iota(sites.begin(), sites.end(), -y_max);
  return sites;
}

TransverseSpectrum solve_symmetric(const TrapSpec& spec, const TransverseOptions& opt) {
  const int m = spec.y_max;
  const int n_sites = 2 * m + 1;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

  // Even sector on y = 0..m; the 0-1 bond picks up sqrt(2).
  Eigen::VectorXd de(m + 1), se(m);
  for (int y = 0; y <= m; ++y) de(y) = spec.potential(y);
  for (int y = 0; y < m; ++y) se(y) = -kHopping;
  se(0) = -kHopping * std::sqrt(2.0);

  // Odd sector on y = 1..m.
  Eigen::VectorXd dodd(m), sodd(std::max(m - 1, 0));
  for (int y = 1; y <= m; ++y) dodd(y - 1) = spec.potential(y);
  for (int y = 0; y < m - 1; ++y) sodd(y) = -kHopping;

  std::vector<Eigenpair> pairs;
  for (auto& p : tridiagonal_pairs(de, se)) {
    Eigen::VectorXd full(n_sites);
    full(m) = p.vec(0);
    for (int y = 1; y <= m; ++y) full(m + y) = full(m - y) = p.vec(y) * inv_sqrt2;
    pairs.push_back({p.energy, std::move(full), Parity::Even});
  }
  for (auto& p : tridiagonal_pairs(dodd, sodd)) {
    Eigen::VectorXd full(n_sites);
    full(m) = 0.0;
    for (int y = 1; y <= m; ++y) {
      full(m + y) = p.vec(y - 1) * inv_sqrt2;
      full(m - y) = -full(m + y);
    }
    pairs.push_back({p.energy, std::move(full), Parity::Odd});
  }
  return assemble(grid(m), std::move(pairs), opt);
}

TransverseSpectrum solve_general(const TrapSpec& spec, const TransverseOptions& opt) {
  const auto sites = grid(spec.y_max);
  const int n = static_cast<int>(sites.size());
  Eigen::VectorXd d(n), s(n - 1);
  for (int i = 0; i < n; ++i) d(i) = spec.potential(sites[i]);
  s.setConstant(-kHopping);
  return assemble(sites, tridiagonal_pairs(d, s), opt);
}

TransverseSpectrum solve_delta_well(const TrapSpec& spec, double v0, const TransverseOptions& opt) {
  const int m = spec.y_max;
  const double root = std::sqrt(v0 * v0 + 4.0 * kHopping * kHopping);
  const double beta = (root - v0) / (2.0 * kHopping);
  Eigen::VectorXd full(2 * m + 1);
  for (int y = -m; y <= m; ++y) full(y + m) = std::pow(beta, std::abs(y));
  full /= full.norm();
  std::vector<Eigenpair> pairs{{v0 - root, std::move(full), Parity::Even}};
  return assemble(grid(m), std::move(pairs), opt);
}

TransverseSpectrum solve_two_site(double v, const TransverseOptions& opt) {
  Eigen::Matrix2d h;
  h << 0.0, -kHopping, -kHopping, 2.0 * v;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(h);
  std::vector<Eigenpair> pairs;
  for (int i = 0; i < 2; ++i)
    pairs.push_back({solver.eigenvalues()(i), solver.eigenvectors().col(i), Parity::None});
  TransverseOptions o = opt;
  o.check_edges = false;  // open two-site chain has no tail to test
  return assemble({0, 1}, std::move(pairs), o);
}

}  // namespace

double TrapSpec::potential(int y) const {
  return std::visit(Overloaded{
                        [y](const Harmonic& h) { return h.omega * y * y; },
                        [y](const DeltaWell& w) { return y == 0 ? 0.0 : w.v0; },
                        [y](const TwoSite& t) { return y == 1 ? 2.0 * t.v : 0.0; },
                        [y](const Tabulated& t) {
                          auto it = t.values.find(y);
                          return it == t.values.end() ? t.outside : it->second;
                        },
                    },
                    kind);
}

bool TrapSpec::symmetric() const {
  if (std::holds_alternative<TwoSite>(kind)) return false;
  if (std::holds_alternative<Tabulated>(kind)) {
    for (int y = 1; y <= y_max; ++y)
      if (potential(y) != potential(-y)) return false;
  }
  return true;
}

TransverseSpectrum solve_transverse(const TrapSpec& spec, const TransverseOptions& options) {
  validate(spec);
  require(options.required_states >= 0, ErrorKind::InvalidArgument, "required_states must be >= 0");
  if (const auto* t = std::get_if<TwoSite>(&spec.kind)) return solve_two_site(t->v, options);
  if (const auto* w = std::get_if<DeltaWell>(&spec.kind)) return solve_delta_well(spec, w->v0, options);
  if (std::holds_alternative<Tabulated>(spec.kind)) {
    if (!spec.symmetric()) {
      require(!options.symmetric_reduction, ErrorKind::NonSymmetric,
              "symmetric reduction requested for a potential with V(y) != V(-y)");
      return solve_general(spec, options);
    }
  }
  return options.symmetric_reduction ? solve_symmetric(spec, options) : solve_general(spec, options);
}

int auto_half_width(const TrapKind& kind, int required_states, double edge_tol, int start, int limit) {
  require(required_states >= 1, ErrorKind::InvalidArgument, "required_states must be >= 1");
  TransverseOptions opt;
  opt.required_states = 0;
  opt.edge_tol = edge_tol;
  auto passes = [&](int y_max) {
    if (2 * y_max + 1 < required_states) return false;
    return solve_transverse(TrapSpec{kind, y_max}, opt).confined_count >= required_states;
  };
  int lo = std::max(1, start / 2), hi = std::max(1, start);
  while (!passes(hi)) {
    lo = hi;
    hi = static_cast<int>(std::ceil(hi * 1.5));
    if (hi > limit) fail(ErrorKind::EdgeLeak, "no half-width below " + std::to_string(limit) + " confines the requested states");
  }
  if (passes(lo)) return lo;
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    (passes(mid) ? hi : lo) = mid;
  }
  return hi;
}

AlphaValue alpha_closed(double channel_energy, double target_energy, double j_eff) {
  require(std::isfinite(channel_energy) && std::isfinite(target_energy) && std::isfinite(j_eff),
          ErrorKind::InvalidArgument, "alpha_closed needs finite energies");
  require(j_eff != 0.0, ErrorKind::InvalidArgument, "effective hopping must be nonzero");
  const double g = (channel_energy - target_energy) / j_eff;
  if (!(g > 2.0)) {
    fail(ErrorKind::OpenChannel, "channel at E=" + format_number(channel_energy) +
                                     " is open at target energy " + format_number(target_energy) +
                                     " (g=" + format_number(g) + ")");
  }
  // Product of the roots is 1, so the small root is 2/(g + sqrt(g^2-4)); this
  // form avoids cancellation for large g.
  const double alpha = 2.0 / (g + std::sqrt((g - 2.0) * (g + 2.0)));
  return {alpha, j_eff * (alpha - 1.0 / alpha)};
}

}  // namespace qscat
