#include "qscat/two_body.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <boost/math/tools/toms748_solve.hpp>

#include "qscat/errors.hpp"

namespace qscat {

namespace {

// Smallest |1 + U mu| treated as a regular point.
constexpr double kPoleTol = 1e-12;

void check_pole(const OverlapKernel& k, double u) {
  for (Eigen::Index i = 0; i < k.mu.size(); ++i) {
    if (k.mu(i) > 0.0 && std::abs(1.0 + u * k.mu(i)) < kPoleTol) {
      Error e(ErrorKind::SingularSystem, "coupling " + format_number(u) + " is a confinement-induced resonance");
      e.with_pole(-1.0 / k.mu(i));
      throw e;
    }
  }
}

}  // namespace

double collective_hopping(double total_momentum, JkConvention convention) {
  const double jk = 2.0 * kHopping * std::cos(0.5 * total_momentum);
  return convention == JkConvention::Physical ? jk : -jk;
}

Eigen::VectorXd OverlapKernel::denominators() const {
  Eigen::VectorXd d(closed_count());
  for (int i = 0; i < closed_count(); ++i) d(i) = channels[i].denominator;
  return d;
}

OverlapKernel build_kernel(const TransverseSpectrum& spectrum, const KernelOptions& opt) {
  require(std::isfinite(opt.total_momentum) && std::abs(opt.total_momentum) < M_PI, ErrorKind::InvalidArgument,
          "total momentum must satisfy |K| < pi");
  require(opt.relative_momentum >= 0.0 && opt.relative_momentum < M_PI, ErrorKind::InvalidArgument,
          "relative momentum must lie in [0, pi)");
  const int available = spectrum.size();
  const int n_max = opt.max_index ? std::min(*opt.max_index, available - 1) : available - 1;
  require(n_max >= 0, ErrorKind::InvalidArgument, "max_index must be >= 0");

  OverlapKernel k;
  k.total_momentum = opt.total_momentum;
  k.relative_momentum = opt.relative_momentum;
  k.j_k = collective_hopping(opt.total_momentum, opt.convention);
  require(k.j_k != 0.0, ErrorKind::InvalidArgument, "collective hopping vanishes at |K| = pi");
  k.e0 = spectrum.e0();
  k.energy = 2.0 * spectrum.e0() - 2.0 * k.j_k * std::cos(opt.relative_momentum);

  auto odd = [&](int n) { return spectrum.parities[n] == Parity::Odd; };
  auto labelled = [&](int n) { return spectrum.parities[n] != Parity::None; };

  std::vector<std::pair<int, int>> pairs{{0, 0}};
  for (int a = 0; a <= n_max; ++a) {
    for (int b = a; b <= n_max; ++b) {
      if (a == 0 && b == 0) continue;
      if (opt.drop_odd_pairs && labelled(a) && labelled(b) && odd(a) != odd(b)) continue;
      pairs.emplace_back(a, b);
    }
  }

  const Eigen::Index n_sites = spectrum.states.rows();
  Eigen::MatrixXd p(n_sites, pairs.size());
  const double sqrt2 = std::sqrt(2.0);
  for (size_t c = 0; c < pairs.size(); ++c) {
    const auto [a, b] = pairs[c];
    p.col(c) = spectrum.states.col(a).cwiseProduct(spectrum.states.col(b));
    if (a != b) p.col(c) *= sqrt2;
  }
  k.overlap = p.transpose() * p;

  k.channels.reserve(pairs.size() - 1);
  for (size_t c = 1; c < pairs.size(); ++c) {
    const auto [a, b] = pairs[c];
    const double ec = spectrum.energies(a) + spectrum.energies(b);
    const AlphaValue av = alpha_closed(ec, k.energy, k.j_k);
    if (!(av.denominator < 0.0)) {
      fail(ErrorKind::SignConventionViolation, "non-negative Green's denominator for pair (" + std::to_string(a) +
                                                   "," + std::to_string(b) + ")");
    }
    k.channels.push_back({a, b, ec, av.alpha, av.denominator});
  }

  const int nc = k.closed_count();
  Eigen::VectorXd w(nc);
  for (int i = 0; i < nc; ++i) w(i) = 1.0 / std::sqrt(-k.channels[i].denominator);
  if (nc > 0) {
    const Eigen::MatrixXd a = w.asDiagonal() * k.overlap.bottomRightCorner(nc, nc) * w.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    require(es.info() == Eigen::Success, ErrorKind::NoConvergence, "kernel eigen-decomposition failed");
    k.mu = es.eigenvalues();
    k.modes = es.eigenvectors();
    k.coupling = k.modes.transpose() * w.cwiseProduct(k.entrance_column());
  } else {
    k.mu.resize(0);
    k.modes.resize(0, 0);
    k.coupling.resize(0);
  }
  return k;
}

TwoBodyResult solve_scattering_length(const OverlapKernel& kernel, double u) {
  require(std::isfinite(u), ErrorKind::InvalidArgument, "coupling must be finite");
  check_pole(kernel, u);
  const int nc = kernel.closed_count();
  const Eigen::VectorXd inv_d = kernel.denominators().cwiseInverse();
  const Eigen::VectorXd r = kernel.entrance_column();

  Eigen::VectorXd closed = r;
  if (nc > 0 && u != 0.0) {
    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(nc, nc) -
                              u * kernel.overlap.bottomRightCorner(nc, nc) * inv_d.asDiagonal();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    closed = lu.solve(r);
  }
  TwoBodyResult res;
  res.u = u;
  res.method = "direct-solve";
  res.amplitudes.resize(nc + 1);
  res.amplitudes(0) = kernel.r0000() + u * r.dot(inv_d.cwiseProduct(closed));
  res.amplitudes.tail(nc) = closed;
  res.u1d = u * res.amplitudes(0);
  if (kernel.relative_momentum == 0.0) {
    if (res.u1d != 0.0) res.scattering_length = -2.0 * kernel.j_k / res.u1d;
  } else {
    const double s = 2.0 * kernel.j_k * std::sin(kernel.relative_momentum);
    res.tan_delta = -res.u1d / s;
    res.delta = std::atan(*res.tan_delta);
  }
  return res;
}

double spectral_i00(const OverlapKernel& kernel, double u) {
  check_pole(kernel, u);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < kernel.mu.size(); ++i)
    sum += kernel.coupling(i) * kernel.coupling(i) / (1.0 + u * kernel.mu(i));
  return kernel.r0000() - u * sum;
}

double spectral_u1d(const OverlapKernel& kernel, double u) { return u * spectral_i00(kernel, u); }

BornResult born_series(const OverlapKernel& kernel, double u, int order) {
  require(order >= 1, ErrorKind::InvalidArgument, "Born order must be >= 1");
  require(std::isfinite(u), ErrorKind::InvalidArgument, "coupling must be finite");
  const int nc = kernel.closed_count();
  const Eigen::VectorXd inv_d = kernel.denominators().cwiseInverse();
  const Eigen::VectorXd r = kernel.entrance_column();
  const Eigen::MatrixXd m = nc > 0 ? Eigen::MatrixXd(kernel.overlap.bottomRightCorner(nc, nc) * inv_d.asDiagonal())
                                   : Eigen::MatrixXd(0, 0);

  BornResult out;
  out.terms.push_back(kernel.r0000());
  Eigen::VectorXd t = r;          // closed-channel amplitude of the current order
  Eigen::VectorXd closed_sum = r;
  int growth = 0;
  for (int n = 2; n <= order; ++n) {
    const double term = u * r.dot(inv_d.cwiseProduct(t));
    const double prev = out.terms.back();
    out.terms.push_back(term);
    growth = std::abs(term) > std::abs(prev) && n > 2 ? growth + 1 : 0;
    if (growth >= 5) {
      fail(ErrorKind::Diverging, "Born series terms grew for 5 consecutive orders at U=" + format_number(u) +
                                     "; |U| lies beyond the smallest resonance coupling");
    }
    if (n < order) {
      t = u * (m * t);
      closed_sum += t;
    }
  }
  double i00 = 0.0;
  for (double term : out.terms) i00 += term;

  TwoBodyResult& res = out.result;
  res.u = u;
  res.method = "born(" + std::to_string(order) + ")";
  res.iterations = order;
  res.amplitudes.resize(nc + 1);
  res.amplitudes(0) = i00;
  res.amplitudes.tail(nc) = closed_sum;
  res.u1d = u * i00;
  if (res.u1d != 0.0 && kernel.relative_momentum == 0.0) res.scattering_length = -2.0 * kernel.j_k / res.u1d;
  // Ratio test on the last two orders.
  if (out.terms.size() >= 3) {
    const double a = std::abs(out.terms[out.terms.size() - 2]), b = std::abs(out.terms.back());
    res.converged = b <= a || b <= 1e-15 * std::abs(i00);
  }
  return out;
}

TwoBodyResult solve_finite_k(const OverlapKernel& kernel, double u, const FiniteKOptions& opt) {
  require(kernel.relative_momentum > 0.0, ErrorKind::InvalidArgument, "finite-k solve needs a kernel with k > 0");
  // The closed-channel system is linear once the entrance amplitude cos(delta)
  // is fixed; solve it for unit amplitude and iterate on cos(delta).
  TwoBodyResult linear = solve_scattering_length(kernel, u);
  const double s = 2.0 * kernel.j_k * std::sin(kernel.relative_momentum);
  const double t = u * linear.amplitudes(0) / s;

  const auto update = [&](double c) {
    const double x = 1.0 - t * t * c * c;
    return x > 0.0 ? std::sqrt(x) : 0.0;
  };
  // The root of c - update(c) lies in (0, min(1, 1/|t|)], where h is increasing.
  const auto h = [&](double c) { return c - update(c); };
  double lo = 0.0, hi = std::min(1.0, t != 0.0 ? 1.0 / std::abs(t) : 1.0);
  double c = hi;
  int it = 0;
  bool done = false;
  for (; it < opt.max_iterations && !done; ++it) {
    if (h(c) == 0.0) {
      done = true;
      break;
    }
    double next;
    if (it < opt.newton_after) {
      next = (1.0 - opt.damping) * c + opt.damping * update(c);
    } else {
      const double root = update(c);
      const double dh = root > 0.0 ? 1.0 + t * t * c / root : 1.0;
      next = c - h(c) / dh;
    }
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    (h(next) > 0.0 ? hi : lo) = next;
    done = std::abs(next - c) < opt.tolerance && std::abs(h(next)) < opt.tolerance;
    c = next;
  }
  if (!done) fail(ErrorKind::NoConvergence, "finite-momentum iteration did not converge");

  const double sin_delta = -t * c;
  if (std::abs(sin_delta) > 1.0 + 1e-12) fail(ErrorKind::UnphysicalAmplitude, "|sin delta| exceeds 1");

  TwoBodyResult res;
  res.u = u;
  res.method = "fixed-point";
  res.iterations = it;
  res.amplitudes = c * linear.amplitudes;
  res.u1d = linear.u1d;
  res.delta = std::atan2(sin_delta, c);
  res.tan_delta = -t;
  return res;
}

std::string to_string(ResonanceClass c) {
  switch (c) {
    case ResonanceClass::Broad: return "broad";
    case ResonanceClass::Narrow: return "narrow";
    case ResonanceClass::Unresolved: return "unresolved";
  }
  return "unknown";
}

std::vector<Resonance> ResonanceReport::resolved() const {
  std::vector<Resonance> out;
  for (const auto& r : resonances)
    if (r.cls != ResonanceClass::Unresolved) out.push_back(r);
  return out;
}

ResonanceReport locate_resonances(const OverlapKernel& kernel, std::pair<double, double> window,
                                  const ResonanceOptions& opt) {
  require(window.first < window.second, ErrorKind::InvalidArgument, "empty coupling window");
  const double r00 = kernel.r0000();
  const double mu_floor = 1e-14 * (kernel.mu.size() ? std::abs(kernel.mu.maxCoeff()) : 0.0);

  struct Pole {
    double u;
    Eigen::Index mode;
  };
  std::vector<Pole> poles;  // every pole, inside or outside the window
  for (Eigen::Index i = 0; i < kernel.mu.size(); ++i)
    if (kernel.mu(i) > mu_floor) poles.push_back({-1.0 / kernel.mu(i), i});
  std::sort(poles.begin(), poles.end(), [](const Pole& a, const Pole& b) { return a.u < b.u; });

  // U1D at a pole with that pole's own term removed.
  const auto background = [&](const Pole& p) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < kernel.mu.size(); ++j)
      if (j != p.mode) sum += kernel.coupling(j) * kernel.coupling(j) / (1.0 + p.u * kernel.mu(j));
    return p.u * (r00 - p.u * sum);
  };

  ResonanceReport rep;
  std::vector<std::pair<double, double>> hidden;  // (pole, companion half-width) of unresolved poles
  for (const auto& p : poles) {
    const double c2 = kernel.coupling(p.mode) * kernel.coupling(p.mode);
    Resonance r;
    r.u = p.u;
    r.residue = p.u * p.u * p.u * c2;
    r.weight = std::abs(p.u) * c2 / r00;
    r.cls = r.weight >= opt.broad_weight    ? ResonanceClass::Broad
            : r.weight >= opt.narrow_weight ? ResonanceClass::Narrow
                                            : ResonanceClass::Unresolved;
    if (r.cls == ResonanceClass::Unresolved) {
      const double b = background(p);
      hidden.emplace_back(p.u, b != 0.0 ? 3.0 * std::abs(r.residue / b) : INFINITY);
    }
    if (p.u >= window.first && p.u <= window.second) rep.resonances.push_back(r);
  }

  // I00 decreases strictly between neighbouring poles, so each interval holds
  // at most one zero.
  std::vector<double> edges{window.first};
  for (const auto& p : poles)
    if (p.u > window.first && p.u < window.second) edges.push_back(p.u);
  edges.push_back(window.second);
  const auto f = [&](double u) { return spectral_i00(kernel, u); };
  for (size_t i = 0; i + 1 < edges.size(); ++i) {
    double lo = edges[i], hi = edges[i + 1];
    const double span = hi - lo;
    // Step off the poles just far enough to see the divergent sign.
    if (i > 0) lo += std::max(1e-10 * std::abs(lo), 1e-8 * span);
    if (i + 2 < edges.size()) hi -= std::max(1e-10 * std::abs(hi), 1e-8 * span);
    double flo, fhi;
    try {
      flo = f(lo);
      fhi = f(hi);
    } catch (const Error&) {
      continue;
    }
    if (!(flo > 0.0 && fhi < 0.0)) continue;
    boost::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                                          boost::math::tools::eps_tolerance<double>(50), iters);
    ZeroCrossing z{0.5 * (a + b), true};
    if (z.u == 0.0) continue;
    for (const auto& [pu, width] : hidden)
      if (std::abs(z.u - pu) < width) z.resolved = false;
    rep.zero_crossings.push_back(z);
  }
  return rep;
}

}  // namespace qscat
