#include "qscat/ring.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "qscat/errors.hpp"
#include "qscat/single_particle.hpp"

namespace qscat {

namespace {

double channel_term(double g, int length) {
  if (std::abs(g) > 2.0) {
    // Real root of a^2 - g a + 1 = 0 with |a| < 1.
    const double s = std::sqrt((g - 2.0) * (g + 2.0));
    const double a = g > 0 ? 2.0 / (g + s) : 2.0 / (g - s);
    const double al = std::pow(a, length);
    return (1.0 + al) / (kHopping * (1.0 / a - a) * (1.0 - al));
  }
  // Open channel: a = exp(i phi), the term reduces to -cot(L phi / 2) / (2J sin phi).
  const double phi = std::acos(g / 2.0);
  return -1.0 / (std::tan(0.5 * length * phi) * 2.0 * kHopping * std::sin(phi));
}

int coupled_limit(const TransverseSpectrum& s) { return s.size(); }

void check_inputs(double u, int length) {
  require(std::isfinite(u), ErrorKind::InvalidArgument, "coupling must be finite");
  require(length >= 4, ErrorKind::InvalidArgument, "ring length must be >= 4");
}

double residual_scale(const TransverseSpectrum& s, double u, int length, double k) {
  const double sl = ring_channel_sum(s, k, length);
  return 2.0 * kHopping * std::abs(std::sin(k)) * std::max(1.0, std::abs(1.0 + u * sl)) + std::abs(u) * s.psi0_sq();
}

std::vector<RingSolution> branch_roots(const TransverseSpectrum& s, double u, int length, int branch,
                                       const RingOptions& opt) {
  std::vector<RingSolution> out;
  if (u == 0.0) {
    if (branch >= 1 && 2 * branch <= length) {
      const double k = 2.0 * M_PI * branch / length;
      if (k < M_PI) out.push_back({length, u, branch, k, -2.0 * kHopping * std::cos(k), 0.0});
    }
    return out;
  }
  const double lo = std::max(0.0, (2 * branch - 1) * M_PI / length);
  const double hi = std::min(M_PI, (2 * branch + 1) * M_PI / length);
  if (!(lo < hi)) return out;
  const auto f = [&](double k) { return ring_residual(s, u, length, k); };
  const int n = std::max(opt.scan_per_branch, 4);
  double a = lo, fa = f(lo);
  for (int i = 1; i <= n; ++i) {
    const double b = lo + (hi - lo) * i / n;
    const double fb = f(b);
    double root = NAN;
    if (fb == 0.0) {
      root = b;
    } else if (fa != 0.0 && std::signbit(fa) != std::signbit(fb) && std::isfinite(fa) && std::isfinite(fb)) {
      boost::uintmax_t iters = 200;
      const auto [r0, r1] = boost::math::tools::toms748_solve(f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(52), iters);
      root = std::abs(f(r0)) <= std::abs(f(r1)) ? r0 : r1;
    }
    if (std::isfinite(root) && root > 0.0 && root < M_PI) {
      const double res = std::abs(f(root)) / residual_scale(s, u, length, root);
      // A sign change through a pole of the channel sum is not a solution.
      if (res < opt.residual_tol) out.push_back({length, u, branch, root, -2.0 * kHopping * std::cos(root), res});
    }
    a = b;
    fa = fb;
  }
  for (size_t i = 1; i < out.size(); ++i) {
    if (out[i].k - out[i - 1].k < opt.collision_tol) {
      fail(ErrorKind::BranchCollision, "two momenta within " + format_number(opt.collision_tol) + " near k=" +
                                           format_number(out[i].k));
    }
  }
  return out;
}

}  // namespace

double ring_channel_sum(const TransverseSpectrum& spectrum, double k, int length) {
  const double energy = band_energy(spectrum.e0(), k);
  double sum = 0.0;
  for (int n = 1; n < coupled_limit(spectrum); ++n) {
    if (spectrum.parities[n] == Parity::Odd) continue;
    const double amp = spectrum.origin_amplitudes(n);
    if (amp == 0.0) continue;
    sum += amp * amp * channel_term((spectrum.energies(n) - energy) / kHopping, length);
  }
  return sum;
}

double ring_residual(const TransverseSpectrum& spectrum, double u, int length, double k) {
  const double half = 0.5 * k * length;
  return 2.0 * kHopping * std::sin(k) * std::sin(half) * (1.0 + u * ring_channel_sum(spectrum, k, length)) -
         u * spectrum.psi0_sq() * std::cos(half);
}

std::vector<RingSolution> ring_solutions(const TransverseSpectrum& spectrum, double u, int length,
                                         const RingOptions& options) {
  check_inputs(u, length);
  std::vector<RingSolution> all;
  for (int m = 0; (2 * m - 1) * M_PI / length < M_PI; ++m) {
    if (options.max_branch >= 0 && m > options.max_branch) break;
    auto roots = branch_roots(spectrum, u, length, m, options);
    all.insert(all.end(), roots.begin(), roots.end());
  }
  for (size_t i = 1; i < all.size(); ++i) {
    if (all[i].k - all[i - 1].k < options.collision_tol)
      fail(ErrorKind::BranchCollision, "momenta from neighbouring branches coincide near k=" + format_number(all[i].k));
  }
  return all;
}

RingSolution ring_momentum(const TransverseSpectrum& spectrum, double u, int length, int branch,
                           const RingOptions& options) {
  check_inputs(u, length);
  require(branch >= 0 && (2 * branch - 1) * M_PI / length < M_PI, ErrorKind::InvalidArgument,
          "branch outside the (0, pi) momentum window");
  auto roots = branch_roots(spectrum, u, length, branch, options);
  if (roots.empty()) {
    fail(ErrorKind::NoRootInBranch, "no allowed momentum in branch " + std::to_string(branch) + " at U=" +
                                        format_number(u) + " (k = 0 is never allowed on a finite ring)");
  }
  // Near a crossing a branch can hold two momenta; keep the one continuous
  // with the free value 2 pi m / L.
  const double free_k = 2.0 * M_PI * branch / length;
  return *std::min_element(roots.begin(), roots.end(), [&](const RingSolution& a, const RingSolution& b) {
    return std::abs(a.k - free_k) < std::abs(b.k - free_k);
  });
}

std::vector<RingCrossing> ring_cir_crossings(const TransverseSpectrum& spectrum, int length,
                                             std::pair<double, double> window) {
  require(length >= 4, ErrorKind::InvalidArgument, "ring length must be >= 4");
  require(window.first < window.second, ErrorKind::InvalidArgument, "empty coupling window");
  std::vector<RingCrossing> out;
  for (int n = 0; (2 * n + 1) * M_PI / length < M_PI; ++n) {
    const double k = (2 * n + 1) * M_PI / length;
    const double energy = band_energy(spectrum.e0(), k);
    bool closed = true;
    for (int c = 1; c < coupled_limit(spectrum) && closed; ++c) {
      if (spectrum.parities[c] == Parity::Odd || spectrum.origin_amplitudes(c) == 0.0) continue;
      closed = (spectrum.energies(c) - energy) / kHopping > 2.0;
    }
    if (!closed) continue;
    const double sl = ring_channel_sum(spectrum, k, length);
    if (sl == 0.0) continue;
    const double u = -1.0 / sl;
    if (u >= window.first && u <= window.second) out.push_back({n, k, u});
  }
  return out;
}

}  // namespace qscat
