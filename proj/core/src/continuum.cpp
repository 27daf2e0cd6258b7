#include "qscat/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "qscat/errors.hpp"

namespace qscat {

namespace {

// Value and q-derivative carried together through the transfer recursion.
struct Dual {
  double v, d;
};
Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
Dual operator/(Dual a, Dual b) { return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)}; }
Dual scale(Dual a, double s) { return {a.v * s, a.d * s}; }

void validate(const WellProfile& well) {
  require(!well.inner.empty(), ErrorKind::InvalidArgument, "well profile needs V(0)");
  require(std::isfinite(well.v0), ErrorKind::InvalidArgument, "well depth must be finite");
  bool flat = true;
  for (double v : well.inner) {
    require(std::isfinite(v), ErrorKind::InvalidArgument, "well profile must be finite");
    flat = flat && v == well.v0;
  }
  // V == const has no confinement and the quasi-1D picture breaks down.
  require(!flat, ErrorKind::InvalidArgument, "potential is flat; no transverse confinement");
  require(well.v0 > 0.0 || well.inner.size() > 1, ErrorKind::InvalidArgument, "well depth V0 must be positive");
}

double channel_denominator(double energy, double channel, std::optional<int> ring_length) {
  const AlphaValue a = alpha_closed(channel, energy);
  if (!ring_length) return a.denominator;
  return a.denominator + 2.0 * kHopping * std::pow(a.alpha, *ring_length - 1);
}

struct Peak {
  double q0;
  double width;
};

}  // namespace

WellProfile WellProfile::from_trap(const TrapSpec& spec) {
  if (const auto* w = std::get_if<DeltaWell>(&spec.kind)) {
    require(w->v0 > 0.0, ErrorKind::InvalidArgument, "delta well needs v0 > 0");
    return {{0.0}, w->v0};
  }
  if (const auto* t = std::get_if<Tabulated>(&spec.kind)) {
    require(spec.symmetric(), ErrorKind::NonSymmetric, "continuum wells must satisfy V(y) = V(-y)");
    int range = 0;
    for (const auto& [y, v] : t->values)
      if (v != t->outside) range = std::max(range, std::abs(y));
    WellProfile well;
    well.v0 = t->outside;
    for (int y = 0; y <= range; ++y) well.inner.push_back(spec.potential(y));
    validate(well);
    return well;
  }
  fail(ErrorKind::InvalidArgument, "continuum states need a delta-well or tabulated trap");
}

ContinuumState continuum_state(const WellProfile& well, double q) {
  validate(well);
  require(q > 0.0 && q < M_PI, ErrorKind::InvalidArgument, "continuum momentum must lie in (0, pi)");
  const int r = well.range();
  const Dual eps{well.v0 - 2.0 * kHopping * std::cos(q), 2.0 * kHopping * std::sin(q)};
  const auto v = [&](int y) { return Dual{y <= r ? well.inner[y] : well.v0, 0.0}; };

  Dual prev{1.0, 0.0};
  Dual cur = scale(v(0) - eps, 0.5 / kHopping);
  for (int y = 1; y <= r; ++y) {
    Dual next = scale((v(y) - eps) * cur, 1.0 / kHopping) - prev;
    prev = cur;
    cur = next;
  }
  // prev = psi(R), cur = psi(R+1); match to A cos(q y + theta).
  const Dual cq{std::cos(q), -std::sin(q)};
  const Dual sq{std::sin(q), std::cos(q)};
  const Dual x = prev;
  const Dual y = (prev * cq - cur) / sq;
  const double amp_sq = x.v * x.v + y.v * y.v;

  ContinuumState s;
  s.q = q;
  s.energy = eps.v;
  s.theta = std::atan2(y.v, x.v) - q * r;
  s.dtheta_dq = (x.v * y.d - y.v * x.d) / amp_sq - r;
  s.phi0 = 1.0 / std::sqrt(amp_sq);
  return s;
}

double density_of_states(const ContinuumState& state, double length) {
  return length / M_PI + state.dtheta_dq / M_PI;
}

ContinuumSum continuum_sum(const WellProfile& well, double e0, double k, const ContinuumOptions& options) {
  validate(well);
  require(std::abs(k) < M_PI, ErrorKind::InvalidArgument, "quasi-momentum must lie in (-pi, pi)");
  if (options.ring_length)
    require(*options.ring_length >= 4, ErrorKind::InvalidArgument, "ring length must be >= 4");
  const double energy = band_energy(e0, k);

  auto integrand = [&](double q) {
    if (q <= 0.0 || q >= M_PI) return 0.0;
    const ContinuumState s = continuum_state(well, q);
    return s.phi0 * s.phi0 / channel_denominator(energy, s.energy, options.ring_length) / M_PI;
  };

  // Scan for sharp resonances: large |dtheta/dq| at a grid point, or a phase
  // jump between neighbours that the sampled slope does not account for.
  const int n = std::max(options.scan_points, 16);
  const double h = M_PI / n;
  std::vector<double> slope(n + 1, 0.0), phase(n + 1, 0.0);
  for (int i = 1; i < n; ++i) {
    const ContinuumState s = continuum_state(well, i * h);
    slope[i] = s.dtheta_dq;
    phase[i] = s.theta;
  }
  std::vector<std::pair<double, double>> suspect;  // brackets in q
  for (int i = 1; i < n; ++i) {
    const bool steep = std::abs(slope[i]) > options.sharp_threshold &&
                       std::abs(slope[i]) >= std::abs(slope[i - 1]) && std::abs(slope[i]) >= std::abs(slope[i + 1]);
    if (steep) suspect.emplace_back((i - 1) * h, (i + 1) * h);
    if (i + 1 < n) {
      const double jump = std::remainder(phase[i + 1] - phase[i], 2.0 * M_PI);
      const double expected = 0.5 * (slope[i] + slope[i + 1]) * h;
      if (!steep && std::abs(jump - expected) > 0.5) suspect.emplace_back(i * h, (i + 1) * h);
    }
  }

  std::vector<Peak> peaks;
  for (const auto& [lo, hi] : suspect) {
    auto neg_slope = [&](double q) { return -std::abs(continuum_state(well, q).dtheta_dq); };
    const auto [q0, f0] = boost::math::tools::brent_find_minima(neg_slope, std::max(lo, 1e-12), std::min(hi, M_PI - 1e-12), 52);
    const double width = 2.0 / -f0;
    if (!(width > 1e-13) || q0 - lo < 1e-15 || hi - q0 < 1e-15 || -f0 <= options.sharp_threshold) {
      fail(ErrorKind::SharpResonanceUnresolved,
           "steep continuum phase near q=" + format_number(0.5 * (lo + hi)) + " could not be localized");
    }
    if (peaks.empty() || std::abs(peaks.back().q0 - q0) > 1e-12) peaks.push_back({q0, width});
  }

  std::vector<double> cuts{0.0, M_PI};
  for (const auto& p : peaks) {
    cuts.push_back(std::max(0.0, p.q0 - 20 * p.width));
    cuts.push_back(p.q0);
    cuts.push_back(std::min(M_PI, p.q0 + 20 * p.width));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  ContinuumSum out;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    double err = 0.0;
    const double part = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, cuts[i], cuts[i + 1], 20, 1e-14, &err);
    const double abs_err = err;
    out.value += part;
    out.quadrature_error += abs_err;
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    for (const auto& p : peaks)
      if (std::abs(mid - p.q0) < 20 * p.width) out.sharp_resonance_part += part;
  }
  for (const auto& p : peaks) out.resonance_momenta.push_back(p.q0);
  if (!(out.quadrature_error <= options.abs_tol) || !std::isfinite(out.value)) {
    fail(ErrorKind::QuadratureFail, "continuum integral error estimate " + format_number(out.quadrature_error));
  }

  if (peaks.empty() && options.trapezoid_points > 0) {
    const int m = options.trapezoid_points;
    const double step = M_PI / m;
    double sum = 0.5 * (integrand(0.0) + integrand(M_PI));
    for (int i = 1; i < m; ++i) sum += integrand(i * step);
    out.trapezoid_value = sum * step;
  }
  return out;
}

CirValue u_cir_with_continuum(const TransverseSpectrum& spectrum, const WellProfile& well, double k,
                              const ContinuumOptions& options) {
  require(spectrum.size() >= 1, ErrorKind::InvalidArgument, "spectrum needs a ground state");
  const double energy = band_energy(spectrum.e0(), k);
  const double edge = well.v0 - 2.0 * kHopping;
  CirValue cir;
  cir.k = k;
  for (int n = 1; n < spectrum.size() && spectrum.energies(n) < edge; ++n) {
    cir.n_cut = n;
    if (spectrum.parities[n] == Parity::Odd) continue;
    const double amp = spectrum.origin_amplitudes(n);
    cir.inverse += amp * amp / channel_denominator(energy, spectrum.energies(n), options.ring_length);
  }
  const ContinuumSum s = continuum_sum(well, spectrum.e0(), k, options);
  cir.inverse += s.value;
  cir.tail_bound = s.quadrature_error;
  return cir;
}

}  // namespace qscat
