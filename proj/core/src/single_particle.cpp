#include "qscat/single_particle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qscat/errors.hpp"

namespace qscat {

namespace {

bool couples(const TransverseSpectrum& s, int n) { return s.parities[n] != Parity::Odd; }

}  // namespace

CirValue u_cir(const TransverseSpectrum& spectrum, double k, const CutoffOptions& options) {
  require(std::isfinite(k) && k >= 0.0 && k < M_PI, ErrorKind::InvalidArgument,
          "quasi-momentum must lie in [0, pi)");
  // The grid basis is complete, so every state takes part; the edge check in
  // solve_transverse guards the low states that carry the physics.
  const int available = spectrum.size() - 1;
  int last = available;
  if (options.n_cut) {
    require(*options.n_cut >= 0, ErrorKind::InvalidArgument, "n_cut must be >= 0");
    last = std::min(*options.n_cut, available);
  }

  const double energy = band_energy(spectrum.e0(), k);
  CirValue out;
  out.k = k;
  double weight = spectrum.psi0_sq();
  double last_denominator = 0.0;
  bool stopped = false;
  for (int n = 1; n <= last; ++n) {
    out.n_cut = n;
    if (!couples(spectrum, n)) continue;
    const double amp = spectrum.origin_amplitudes(n);
    const AlphaValue a = alpha_closed(spectrum.energies(n), energy);
    const double term = amp * amp / a.denominator;
    out.inverse += term;
    weight += amp * amp;
    last_denominator = a.denominator;
    if (!options.n_cut && amp != 0.0) {
      // The rest of the basis carries weight 1 - sum |psi_n(0)|^2 and every
      // later denominator is at least as large in magnitude.
      const double tail = std::max(0.0, 1.0 - weight) / std::abs(a.denominator);
      if (std::abs(term) < options.term_rel_tol * std::abs(out.inverse) && tail < options.tail_tol) {
        out.tail_bound = tail;
        stopped = true;
        break;
      }
    }
  }
  if (!stopped) {
    const double remaining = std::max(0.0, 1.0 - weight);
    out.tail_bound = last_denominator == 0.0 ? (remaining > 0.0 ? INFINITY : 0.0)
                                             : remaining / std::abs(last_denominator);
    // Rounding in the weight sum leaves ~1e-15 even for a complete basis.
    if (remaining < 1e-13) out.tail_bound = 0.0;
  }
  if (out.tail_bound > options.tail_tol) {
    fail(ErrorKind::TailTooLarge, "closed-channel tail bound " + format_number(out.tail_bound) +
                                      " after " + std::to_string(out.n_cut) + " channels");
  }
  return out;
}

ScatteringResult effective_u1d(const TransverseSpectrum& spectrum, double u, const CirValue& cir) {
  require(std::isfinite(u), ErrorKind::InvalidArgument, "coupling must be finite");
  const double denom = 1.0 - u * cir.inverse;
  if (std::abs(denom) < 1e-12) {
    Error e(ErrorKind::AtResonance, "coupling " + format_number(u) + " sits on the confinement-induced resonance");
    e.with_pole(1.0 / cir.inverse);
    throw e;
  }
  ScatteringResult r;
  r.u = u;
  r.k = cir.k;
  r.cir = cir;
  r.u1d = u * spectrum.psi0_sq() / denom;

  const double psi0 = spectrum.origin_amplitudes(0);
  double amp_scale = 0.0;  // b_n = amp_scale * psi_n(0) / D_n
  if (cir.k == 0.0) {
    if (r.u1d != 0.0) r.scattering_length = -2.0 * kHopping / r.u1d;
    if (u != 0.0) amp_scale = 2.0 * kHopping / psi0;
  } else {
    const double sk = std::sin(cir.k);
    r.tan_delta = -r.u1d / (2.0 * kHopping * sk);
    r.delta = std::atan(*r.tan_delta);
    amp_scale = -2.0 * kHopping * sk * std::sin(*r.delta) / psi0;
  }

  const double energy = band_energy(spectrum.e0(), cir.k);
  for (int n = 1; n <= cir.n_cut; ++n) {
    if (!couples(spectrum, n)) {
      r.amplitudes.push_back({n, 0.0, 0.0, 0.0});
      continue;
    }
    const AlphaValue a = alpha_closed(spectrum.energies(n), energy);
    r.amplitudes.push_back({n, a.alpha, a.denominator, amp_scale * spectrum.origin_amplitudes(n) / a.denominator});
  }
  return r;
}

ScatteringResult effective_u1d(const TransverseSpectrum& spectrum, double u, double k, const CutoffOptions& options) {
  return effective_u1d(spectrum, u, u_cir(spectrum, k, options));
}

}  // namespace qscat
