#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qscat/lattice.hpp"

namespace qscat {

// Sign of the collective relative-motion hopping. Physical: J_K = 2J cos(K/2),
// which lowers closed-channel energies like the single-particle 2J alpha term.
// AsPrinted flips it; kept so the oracle can rule it out.
enum class JkConvention { Physical, AsPrinted };

double collective_hopping(double total_momentum, JkConvention convention = JkConvention::Physical);

struct PairChannel {
  int n1 = 0, n2 = 0;
  double energy = 0.0;  // E_n1 + E_n2
  double alpha = 0.0;
  double denominator = 0.0;
};

struct KernelOptions {
  double total_momentum = 0.0;        // K
  double relative_momentum = 0.0;     // k; zero for scattering-length runs
  std::optional<int> max_index;       // highest transverse index; all states when empty
  JkConvention convention = JkConvention::Physical;
  bool drop_odd_pairs = true;         // only applies to parity-labelled spectra
};

// Overlap kernel over pair channels. Index 0 of `overlap` is the entrance
// channel (0,0); `channels[i]` describes overlap index i + 1.
struct OverlapKernel {
  std::vector<PairChannel> channels;
  Eigen::MatrixXd overlap;
  double j_k = 0.0;
  double energy = 0.0;
  double total_momentum = 0.0;
  double relative_momentum = 0.0;
  double e0 = 0.0;

  // Symmetric form A = W R W with W = diag(1/sqrt(-D)) over closed channels.
  Eigen::VectorXd mu;        // eigenvalues of A, ascending, all >= 0
  Eigen::MatrixXd modes;     // eigenvectors of A
  Eigen::VectorXd coupling;  // modes^T W r, r = entrance column

  double r0000() const { return overlap(0, 0); }
  int closed_count() const { return static_cast<int>(channels.size()); }
  Eigen::VectorXd entrance_column() const { return overlap.col(0).tail(closed_count()); }
  Eigen::VectorXd denominators() const;
};

OverlapKernel build_kernel(const TransverseSpectrum& spectrum, const KernelOptions& options = {});

struct TwoBodyResult {
  double u = 0.0;
  double u1d = 0.0;
  std::optional<double> scattering_length;
  std::optional<double> delta;
  std::optional<double> tan_delta;
  Eigen::VectorXd amplitudes;  // I over all channels, entrance first
  std::string method;
  int iterations = 0;
  bool converged = true;
};

// Direct dense solve of I = r + U M I. SingularSystem at a pole.
TwoBodyResult solve_scattering_length(const OverlapKernel& kernel, double u);

// Same quantity through the eigen-decomposition of the symmetric kernel.
double spectral_u1d(const OverlapKernel& kernel, double u);
double spectral_i00(const OverlapKernel& kernel, double u);

struct BornResult {
  TwoBodyResult result;
  std::vector<double> terms;  // contribution of each order to I00
};

BornResult born_series(const OverlapKernel& kernel, double u, int order);

struct FiniteKOptions {
  double damping = 0.5;
  int newton_after = 50;
  int max_iterations = 10000;
  double tolerance = 1e-10;
};

// Kernel must have been built with relative_momentum > 0.
TwoBodyResult solve_finite_k(const OverlapKernel& kernel, double u, const FiniteKOptions& options = {});

enum class ResonanceClass { Broad, Narrow, Unresolved };
std::string to_string(ResonanceClass c);

struct Resonance {
  double u = 0.0;
  double residue = 0.0;  // of U1D at the pole
  double weight = 0.0;   // |residue| / (U^2 R0000); 1 for a lone pole
  ResonanceClass cls = ResonanceClass::Unresolved;
};

struct ZeroCrossing {
  double u = 0.0;
  bool resolved = true;  // false when it only accompanies an unresolved pole
};

struct ResonanceReport {
  std::vector<Resonance> resonances;  // ascending in U, every class
  std::vector<ZeroCrossing> zero_crossings;
  std::string method = "eigenvalue";

  std::vector<Resonance> resolved() const;
};

struct ResonanceOptions {
  double narrow_weight = 3e-5;
  double broad_weight = 0.1;
};

ResonanceReport locate_resonances(const OverlapKernel& kernel, std::pair<double, double> window,
                                  const ResonanceOptions& options = {});

}  // namespace qscat
