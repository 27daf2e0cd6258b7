#pragma once

#include <map>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace qscat {

// Energies are in units of the hopping J; lattice spacing is 1.
inline constexpr double kHopping = 1.0;

struct Harmonic {
  double omega;  // V(y) = omega * y^2
};

// Zero-range well: V(y) = v0 everywhere except V(0) = 0.
struct DeltaWell {
  double v0;
};

// Two transverse sites {0, 1} with V(0) = 0 and V(1) = 2v.
struct TwoSite {
  double v;
};

struct Tabulated {
  std::map<int, double> values;
  double outside = 0.0;  // potential at grid sites missing from `values`
};

using TrapKind = std::variant<Harmonic, DeltaWell, TwoSite, Tabulated>;

struct TrapSpec {
  TrapKind kind;
  int y_max = 0;  // grid is [-y_max, y_max]; ignored for TwoSite

  static TrapSpec harmonic(double omega, int y_max) { return {Harmonic{omega}, y_max}; }
  static TrapSpec delta_well(double v0, int y_max) { return {DeltaWell{v0}, y_max}; }
  static TrapSpec two_site(double v) { return {TwoSite{v}, 1}; }

  double potential(int y) const;
  bool symmetric() const;
};

enum class Parity { Even, Odd, None };

struct TransverseSpectrum {
  std::vector<int> sites;               // y coordinate of each grid row
  Eigen::VectorXd energies;             // nondecreasing
  Eigen::MatrixXd states;               // column n is psi_n over `sites`
  std::vector<Parity> parities;
  Eigen::VectorXd origin_amplitudes;    // psi_n(0)
  int confined_count = 0;               // leading states that pass the edge check
  int origin_index = 0;                 // row of y = 0 in `states`

  int size() const { return static_cast<int>(energies.size()); }
  double e0() const { return energies(0); }
  double psi0_sq() const { return origin_amplitudes(0) * origin_amplitudes(0); }
};

struct TransverseOptions {
  int required_states = 1;     // EdgeLeak if fewer states are confined
  double edge_tol = 1e-10;
  bool symmetric_reduction = true;
  bool check_edges = true;     // off: hard-wall box, every state retained
};

TransverseSpectrum solve_transverse(const TrapSpec& spec, const TransverseOptions& options = {});

// Smallest y_max (scanning upward from `start`) at which `required_states`
// states pass the edge check.
int auto_half_width(const TrapKind& kind, int required_states, double edge_tol = 1e-10,
                    int start = 4, int limit = 20000);

struct AlphaValue {
  double alpha;
  double denominator;  // E + 2 J_eff alpha - E_channel, always negative
};

// Decay factor of a closed channel: root of alpha^2 - g alpha + 1 = 0 inside
// (0, 1) with g = (channel_energy - target_energy) / j_eff.
AlphaValue alpha_closed(double channel_energy, double target_energy, double j_eff = kHopping);

}  // namespace qscat
