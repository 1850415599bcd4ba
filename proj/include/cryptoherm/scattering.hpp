#pragma once

// Two-lead lattice scattering. Leads continue the chain with hopping
// t = −mass_sign on both sides; E = mass_sign·(2 − 2cos k), k ∈ (0, π), and
// the incoming wave is e^{ikj} from the left for either sign.

#include <optional>
#include <vector>

#include "cryptoherm/linalg.hpp"
#include "cryptoherm/models.hpp"

namespace cryptoherm::scattering {

struct ScatteringResult {
  double energy = 0.0;
  Complex r;
  Complex t;
  /// | |R|² + |T|² − 1 |.
  double unitarity_deficit = 0.0;
  double wavenumber = 0.0;
};

/// Band [lo, hi] of the free chain for the given kinetic sign.
std::pair<double, double> band(int mass_sign);

/// Wavenumber for an energy strictly inside the band. Throws BandEdge near
/// the edges (sin k ≤ 1e−8) or outside.
double wavenumber(double energy, int mass_sign);

/// Amplitudes for a model whose potential vanishes on the first and last
/// site (SupportTouchesLead otherwise).
ScatteringResult scatter(const models::LatticeModel& m, double energy);

/// Amplitudes for an arbitrary dense central block; the first and last rows
/// are coupled to the leads. No support check.
ScatteringResult scatter_dense(const ComplexMatrix& h, int mass_sign, double energy);

/// Deficit of the hermitized operator 𝔥 = ΩHΩ⁻¹ (Ω from Θ), with the leads
/// attached to its end sites. Θ must satisfy the quasi-Hermiticity residual
/// ≤ 1e−8 for the model.
double unitarity_deficit_weighted(const models::LatticeModel& m, const ComplexMatrix& theta, double energy);

struct LocalityReport {
  /// max |Θ_ij| / sqrt(Θ_ii Θ_jj) over i ≠ j with i or j in the outer rows.
  double measure = 0.0;
  double threshold = 0.0;
  std::size_t lead_width = 0;
  bool passed = false;
};

LocalityReport asymptotic_locality_check(const ComplexMatrix& theta, std::size_t lead_width,
                                         double threshold = 1e-6);

/// 1/T continued to complex energy on the physical sheet (|e^{ik}| ≤ 1).
Complex inverse_transmission(const models::LatticeModel& m, Complex energy);

struct EnergyWindow {
  Complex lower;  // lower-left corner
  Complex upper;  // upper-right corner
};

struct PoleMatch {
  double bound_state = 0.0;
  Complex pole;
  double mismatch = 0.0;
};

struct PoleTable {
  std::vector<Complex> poles;
  std::vector<double> bound_states;
  std::vector<PoleMatch> matches;
  std::vector<double> unmatched;
  double max_mismatch = 0.0;
  bool no_poles_found = false;
};

inline constexpr double kBandMargin = 1e-3;

/// Coarse grid of |1/T| over the window (grid_density points per axis),
/// local minima refined by secant iteration on 1/T to 1e−8, then matched to
/// the real eigenvalues of H inside the window. The window must stay at
/// least kBandMargin away from the band (BandEdge otherwise).
PoleTable pole_scan(const models::LatticeModel& m, EnergyWindow window, std::size_t grid_density = 41);

}  // namespace cryptoherm::scattering
