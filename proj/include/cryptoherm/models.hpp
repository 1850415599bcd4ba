#pragma once

// Concrete crypto-Hermitian lattice models.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cryptoherm/linalg.hpp"

namespace cryptoherm::models {

/// A lattice Hamiltonian H = mass_sign·K + diag(V) with a tridiagonal
/// symmetric kinetic block K and an on-site (possibly complex) potential V.
struct LatticeModel {
  std::string label;
  int mass_sign = +1;
  linalg::Tridiagonal kinetic;
  ComplexVector potential;
  /// Lattice spacing of the underlying grid (1 for pure chains).
  double spacing = 1.0;
  std::map<std::string, Complex> parameters;

  std::size_t dim() const { return kinetic.size(); }
  /// Banded form of H.
  linalg::Tridiagonal tridiagonal() const;
  /// Dense form of H.
  ComplexMatrix hamiltonian() const;
  /// The same model with the opposite kinetic sign.
  LatticeModel with_mass_sign(int sign) const;
};

/// Standard chain kinetic block 2 on the diagonal, −1 on the off-diagonals
/// (dispersion 2 − 2cos k, band [0, 4]).
linalg::Tridiagonal chain_kinetic(std::size_t n);

/// Interval with n interior nodes and Dirichlet ends: spacing (max−min)/(n+1).
struct Grid {
  double x_min = 0.0;
  double x_max = 1.0;
  std::size_t n = 0;

  double spacing() const { return (x_max - x_min) / static_cast<double>(n + 1); }
  double node(std::size_t i) const { return x_min + spacing() * static_cast<double>(i + 1); }
};

using Superpotential = std::function<double(double)>;

/// H(−) = B·A and H(+) = A·B with A = −𝒯D_f + 𝒯W and B = D_b𝒯⁻¹ + W𝒯⁻¹.
struct SusyPair {
  ComplexMatrix a;
  ComplexMatrix b;
  ComplexMatrix h_minus;
  ComplexMatrix h_plus;
  ComplexMatrix t_map;
  double spacing = 0.0;
  /// ‖A·H(−) − H(+)·A‖_F / (‖A‖_F‖H(−)‖_F) at construction.
  double intertwining_residual = 0.0;
};

/// Builds the lattice SUSY pair. D_f is the forward and D_b = −D_fᵀ the
/// backward first difference on the Dirichlet grid.
SusyPair susy_pair(const Superpotential& w, const Grid& grid, const std::optional<ComplexMatrix>& t_map = {});

struct ZeroMode {
  Complex value;
  /// More than half of the eigenvector weight lies in the outer tenth of the
  /// grid on either side: a box artifact, not a normalizable ground state.
  bool edge_localized = false;
};

struct LevelPair {
  Complex minus;
  Complex plus;
  double mismatch = 0.0;
};

struct PairingReport {
  std::vector<LevelPair> pairs;
  std::vector<Complex> unpaired_minus;
  std::vector<Complex> unpaired_plus;
  std::vector<ZeroMode> zero_modes_minus;
  std::vector<ZeroMode> zero_modes_plus;
  double max_mismatch = 0.0;
  double tolerance = 0.0;

  /// Zero modes in either sector that are not edge artifacts.
  std::size_t bulk_zero_modes() const;
  /// Nonzero levels left without a partner.
  std::size_t unpaired_levels() const { return unpaired_minus.size() + unpaired_plus.size(); }
};

/// Greedy nearest matching of the levels above `tol` in magnitude; levels at
/// or below `tol` are reported as zero modes.
PairingReport isospectrality_report(const SusyPair& p, double tol);
PairingReport isospectrality_report(const ComplexMatrix& h_minus, const ComplexMatrix& h_plus, double tol);

/// −D² + x² + γ(γ+1)/x² on x_i = i·L/n, i = 1..n, Dirichlet at both ends.
LatticeModel singular_oscillator(double gamma, double length, std::size_t n);

/// Lowest `count` levels of the singular oscillator (banded eigensolver).
std::vector<double> singular_oscillator_levels(double gamma, double length, std::size_t n, std::size_t count);

/// g-hopping chain with ±iγ on the two end sites.
LatticeModel pt_chain(std::size_t n, double gamma, double g, int mass_sign = +1);

struct Center {
  double position = 0.0;
  Complex strength = 0.0;
};

/// Support radius (in sites) of a Gaussian profile of the given width.
std::size_t smeared_support_radius(double width);

/// Chain with Gaussian-profile on-site potentials Σ_c s_c·exp(−(i−c)²/(2w²)),
/// truncated beyond the support radius.
LatticeModel smeared_interaction(std::size_t n, const std::vector<Center>& centers, double width,
                                 int mass_sign = +1);

/// Indices [first, last] of sites carrying a nonzero potential, if any.
std::optional<std::pair<std::size_t, std::size_t>> potential_support(const LatticeModel& m);

}  // namespace cryptoherm::models
