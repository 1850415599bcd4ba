#pragma once

// Rectification of complex coordinate paths x = q(s) into Sturm–Schrödinger
// pairs Hψ = EWψ on a real grid.

#include <functional>
#include <optional>
#include <string>

#include "cryptoherm/linalg.hpp"

namespace cryptoherm::sturm {

using PathFn = std::function<Complex(double)>;
using Potential = std::function<Complex(Complex)>;

/// x = q(s) with its first three derivatives. Missing derivative closures are
/// replaced by central differences of q.
struct PathSpec {
  std::string label;
  PathFn q;
  PathFn q1;
  PathFn q2;
  PathFn q3;
};

PathSpec identity_path();
PathSpec scale_path(double a);
/// q(s) = s − i·ε·exp(−s²).
PathSpec shift_bump_path(double eps);
/// q(s) = s + α·s³.
PathSpec power_path(double alpha);
/// "identity", "scale:a", "shift-bump:eps" or "power:alpha".
PathSpec parse_path(const std::string& spec);

/// "harmonic" (x²), "quartic" (x⁴), "ix3" (i·x³) or "zero".
Potential parse_potential(const std::string& name);

/// s_min < s < s_max with n interior nodes, Dirichlet ends.
struct SGrid {
  double s_min = -8.0;
  double s_max = 8.0;
  std::size_t n = 0;

  double spacing() const { return (s_max - s_min) / static_cast<double>(n + 1); }
  double node(std::size_t i) const { return s_min + spacing() * static_cast<double>(i + 1); }
};

struct SturmProblem {
  /// Rectified H = −D² + diag(q′²V(q) + Δ), banded.
  linalg::Tridiagonal h;
  /// Diagonal of W = diag(q′²).
  ComplexVector w;
  /// Derivative-elimination term Δ = ¾(q″/q′)² − ½q‴/q′ at the nodes.
  ComplexVector delta;
  SGrid grid;
  PathSpec path;
  std::string potential_label;

  std::size_t dim() const { return grid.n; }
  ComplexMatrix hamiltonian() const { return h.dense(); }
  ComplexMatrix weight() const;
  /// True when q′² is non-real somewhere, so that W ≠ W†.
  bool weight_non_hermitian() const;
};

/// Liouville substitution ψ = (q′)^{1/2}φ on the central-difference grid.
/// Throws DegeneratePath for q′ ≈ 0 and GridTooCoarse when Δ or W changes by
/// more than half between neighboring nodes.
SturmProblem rectify(const PathSpec& path, const Potential& v, SGrid grid, std::string potential_label = {});

/// Lowest-k (by Re) generalized eigenpairs with residual certificates.
/// Requires k ≤ dim/10.
linalg::Spectrum solve_sturm(const SturmProblem& p, std::size_t k, double tol = kDefaultTol);

struct SturmHermiticityReport {
  /// ‖H†Θ − ΘH‖ / (‖H‖‖Θ‖).
  double h_residual = 0.0;
  /// ‖W†Θ − ΘW‖ / (‖W‖‖Θ‖).
  double w_residual = 0.0;
  /// Same residual for the reduced operator W⁻¹H.
  double reduced_residual = 0.0;
  bool weight_non_hermitian = false;
  /// ‖𝔴 − 𝔴†‖/‖𝔴‖ for 𝔴 = ΩWΩ⁻¹, Ω = Θ^{1/2}; absent if Θ is not positive.
  std::optional<double> physical_weight_defect;
};

SturmHermiticityReport sturm_hermiticity_check(const SturmProblem& p, const ComplexMatrix& theta);

/// Θ = Σ m_n m_n† from the unit left eigenvectors m_n of W⁻¹H (dense; small
/// grids only). This is the metric of the reduced operator.
ComplexMatrix sturm_metric(const SturmProblem& p, double tol = kDefaultTol);

/// Θ_k = Σ m_n m_n† over the lowest k levels only (banded solver, any grid).
/// Positive semidefinite of rank k. On complex paths the discretized
/// problem usually has complex pairs high in the lattice band, so a full-rank
/// metric does not exist there, while the low-lying subspace is still real.
ComplexMatrix sturm_subspace_metric(const SturmProblem& p, std::size_t k, double tol = kDefaultTol);

}  // namespace cryptoherm::sturm
