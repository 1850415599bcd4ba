#pragma once

// Time-dependent Dyson families, the generator H_gen = H − iΩ⁻¹Ω̇ and the
// ket/brabra doublet of Schrödinger equations.

#include <functional>
#include <optional>
#include <vector>

#include "cryptoherm/linalg.hpp"

namespace cryptoherm::evolution {

using MatrixFn = std::function<ComplexMatrix(double)>;

struct Window {
  double t0 = 0.0;
  double t1 = 0.0;
  double length() const { return t1 - t0; }
};

/// H(t), Ω(t) and, optionally, the analytic Ω̇(t). Immutable once built.
class DysonFamily {
 public:
  /// Validates Ω at the domain ends (condition ≤ max_condition) and, when an
  /// analytic derivative is supplied, cross-checks it against a central
  /// difference at both ends (1e−6 relative).
  DysonFamily(std::size_t dim, MatrixFn h, MatrixFn omega, std::optional<MatrixFn> omega_dot, Window domain,
              double h_fd = 0.0);

  std::size_t dim() const { return dim_; }
  const Window& domain() const { return domain_; }
  bool analytic_derivative() const { return omega_dot_.has_value(); }
  double fd_step() const { return h_fd_; }

  ComplexMatrix hamiltonian(double t) const;
  ComplexMatrix omega(double t) const;
  ComplexMatrix omega_dot(double t) const;
  /// Ω⁻¹(t); throws IllConditionedOmega past the condition threshold.
  ComplexMatrix omega_inverse(double t) const;
  /// Θ(t) = Ω†Ω.
  ComplexMatrix metric(double t) const;

  static constexpr double max_condition = 1e12;

 private:
  void check_time(double t) const;

  std::size_t dim_;
  MatrixFn h_;
  MatrixFn omega_;
  std::optional<MatrixFn> omega_dot_;
  Window domain_;
  double h_fd_;
};

/// H(t) − iΩ⁻¹(t)Ω̇(t).
ComplexMatrix h_gen(const DysonFamily& f, double t);

/// Ω H_gen Ω⁻¹ + iΩ̇Ω⁻¹: the P-space generator fixed by u = Ω·U_ket·Ω⁻¹(0).
/// Algebraically equal to ΩHΩ⁻¹.
ComplexMatrix p_space_generator(const DysonFamily& f, double t);

struct StepStats {
  std::size_t substeps = 0;
  std::size_t rhs_evaluations = 0;
  std::size_t refinements = 0;
  double max_error_estimate = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<ComplexVector> states;
};

struct EvolutionResult {
  std::vector<double> times;
  std::vector<ComplexVector> kets;
  /// |Φ(t)⟩⟩ stored as columns; the functional is its conjugate transpose.
  std::vector<ComplexVector> brabras;
  std::vector<Complex> overlap_log;
  StepStats step_stats;

  Trajectory ket_trajectory() const { return {times, kets}; }
  Trajectory brabra_trajectory() const { return {times, brabras}; }
  /// max_t |overlap(t) − overlap(0)|; zero when no overlaps were logged.
  double overlap_drift() const;
};

struct IntegratorOptions {
  std::size_t report_intervals = 10;
  std::size_t initial_substeps = 4;
  std::size_t max_substeps = std::size_t{1} << 20;
};

/// i∂t|Φ⟩ = H_gen|Φ⟩. Each report interval is refined until the Richardson
/// estimate of the RK4 error is at most tol·Δt·max(1, ‖ψ‖).
EvolutionResult evolve_ket(const DysonFamily& f, const ComplexVector& psi0, Window window, double tol,
                           const IntegratorOptions& opt = {});

/// i∂t|Φ⟩⟩ = H_gen†|Φ⟩⟩.
EvolutionResult evolve_brabra(const DysonFamily& f, const ComplexVector& phi0_bb, Window window, double tol,
                              const IntegratorOptions& opt = {});

/// Integrates both members on a common report grid and logs ⟨⟨Φ(t)|Ψ(t)⟩.
EvolutionResult evolve_doublet(const DysonFamily& f, const ComplexVector& phi0_bb, const ComplexVector& psi0,
                               Window window, double tol, const IntegratorOptions& opt = {});

/// ⟨⟨Φ(t)|Ψ(t)⟩ at a report time shared by both trajectories.
Complex physical_overlap(const Trajectory& bb, const Trajectory& ket, double t);

/// max_t ‖|Φ(t)⟩⟩ − Θ(t)|Φ(t)⟩‖ over the report grid of a doublet whose
/// brabra and ket were started from the same physical state.
double brabra_compatibility(const DysonFamily& f, const EvolutionResult& r);

struct PullbackReport {
  std::vector<double> times;
  std::vector<double> deviation;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Integrates iu̇ = 𝔤u with 𝔤 the P-space generator, forms
/// U_R = Ω⁻¹(t)u(t)Ω(t0) and compares U_R·ψ0 with the evolved ket.
PullbackReport pullback_check(const DysonFamily& f, const ComplexVector& psi0, Window window, double tol,
                              const IntegratorOptions& opt = {});

/// Plain RK4 with a fixed number of equal steps (order studies).
ComplexVector rk4_fixed(const DysonFamily& f, const ComplexVector& psi0, Window window, std::size_t steps);

// Reference families --------------------------------------------------------

/// Ω(t) = R(ωt)·diag(a, 1)·R(ωt)ᵀ with a Hermitian 𝔥(t) = 𝔥0 + ε·cos(t)σ_z
/// and H(t) = Ω⁻¹𝔥Ω. Θ(t) rotates, H_gen is non-Hermitian.
DysonFamily rotating_family(double omega_rate = 0.7, double stretch = 2.0, double drive = 0.3,
                            Window domain = {0.0, 10.0});

/// Ω(t) = (1−s(t))Ω_a + s(t)Ω_b with s = sin²(πt/(2T)), between two fixed
/// non-unitary 2×2 maps, and the same style of Hermitian 𝔥(t).
DysonFamily interpolating_family(Window domain = {0.0, 10.0});

/// Static Ω from the metric of the 2×2 PT model [[iγ, 1], [1, −iγ]].
DysonFamily static_pt_family(double gamma = 0.5, Window domain = {0.0, 10.0});

/// Ω(t) = e^{iλt}·I with the static 2×2 PT Hamiltonian; H_gen = H + λI.
DysonFamily phase_family(double lambda = 0.3, double gamma = 0.5, Window domain = {0.0, 10.0});

}  // namespace cryptoherm::evolution
