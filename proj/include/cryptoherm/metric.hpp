#pragma once

// Metric operators Θ for quasi-Hermitian H (H^†Θ = ΘH), their Dyson
// factorization Θ = Ω^†Ω, hermitization and the Θ-weighted dual vectors.

#include <vector>

#include "cryptoherm/linalg.hpp"

namespace cryptoherm::metric {

/// Hermitian positive-definite Θ with the weights that generated it.
struct MetricOperator {
  ComplexMatrix theta;
  std::vector<double> kappa;
  /// ‖H^†Θ − ΘH‖ / (‖H‖‖Θ‖) for the generating H.
  double quasi_residual = 0.0;
  double min_eigenvalue = 0.0;

  std::size_t dim() const { return static_cast<std::size_t>(theta.rows()); }
};

struct DysonMap {
  ComplexMatrix omega;
  ComplexMatrix inverse;
  MetricOperator source_metric;
};

/// The Θ-weighted dual ⟨⟨ψ| = ⟨ψ|Θ of a ket.
struct Brabra {
  Eigen::RowVectorXcd row_vector;
  ComplexVector source_ket;

  /// ⟨⟨ψ|φ⟩, the S-space inner product with another ket.
  Complex operator()(const ComplexVector& ket) const;
};

class ComplexSpectrumError : public Error {
 public:
  ComplexSpectrumError(const std::string& what, std::vector<Complex> offending)
      : Error(ErrorCode::ComplexSpectrum, what), offending_(std::move(offending)) {}
  const std::vector<Complex>& offending() const noexcept { return offending_; }

 private:
  std::vector<Complex> offending_;
};

double quasi_hermiticity_residual(const ComplexMatrix& h, const ComplexMatrix& theta);

/// Θ = Σ κ_n l_n l_n^† over unit left eigenvectors of H. Exactly degenerate
/// eigenvalues share one orthonormalized left basis, which realizes the
/// identity block on that eigenspace.
MetricOperator build_metric(const ComplexMatrix& h, const std::vector<double>& kappa, double tol = kDefaultTol);

/// Same as build_metric with all weights equal to one.
MetricOperator build_metric(const ComplexMatrix& h, double tol = kDefaultTol);

/// Wraps an externally supplied Θ as a certified MetricOperator for H.
/// Throws CertificationFailed when the quasi-Hermiticity residual exceeds `tol`.
MetricOperator certify_metric(const ComplexMatrix& h, const ComplexMatrix& theta, double tol = kDefaultTol);

DysonMap dyson_from_metric(const MetricOperator& m);

/// 𝔥 = Ω H Ω^{-1}, certified Hermitian and isospectral with H.
ComplexMatrix hermitize(const ComplexMatrix& h, const DysonMap& d, double tol = kDefaultTol);

Brabra brabra(const ComplexVector& ket, const ComplexMatrix& theta);

/// Result of the fundamental-length (band) metric search.
struct BandMetric {
  MetricOperator metric;
  std::size_t theta_range = 0;
  /// ‖Θ outside |i−j| ≤ theta_range‖_F / ‖Θ‖_F at the selected κ.
  double out_of_band = 0.0;
  /// True when out_of_band could not be pushed below the requested tolerance.
  bool infeasible = false;
  std::size_t sweeps = 0;
};

inline constexpr double kBandKappaMin = 1e-6;
inline constexpr double kBandKappaMax = 1e6;

/// Chooses κ to minimize the relative Frobenius mass of Θ outside the band
/// |i−j| ≤ theta_range. Coordinate descent starts from κ = 1 at range 0 and
/// is continued through every intermediate range, so the reported mass is
/// non-increasing in theta_range. Global optimality is not claimed.
BandMetric band_metric(const ComplexMatrix& h, std::size_t theta_range, double tol = kDefaultTol);

}  // namespace cryptoherm::metric
