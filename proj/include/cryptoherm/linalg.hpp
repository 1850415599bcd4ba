#pragma once

// Dense complex spectral kernels shared by every other module.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "cryptoherm/error.hpp"

namespace cryptoherm {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kDefaultTol = 1e-10;

namespace linalg {

/// Eigenvalues with paired, unit-normalized right and left eigenvectors.
///
/// Column n of `right` satisfies M r = λ r, column n of `left` satisfies
/// l^† M = λ l^†. `left^† right` is diagonal within the tolerance used to build
/// the spectrum. Values are sorted lexicographically by (Re, Im).
struct Spectrum {
  ComplexVector values;
  ComplexMatrix right;
  ComplexMatrix left;
  bool reality_flag = false;
  double reality_tolerance = 0.0;
  /// Largest relative residual of the eigenpairs that were certified.
  double max_residual = 0.0;
  /// Condition number of the weight operator (1 for ordinary problems).
  double weight_condition = 1.0;

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  /// Largest |Im λ|.
  double max_imaginary() const;
  /// Off-diagonal mass of left^† right relative to its smallest diagonal entry.
  double biorthogonality_defect() const;
};

/// Tolerance under which an eigenvalue counts as real: 1e-9·(1+|λ|).
double reality_threshold(Complex value);

/// Throws InvalidArgument unless `m` is square, non-empty and finite.
void check_operator(const ComplexMatrix& m, const char* what);

double fro_norm(const ComplexMatrix& m);

/// Reciprocal condition estimate of an LU factorization, capped by the pivot
/// spread (Eigen's estimate reports 1 for an exactly zero pivot).
double reciprocal_condition(const Eigen::PartialPivLU<ComplexMatrix>& lu);

/// Right/left eigendecomposition of a general complex matrix.
Spectrum eig(const ComplexMatrix& m, double tol = kDefaultTol);

/// Generalized problem H r = E W r with left partners l^† H = E l^† W.
/// Residuals are certified against tol·(‖H‖ + |E|·‖W‖).
Spectrum geig(const ComplexMatrix& h, const ComplexMatrix& w, double tol = kDefaultTol);

/// Principal Hermitian square root of a Hermitian positive-definite matrix.
ComplexMatrix herm_sqrt(const ComplexMatrix& p, double tol = kDefaultTol);

/// Principal root together with its inverse, from one eigendecomposition.
struct HermitianRoot {
  ComplexMatrix root;
  ComplexMatrix inverse;
  double min_eigenvalue = 0.0;
};
HermitianRoot herm_sqrt_with_inverse(const ComplexMatrix& p, double tol = kDefaultTol);

/// Smallest eigenvalue of the Hermitian part of `p`.
double min_hermitian_eigenvalue(const ComplexMatrix& p);

/// ‖M − M^†‖_F / ‖M‖_F (0 for the zero matrix).
double hermiticity_defect(const ComplexMatrix& m);

/// Lexicographic (Re, Im) ordering used for every reported spectrum.
bool spectral_less(Complex a, Complex b);

// ---------------------------------------------------------------------------
// Tridiagonal kernels. A "symmetric tridiagonal" here is complex symmetric
// (A^T = A), not Hermitian; the real symmetric case is a special case.

struct Tridiagonal {
  ComplexVector diag;
  ComplexVector off;  // size n-1, A(i,i+1) = A(i+1,i) = off(i)

  std::size_t size() const { return static_cast<std::size_t>(diag.size()); }
  ComplexMatrix dense() const;
  bool is_real() const;
};

/// All eigenvalues of a complex symmetric tridiagonal matrix (implicit QL),
/// sorted by (Re, Im).
ComplexVector tridiagonal_eigenvalues(const Tridiagonal& t);

/// Solves (sub, diag, sup) x = rhs by Gaussian elimination with partial pivoting.
ComplexVector solve_tridiagonal(std::span<const Complex> sub, std::span<const Complex> diag,
                                std::span<const Complex> sup, const ComplexVector& rhs);

/// Lowest-k (by Re) generalized eigenpairs of a complex symmetric tridiagonal
/// H against a diagonal weight W. Left vectors are conj(right) because both
/// operators are complex symmetric.
Spectrum geig_tridiagonal(const Tridiagonal& h, const ComplexVector& weight, std::size_t k,
                          double tol = kDefaultTol);

}  // namespace linalg
}  // namespace cryptoherm
