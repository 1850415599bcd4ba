#include "cryptoherm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace cryptoherm {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DefectiveMatrix: return "DefectiveMatrix";
    case ErrorCode::SingularWeight: return "SingularWeight";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::ComplexSpectrum: return "ComplexSpectrum";
    case ErrorCode::HermitizationFailed: return "HermitizationFailed";
    case ErrorCode::CertificationFailed: return "CertificationFailed";
    case ErrorCode::IllConditionedOmega: return "IllConditionedOmega";
    case ErrorCode::WindowViolation: return "WindowViolation";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::DegeneratePath: return "DegeneratePath";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::SingularTMap: return "SingularTMap";
    case ErrorCode::CenterOutOfRange: return "CenterOutOfRange";
    case ErrorCode::BandEdge: return "BandEdge";
    case ErrorCode::SupportTouchesLead: return "SupportTouchesLead";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace linalg {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void normalize_columns(ComplexMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double n = m.col(j).norm();
    if (n > 0) m.col(j) /= n;
  }
}

std::vector<Eigen::Index> sorted_order(const ComplexVector& values) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return spectral_less(values(a), values(b));
  });
  return order;
}

void apply_order(Spectrum& s) {
  const auto order = sorted_order(s.values);
  ComplexVector values(s.values.size());
  ComplexMatrix right(s.right.rows(), s.right.cols());
  ComplexMatrix left(s.left.rows(), s.left.cols());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(k);
    values(j) = s.values(order[k]);
    right.col(j) = s.right.col(order[k]);
    left.col(j) = s.left.col(order[k]);
  }
  s.values = std::move(values);
  s.right = std::move(right);
  s.left = std::move(left);
}

void classify_reality(Spectrum& s) {
  double largest = 0.0;
  for (Eigen::Index i = 0; i < s.values.size(); ++i) largest = std::max(largest, std::abs(s.values(i)));
  s.reality_tolerance = 1e-9 * (1.0 + largest);
  s.reality_flag = s.max_imaginary() <= s.reality_tolerance;
}

void check_biorthogonal(const Spectrum& s, double tol) {
  for (Eigen::Index n = 0; n < s.values.size(); ++n) {
    const double overlap = std::abs(s.left.col(n).dot(s.right.col(n)));
    if (overlap < tol) {
      std::ostringstream os;
      os << "left/right overlap " << overlap << " at eigenvalue " << s.values(n)
         << " is below " << tol << " (near-Jordan block)";
      throw DefectiveMatrixError(os.str(), overlap);
    }
  }
}

std::string describe_residual(double residual, double bound) {
  std::ostringstream os;
  os << "eigenpair residual " << residual << " exceeds " << bound;
  return os.str();
}

}  // namespace

double Spectrum::max_imaginary() const {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) worst = std::max(worst, std::abs(values(i).imag()));
  return worst;
}

double Spectrum::biorthogonality_defect() const {
  const ComplexMatrix g = left.adjoint() * right;
  double min_diag = std::numeric_limits<double>::infinity();
  double off = 0.0;
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    min_diag = std::min(min_diag, std::abs(g(i, i)));
    for (Eigen::Index j = 0; j < g.cols(); ++j)
      if (i != j) off = std::max(off, std::abs(g(i, j)));
  }
  return g.rows() == 0 ? 0.0 : off / min_diag;
}

double reality_threshold(Complex value) { return 1e-9 * (1.0 + std::abs(value)); }

bool spectral_less(Complex a, Complex b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

void check_operator(const ComplexMatrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    fail(ErrorCode::InvalidArgument, os.str());
  }
  if (!m.allFinite()) fail(ErrorCode::InvalidArgument, std::string(what) + ": matrix has non-finite entries");
}

double fro_norm(const ComplexMatrix& m) { return m.norm(); }

double hermiticity_defect(const ComplexMatrix& m) {
  const double n = m.norm();
  if (n == 0.0) return 0.0;
  return (m - m.adjoint()).norm() / n;
}

double min_hermitian_eigenvalue(const ComplexMatrix& p) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (p + p.adjoint()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(ErrorCode::NonConvergence, "Hermitian eigensolver failed");
  return es.eigenvalues()(0);
}

Spectrum eig(const ComplexMatrix& m, double tol) {
  check_operator(m, "eig");
  require(tol > 0, "eig: tolerance must be positive");
  const Eigen::Index n = m.rows();
  const double norm = fro_norm(m);

  Spectrum s;
  if (norm == 0.0) {
    s.values = ComplexVector::Zero(n);
    s.right = ComplexMatrix::Identity(n, n);
    s.left = s.right;
    classify_reality(s);
    return s;
  }

  if (hermiticity_defect(m) <= tol) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (m + m.adjoint()));
    if (es.info() != Eigen::Success) fail(ErrorCode::NonConvergence, "Hermitian eigensolver did not converge");
    s.values = es.eigenvalues().cast<Complex>();
    s.right = es.eigenvectors();
    s.left = s.right;
  } else {
    Eigen::ComplexEigenSolver<ComplexMatrix> es(m, true);
    if (es.info() != Eigen::Success) fail(ErrorCode::NonConvergence, "complex Schur iteration did not converge");
    s.values = es.eigenvalues();
    s.right = es.eigenvectors();
    normalize_columns(s.right);
    Eigen::FullPivLU<ComplexMatrix> lu(s.right);
    if (!lu.isInvertible())
      throw DefectiveMatrixError("right eigenvectors are linearly dependent", 0.0);
    s.left = lu.inverse().adjoint();
    normalize_columns(s.left);
  }
  apply_order(s);
  check_biorthogonal(s, tol);

  double worst = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex lambda = s.values(k);
    const double right_res = (m * s.right.col(k) - lambda * s.right.col(k)).norm();
    const double left_res = (m.adjoint() * s.left.col(k) - std::conj(lambda) * s.left.col(k)).norm();
    worst = std::max({worst, right_res / norm, left_res / norm});
  }
  s.max_residual = worst;
  if (worst > tol) fail(ErrorCode::NonConvergence, describe_residual(worst, tol));
  classify_reality(s);
  return s;
}

double reciprocal_condition(const Eigen::PartialPivLU<ComplexMatrix>& lu) {
  const RealVector pivots = lu.matrixLU().diagonal().cwiseAbs();
  if (!(pivots.maxCoeff() > 0.0)) return 0.0;
  return std::min(lu.rcond(), pivots.minCoeff() / pivots.maxCoeff());
}

Spectrum geig(const ComplexMatrix& h, const ComplexMatrix& w, double tol) {
  check_operator(h, "geig(H)");
  check_operator(w, "geig(W)");
  require(h.rows() == w.rows(), "geig: H and W must have the same dimension");

  Eigen::PartialPivLU<ComplexMatrix> lu(w);
  const double rcond = reciprocal_condition(lu);
  if (!(rcond > 1e-14)) {
    std::ostringstream os;
    os << "weight operator is numerically singular (reciprocal condition " << rcond << ")";
    fail(ErrorCode::SingularWeight, os.str());
  }
  const ComplexMatrix reduced = lu.solve(h);
  Spectrum s = eig(reduced, tol);
  s.weight_condition = 1.0 / rcond;

  // Left vectors of W^{-1}H are m with m^† = l^† W, so l = W^{-†} m.
  Eigen::PartialPivLU<ComplexMatrix> lu_adj(w.adjoint());
  s.left = lu_adj.solve(s.left);
  normalize_columns(s.left);
  check_biorthogonal(s, tol * 1e-2);

  const double hn = fro_norm(h);
  const double wn = fro_norm(w);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < h.rows(); ++k) {
    const Complex e = s.values(k);
    const double scale = hn + std::abs(e) * wn;
    const double rr = (h * s.right.col(k) - e * (w * s.right.col(k))).norm() / scale;
    const double lr = (h.adjoint() * s.left.col(k) - std::conj(e) * (w.adjoint() * s.left.col(k))).norm() / scale;
    worst = std::max({worst, rr, lr});
  }
  s.max_residual = worst;
  if (worst > tol) fail(ErrorCode::NonConvergence, describe_residual(worst, tol));
  return s;
}

HermitianRoot herm_sqrt_with_inverse(const ComplexMatrix& p, double tol) {
  check_operator(p, "herm_sqrt");
  const double norm = fro_norm(p);
  const double defect = hermiticity_defect(p);
  if (defect > tol) {
    std::ostringstream os;
    os << "relative anti-Hermitian part " << defect << " exceeds " << tol;
    fail(ErrorCode::NotHermitian, os.str());
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (p + p.adjoint()));
  if (es.info() != Eigen::Success) fail(ErrorCode::NonConvergence, "Hermitian eigensolver did not converge");
  const RealVector& d = es.eigenvalues();
  const double min_ev = d(0);
  if (!(min_ev > tol * norm)) {
    std::ostringstream os;
    os << "minimum eigenvalue " << min_ev << " is not above " << tol * norm;
    throw NotPositiveDefiniteError(os.str(), min_ev);
  }
  const ComplexMatrix& v = es.eigenvectors();
  const RealVector sq = d.cwiseSqrt();
  HermitianRoot out;
  out.root = v * sq.cast<Complex>().asDiagonal() * v.adjoint();
  out.inverse = v * sq.cwiseInverse().cast<Complex>().asDiagonal() * v.adjoint();
  out.root = 0.5 * (out.root + out.root.adjoint()).eval();
  out.inverse = 0.5 * (out.inverse + out.inverse.adjoint()).eval();
  out.min_eigenvalue = min_ev;

  const double residual = (out.root * out.root - p).norm() / norm;
  if (residual > std::max(tol, 1e3 * kEps)) {
    std::ostringstream os;
    os << "square-root residual " << residual << " exceeds " << tol;
    fail(ErrorCode::CertificationFailed, os.str());
  }
  return out;
}

ComplexMatrix herm_sqrt(const ComplexMatrix& p, double tol) { return herm_sqrt_with_inverse(p, tol).root; }

// ---------------------------------------------------------------------------

ComplexMatrix Tridiagonal::dense() const {
  const auto n = diag.size();
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = diag(i);
    if (i + 1 < n) m(i, i + 1) = m(i + 1, i) = off(i);
  }
  return m;
}

bool Tridiagonal::is_real() const {
  return diag.imag().isZero(0.0) && (off.size() == 0 || off.imag().isZero(0.0));
}

namespace {

// Implicit QL with Wilkinson-type shifts, written for complex symmetric input.
// The plane "rotations" satisfy c^2 + s^2 = 1 but are not unitary.
ComplexVector complex_symmetric_ql(ComplexVector d, ComplexVector e_in) {
  const Eigen::Index n = d.size();
  ComplexVector e = ComplexVector::Zero(n);
  if (n > 1) e.head(n - 1) = e_in;
  for (Eigen::Index l = 0; l < n; ++l) {
    int iterations = 0;
    for (;;) {
      Eigen::Index m = l;
      for (; m < n - 1; ++m) {
        const double dd = std::abs(d(m)) + std::abs(d(m + 1));
        if (std::abs(e(m)) <= kEps * dd) break;
      }
      if (m == l) break;
      if (++iterations > 60) fail(ErrorCode::NonConvergence, "tridiagonal QL exceeded 60 sweeps for one eigenvalue");

      Complex g = (d(l + 1) - d(l)) / (2.0 * e(l));
      Complex r = std::sqrt(g * g + 1.0);
      const Complex sg = std::abs(g + r) >= std::abs(g - r) ? r : -r;
      g = d(m) - d(l) + e(l) / (g + sg);
      Complex s = 1.0, c = 1.0, p = 0.0;
      bool deflated = false;
      for (Eigen::Index i = m - 1; i >= l; --i) {
        const Complex f = s * e(i);
        const Complex b = c * e(i);
        r = std::sqrt(f * f + g * g);
        e(i + 1) = r;
        if (r == Complex(0.0)) {
          if (f != Complex(0.0) || g != Complex(0.0))
            fail(ErrorCode::NonConvergence, "complex-orthogonal rotation broke down (isotropic vector)");
          d(i + 1) -= p;
          e(m) = 0.0;
          deflated = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d(i + 1) - p;
        r = (d(i) - g) * s + 2.0 * c * b;
        p = s * r;
        d(i + 1) = g + p;
        g = c * r - b;
      }
      if (deflated) continue;
      d(l) -= p;
      e(l) = g;
      e(m) = 0.0;
    }
  }
  return d;
}

// Tridiagonal solve with partial pivoting (LAPACK gtsv layout). Zero pivots
// are replaced by `pivot_floor` when it is positive, which is what inverse
// iteration needs; otherwise they are an error.
ComplexVector gtsv(std::vector<Complex> dl, std::vector<Complex> d, std::vector<Complex> du, ComplexVector b,
                   double pivot_floor) {
  const std::size_t n = d.size();
  auto idx = [](std::size_t k) { return static_cast<Eigen::Index>(k); };
  auto guard = [&](Complex& pivot) {
    if (pivot == Complex(0.0)) {
      if (pivot_floor <= 0) fail(ErrorCode::InvalidArgument, "tridiagonal system is singular");
      pivot = pivot_floor;
    }
  };
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (std::abs(d[k]) >= std::abs(dl[k])) {
      guard(d[k]);
      const Complex mult = dl[k] / d[k];
      d[k + 1] -= mult * du[k];
      b(idx(k + 1)) -= mult * b(idx(k));
      if (k + 2 < n) dl[k] = 0.0;
    } else {
      const Complex mult = d[k] / dl[k];
      d[k] = dl[k];
      const Complex temp = d[k + 1];
      d[k + 1] = du[k] - mult * temp;
      if (k + 2 < n) {
        dl[k] = du[k + 1];
        du[k + 1] = -mult * dl[k];
      }
      du[k] = temp;
      const Complex bt = b(idx(k));
      b(idx(k)) = b(idx(k + 1));
      b(idx(k + 1)) = bt - mult * b(idx(k + 1));
    }
  }
  guard(d[n - 1]);
  b(idx(n - 1)) /= d[n - 1];
  if (n > 1) b(idx(n - 2)) = (b(idx(n - 2)) - du[n - 2] * b(idx(n - 1))) / d[n - 2];
  for (std::size_t kk = n; kk-- > 2;) {
    const std::size_t k = kk - 2;
    b(idx(k)) = (b(idx(k)) - du[k] * b(idx(k + 1)) - dl[k] * b(idx(k + 2))) / d[k];
  }
  return b;
}

ComplexVector tridiagonal_apply(const Tridiagonal& t, const ComplexVector& x) {
  const Eigen::Index n = t.diag.size();
  ComplexVector y = t.diag.cwiseProduct(x);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    y(i) += t.off(i) * x(i + 1);
    y(i + 1) += t.off(i) * x(i);
  }
  return y;
}

}  // namespace

ComplexVector tridiagonal_eigenvalues(const Tridiagonal& t) {
  const Eigen::Index n = t.diag.size();
  require(n > 0 && t.off.size() == n - 1, "tridiagonal_eigenvalues: inconsistent band sizes");
  require(t.diag.allFinite() && t.off.allFinite(), "tridiagonal_eigenvalues: non-finite entries");
  ComplexVector values;
  if (t.is_real()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    // computeFromTridiagonal does not rescale, and unscaled it can stall
    // (seen on 2000-node Sturm grids); the complex QL is the fallback
    const double scale = std::max(t.diag.cwiseAbs().maxCoeff(), n > 1 ? t.off.cwiseAbs().maxCoeff() : 0.0);
    const double s = scale > 0.0 ? scale : 1.0;
    RealVector d = t.diag.real() / s;
    RealVector e = t.off.real() / s;
    es.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
    if (es.info() == Eigen::Success)
      values = (es.eigenvalues() * s).cast<Complex>();
    else
      values = complex_symmetric_ql(t.diag, t.off);
  } else {
    values = complex_symmetric_ql(t.diag, t.off);
  }
  std::sort(values.data(), values.data() + values.size(), spectral_less);
  return values;
}

ComplexVector solve_tridiagonal(std::span<const Complex> sub, std::span<const Complex> diag,
                                std::span<const Complex> sup, const ComplexVector& rhs) {
  const std::size_t n = diag.size();
  require(n > 0 && sub.size() + 1 == n && sup.size() + 1 == n && static_cast<std::size_t>(rhs.size()) == n,
          "solve_tridiagonal: inconsistent sizes");
  std::vector<Complex> dl(sub.begin(), sub.end());
  dl.push_back(0.0);
  std::vector<Complex> du(sup.begin(), sup.end());
  du.push_back(0.0);
  return gtsv(std::move(dl), {diag.begin(), diag.end()}, std::move(du), rhs, 0.0);
}

Spectrum geig_tridiagonal(const Tridiagonal& h, const ComplexVector& weight, std::size_t k, double tol) {
  const Eigen::Index n = h.diag.size();
  require(n > 0 && h.off.size() == n - 1 && weight.size() == n, "geig_tridiagonal: inconsistent sizes");
  require(k >= 1 && static_cast<Eigen::Index>(k) <= n, "geig_tridiagonal: level count out of range");
  require(weight.allFinite(), "geig_tridiagonal: non-finite weight");

  const double wmax = weight.cwiseAbs().maxCoeff();
  const double wmin = weight.cwiseAbs().minCoeff();
  if (!(wmin > 1e-14 * wmax)) fail(ErrorCode::SingularWeight, "diagonal weight has (near-)zero entries");

  // Symmetric reduction A = S H S with S = W^{-1/2}; any square-root branch works.
  const ComplexVector scale = weight.cwiseSqrt().cwiseInverse();
  Tridiagonal a;
  a.diag = h.diag.cwiseProduct(scale).cwiseProduct(scale);
  a.off = ComplexVector(n > 0 ? n - 1 : 0);
  for (Eigen::Index i = 0; i + 1 < n; ++i) a.off(i) = h.off(i) * scale(i) * scale(i + 1);

  const ComplexVector all = tridiagonal_eigenvalues(a);
  const auto kk = static_cast<Eigen::Index>(k);

  Spectrum s;
  s.values = all.head(kk);
  s.right = ComplexMatrix(n, kk);
  s.weight_condition = wmax / wmin;

  const double anorm = a.diag.cwiseAbs().maxCoeff() + 2.0 * (n > 1 ? a.off.cwiseAbs().maxCoeff() : 0.0);
  std::vector<Complex> sub(a.off.data(), a.off.data() + a.off.size());
  for (Eigen::Index j = 0; j < kk; ++j) {
    const Complex lambda = s.values(j);
    std::vector<Complex> d(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = a.diag(i) - lambda;
    ComplexVector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = 1.0 + 0.01 * std::sin(0.7 * static_cast<double>(i));
    y.normalize();
    for (int it = 0; it < 3; ++it) {
      auto dl = sub;
      dl.push_back(0.0);
      auto du = sub;
      du.push_back(0.0);
      y = gtsv(std::move(dl), d, std::move(du), y, kEps * anorm);
      y.normalize();
    }
    s.right.col(j) = scale.cwiseProduct(y);
  }
  normalize_columns(s.right);
  s.left = s.right.conjugate();

  const double hn = std::sqrt(h.diag.squaredNorm() + 2.0 * h.off.squaredNorm());
  const double wn = weight.norm();
  double worst = 0.0;
  for (Eigen::Index j = 0; j < kk; ++j) {
    const Complex e = s.values(j);
    const ComplexVector r = s.right.col(j);
    const double res = (tridiagonal_apply(h, r) - e * weight.cwiseProduct(r)).norm() / (hn + std::abs(e) * wn);
    worst = std::max(worst, res);
  }
  s.max_residual = worst;
  if (worst > tol) fail(ErrorCode::NonConvergence, describe_residual(worst, tol));
  check_biorthogonal(s, tol * 1e-2);
  classify_reality(s);
  return s;
}

}  // namespace linalg
}  // namespace cryptoherm
