#include "cryptoherm/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cryptoherm::metric {
namespace {

using linalg::fro_norm;

// Left eigenvectors of H, unit length, orthonormalized inside clusters of
// exactly degenerate eigenvalues.
struct LeftBasis {
  ComplexVector values;
  ComplexMatrix q;
};

LeftBasis left_basis(const ComplexMatrix& h, double tol) {
  const linalg::Spectrum s = linalg::eig(h, tol);
  std::vector<Complex> offending;
  for (Eigen::Index i = 0; i < s.values.size(); ++i)
    if (std::abs(s.values(i).imag()) > linalg::reality_threshold(s.values(i))) offending.push_back(s.values(i));
  if (!offending.empty()) {
    std::ostringstream os;
    os << offending.size() << " non-real eigenvalue(s), e.g. " << offending.front()
       << "; no positive-definite metric exists";
    throw ComplexSpectrumError(os.str(), std::move(offending));
  }

  LeftBasis out{s.values, s.left};
  const Eigen::Index n = s.values.size();
  for (Eigen::Index i = 0; i < n;) {
    Eigen::Index j = i + 1;
    while (j < n && std::abs(s.values(j) - s.values(i)) <= 1e-10 * (1.0 + std::abs(s.values(i)))) ++j;
    if (j - i > 1) {
      Eigen::HouseholderQR<ComplexMatrix> qr(out.q.middleCols(i, j - i));
      out.q.middleCols(i, j - i) = qr.householderQ() * ComplexMatrix::Identity(n, j - i);
    }
    i = j;
  }
  return out;
}

ComplexMatrix assemble(const ComplexMatrix& q, const std::vector<double>& kappa) {
  RealVector k = Eigen::Map<const RealVector>(kappa.data(), static_cast<Eigen::Index>(kappa.size()));
  ComplexMatrix theta = q * k.cast<Complex>().asDiagonal() * q.adjoint();
  return 0.5 * (theta + theta.adjoint());
}

MetricOperator finalize(const ComplexMatrix& h, ComplexMatrix theta, std::vector<double> kappa, double tol) {
  MetricOperator m;
  m.theta = std::move(theta);
  m.kappa = std::move(kappa);
  m.min_eigenvalue = linalg::min_hermitian_eigenvalue(m.theta);
  if (!(m.min_eigenvalue > 0.0)) {
    std::ostringstream os;
    os << "metric has minimum eigenvalue " << m.min_eigenvalue;
    throw NotPositiveDefiniteError(os.str(), m.min_eigenvalue);
  }
  m.quasi_residual = quasi_hermiticity_residual(h, m.theta);
  if (m.quasi_residual > tol) {
    std::ostringstream os;
    os << "quasi-Hermiticity residual " << m.quasi_residual << " exceeds " << tol;
    fail(ErrorCode::CertificationFailed, os.str());
  }
  return m;
}

}  // namespace

Complex Brabra::operator()(const ComplexVector& ket) const {
  require(ket.size() == row_vector.size(), "brabra: dimension mismatch");
  return (row_vector * ket)(0);
}

double quasi_hermiticity_residual(const ComplexMatrix& h, const ComplexMatrix& theta) {
  require(h.rows() == theta.rows() && h.cols() == theta.cols(), "quasi_hermiticity_residual: dimension mismatch");
  const double scale = fro_norm(h) * fro_norm(theta);
  if (scale == 0.0) return 0.0;
  return (h.adjoint() * theta - theta * h).norm() / scale;
}

MetricOperator build_metric(const ComplexMatrix& h, const std::vector<double>& kappa, double tol) {
  linalg::check_operator(h, "build_metric");
  require(kappa.size() == static_cast<std::size_t>(h.rows()), "build_metric: kappa length must equal dim");
  for (double k : kappa) require(std::isfinite(k) && k > 0.0, "build_metric: kappa entries must be positive");
  const LeftBasis basis = left_basis(h, tol);
  return finalize(h, assemble(basis.q, kappa), kappa, tol);
}

MetricOperator build_metric(const ComplexMatrix& h, double tol) {
  linalg::check_operator(h, "build_metric");
  return build_metric(h, std::vector<double>(static_cast<std::size_t>(h.rows()), 1.0), tol);
}

MetricOperator certify_metric(const ComplexMatrix& h, const ComplexMatrix& theta, double tol) {
  linalg::check_operator(h, "certify_metric(H)");
  linalg::check_operator(theta, "certify_metric(theta)");
  require(h.rows() == theta.rows(), "certify_metric: dimension mismatch");
  if (linalg::hermiticity_defect(theta) > 1e-12) fail(ErrorCode::NotHermitian, "metric candidate is not Hermitian");
  return finalize(h, 0.5 * (theta + theta.adjoint()), {}, tol);
}

DysonMap dyson_from_metric(const MetricOperator& m) {
  const linalg::HermitianRoot r = linalg::herm_sqrt_with_inverse(m.theta, 1e-12);
  const double tn = fro_norm(m.theta);
  const Eigen::Index n = m.theta.rows();
  const double factor_err = (r.root.adjoint() * r.root - m.theta).norm() / tn;
  const double inverse_err = (r.root * r.inverse - ComplexMatrix::Identity(n, n)).norm();
  if (factor_err > 1e-10 || inverse_err > 1e-10) {
    std::ostringstream os;
    os << "Dyson factor certificate failed: |Ω†Ω−Θ|/|Θ| = " << factor_err << ", |ΩΩ⁻¹−I| = " << inverse_err;
    fail(ErrorCode::CertificationFailed, os.str());
  }
  return DysonMap{r.root, r.inverse, m};
}

ComplexMatrix hermitize(const ComplexMatrix& h, const DysonMap& d, double tol) {
  linalg::check_operator(h, "hermitize");
  require(h.rows() == d.omega.rows(), "hermitize: dimension mismatch");
  const double residual = quasi_hermiticity_residual(h, d.source_metric.theta);
  if (residual > tol) {
    std::ostringstream os;
    os << "metric is not a metric for this H (residual " << residual << " > " << tol << ")";
    fail(ErrorCode::HermitizationFailed, os.str());
  }
  ComplexMatrix hh = d.omega * h * d.inverse;
  const double defect = linalg::hermiticity_defect(hh);
  if (defect > 10.0 * tol) {
    std::ostringstream os;
    os << "hermitized operator has anti-Hermitian part " << defect << " > " << 10.0 * tol;
    fail(ErrorCode::HermitizationFailed, os.str());
  }

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (hh + hh.adjoint()), Eigen::EigenvaluesOnly);
  const ComplexVector original = linalg::eig(h, tol).values;
  const double scale = std::max(1.0, fro_norm(h));
  for (Eigen::Index i = 0; i < original.size(); ++i) {
    if (std::abs(original(i) - es.eigenvalues()(i)) > 1e-8 * scale) {
      std::ostringstream os;
      os << "hermitized spectrum differs at level " << i << ": " << original(i) << " vs " << es.eigenvalues()(i);
      fail(ErrorCode::HermitizationFailed, os.str());
    }
  }
  return hh;
}

Brabra brabra(const ComplexVector& ket, const ComplexMatrix& theta) {
  require(ket.size() == theta.rows() && theta.rows() == theta.cols(), "brabra: dimension mismatch");
  return Brabra{ket.adjoint() * theta, ket};
}

// ---------------------------------------------------------------------------
// Band (fundamental-length) metrics.

namespace {

// f(κ) = κᵀAκ / κᵀBκ where A is the out-of-band and B the full Gram form.
class BandObjective {
 public:
  BandObjective(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, RealVector kappa)
      : a_(a), b_(b), kappa_(std::move(kappa)) {
    ak_ = a_ * kappa_;
    bk_ = b_ * kappa_;
  }

  double value() const {
    const double num = std::max(0.0, kappa_.dot(ak_));
    const double den = kappa_.dot(bk_);
    return den > 0 ? num / den : 0.0;
  }

  const RealVector& kappa() const { return kappa_; }

  // Exact minimization of the ratio of quadratics along coordinate n,
  // projected to [lo, hi]. Returns true when the objective decreased.
  bool relax(Eigen::Index n, double lo, double hi) {
    const double x0 = kappa_(n);
    const double ann = a_(n, n), bnn = b_(n, n);
    const double ca = ak_(n) - ann * x0;  // cross terms Σ_{m≠n} A_nm κ_m
    const double cb = bk_(n) - bnn * x0;
    const double num_total = kappa_.dot(ak_), den_total = kappa_.dot(bk_);
    const double n0 = num_total - 2.0 * ca * x0 - ann * x0 * x0;
    const double d0 = den_total - 2.0 * cb * x0 - bnn * x0 * x0;
    auto ratio = [&](double x) {
      const double num = ann * x * x + 2.0 * ca * x + n0;
      const double den = bnn * x * x + 2.0 * cb * x + d0;
      return den > 0 ? std::max(0.0, num) / den : std::numeric_limits<double>::infinity();
    };

    double best_x = x0, best_f = ratio(x0);
    auto consider = [&](double x) {
      if (!(x >= lo && x <= hi)) return;
      const double fx = ratio(x);
      if (fx < best_f) {
        best_f = fx;
        best_x = x;
      }
    };
    consider(lo);
    consider(hi);
    // Stationary points: (A_nn b − a B_nn) x² + (A_nn D0 − N0 B_nn) x + (a D0 − N0 b) = 0.
    const double qa = ann * cb - ca * bnn;
    const double qb = ann * d0 - n0 * bnn;
    const double qc = ca * d0 - n0 * cb;
    if (std::abs(qa) > 1e-300) {
      const double disc = qb * qb - 4.0 * qa * qc;
      if (disc >= 0) {
        const double sq = std::sqrt(disc);
        const double qq = -0.5 * (qb + (qb >= 0 ? sq : -sq));
        consider(qq / qa);
        if (qq != 0.0) consider(qc / qq);
      }
    } else if (std::abs(qb) > 1e-300) {
      consider(-qc / qb);
    }
    if (best_x == x0 || !(best_f < ratio(x0) * (1.0 - 1e-15))) return false;
    // the expanded quadratics cancel badly near zero mass; confirm on the full form
    const double before = value();
    RealVector trial = kappa_;
    trial(n) = best_x;
    const double num = trial.dot(a_ * trial), den = trial.dot(b_ * trial);
    if (!(den > 0) || !(std::max(0.0, num) / den < before)) return false;
    kappa_ = trial;
    ak_ = a_ * kappa_;
    bk_ = b_ * kappa_;
    return true;
  }

  void set_kappa(const RealVector& kappa) {
    kappa_ = kappa;
    ak_ = a_ * kappa_;
    bk_ = b_ * kappa_;
  }

  void set_form(const Eigen::MatrixXd& a) {
    a_ = a;
    ak_ = a_ * kappa_;
  }

  // Rescale to unit geometric mean when that keeps every weight in bounds.
  void rebalance(double lo, double hi) {
    const double log_mean = kappa_.array().log().mean();
    const double factor = std::exp(-log_mean);
    const RealVector scaled = kappa_ * factor;
    if (scaled.minCoeff() >= lo && scaled.maxCoeff() <= hi) {
      kappa_ = scaled;
      ak_ *= factor;
      bk_ *= factor;
    }
  }

 private:
  Eigen::MatrixXd a_;
  Eigen::MatrixXd b_;
  RealVector kappa_;
  RealVector ak_;
  RealVector bk_;
};

}  // namespace

BandMetric band_metric(const ComplexMatrix& h, std::size_t theta_range, double tol) {
  linalg::check_operator(h, "band_metric");
  const Eigen::Index n = h.rows();
  require(theta_range < static_cast<std::size_t>(n), "band_metric: theta_range must be below dim");

  const LeftBasis basis = left_basis(h, kDefaultTol);
  const ComplexMatrix& q = basis.q;

  // Full Gram form B_mn = |q_n^† q_m|² and diagonal-offset blocks
  // C_d(m,n) = Σ_i q_m(i) conj(q_m(i+d)) conj(q_n(i)) q_n(i+d).
  const Eigen::MatrixXd full = (q.adjoint() * q).cwiseAbs2();
  auto offset_block = [&](Eigen::Index d) {
    const Eigen::Index rows = n - d;
    ComplexMatrix p(rows, n);
    for (Eigen::Index m = 0; m < n; ++m)
      p.col(m) = q.col(m).head(rows).cwiseProduct(q.col(m).tail(rows).conjugate());
    return Eigen::MatrixXd((p.transpose() * p.conjugate()).real());
  };

  // Direct mass from the assembled Θ. The Gram-form objective loses about
  // half the digits to cancellation, so stages are judged on this one.
  auto direct_mass = [&](const RealVector& kappa, std::size_t range) {
    const ComplexMatrix theta = q * kappa.cast<Complex>().asDiagonal() * q.adjoint();
    double outside = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (static_cast<std::size_t>(std::abs(i - j)) > range) outside += std::norm(theta(i, j));
    return std::sqrt(outside) / theta.norm();
  };

  Eigen::MatrixXd in_band = offset_block(0);
  BandObjective objective(full - in_band, full, RealVector::Ones(n));
  std::size_t sweeps = 0;
  double mass = 0.0;
  for (std::size_t b = 0; b <= theta_range; ++b) {
    if (b > 0) {
      in_band += 2.0 * offset_block(static_cast<Eigen::Index>(b));
      objective.set_form(full - in_band);
    }
    const RealVector start = objective.kappa();
    for (int sweep = 0; sweep < 500; ++sweep) {
      const double before = objective.value();
      if (before <= 1e-28) break;
      bool moved = false;
      for (Eigen::Index k = 0; k < n; ++k) moved |= objective.relax(k, kBandKappaMin, kBandKappaMax);
      objective.rebalance(kBandKappaMin, kBandKappaMax);
      ++sweeps;
      if (!moved || before - objective.value() <= 1e-13 * before) break;
    }
    mass = direct_mass(objective.kappa(), b);
    const double kept = direct_mass(start, b);
    if (kept < mass) {
      objective.set_kappa(start);
      mass = kept;
    }
  }

  BandMetric out;
  out.theta_range = theta_range;
  out.sweeps = sweeps;
  out.out_of_band = mass;
  out.infeasible = out.out_of_band > tol;
  std::vector<double> kappa(objective.kappa().data(), objective.kappa().data() + n);
  ComplexMatrix theta = assemble(q, kappa);
  out.metric = finalize(h, std::move(theta), std::move(kappa), kDefaultTol);
  return out;
}

}  // namespace cryptoherm::metric
