#include "cryptoherm/sturm.hpp"

#include <cmath>
#include <sstream>

#include "cryptoherm/metric.hpp"

namespace cryptoherm::sturm {

namespace {

constexpr Complex kI{0.0, 1.0};

double parse_number(const std::string& text, const std::string& spec) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v))
    fail(ErrorCode::InvalidArgument, "bad numeric parameter in path '" + spec + "'");
  return v;
}

// Fills in missing derivatives by central differences of the previous one.
PathFn differentiate(const PathFn& f) {
  return [f](double s) {
    const double eta = 1e-3 * (1.0 + std::abs(s));
    return (f(s + eta) - f(s - eta)) / (2.0 * eta);
  };
}

}  // namespace

PathSpec identity_path() {
  return {"identity", [](double s) { return Complex(s); }, [](double) { return Complex(1.0); },
          [](double) { return Complex(0.0); }, [](double) { return Complex(0.0); }};
}

PathSpec scale_path(double a) {
  std::ostringstream label;
  label << "scale:" << a;
  return {label.str(), [a](double s) { return Complex(a * s); }, [a](double) { return Complex(a); },
          [](double) { return Complex(0.0); }, [](double) { return Complex(0.0); }};
}

PathSpec shift_bump_path(double eps) {
  std::ostringstream label;
  label << "shift-bump:" << eps;
  return {label.str(), [eps](double s) { return s - kI * eps * std::exp(-s * s); },
          [eps](double s) { return 1.0 + 2.0 * kI * eps * s * std::exp(-s * s); },
          [eps](double s) { return 2.0 * kI * eps * (1.0 - 2.0 * s * s) * std::exp(-s * s); },
          [eps](double s) { return 2.0 * kI * eps * (4.0 * s * s * s - 6.0 * s) * std::exp(-s * s); }};
}

PathSpec power_path(double alpha) {
  std::ostringstream label;
  label << "power:" << alpha;
  return {label.str(), [alpha](double s) { return Complex(s + alpha * s * s * s); },
          [alpha](double s) { return Complex(1.0 + 3.0 * alpha * s * s); },
          [alpha](double s) { return Complex(6.0 * alpha * s); }, [alpha](double) { return Complex(6.0 * alpha); }};
}

PathSpec parse_path(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  if (name == "identity" && colon == std::string::npos) return identity_path();
  if (colon == std::string::npos) fail(ErrorCode::InvalidArgument, "unknown path '" + spec + "'");
  const double arg = parse_number(spec.substr(colon + 1), spec);
  if (name == "scale") return scale_path(arg);
  if (name == "shift-bump") return shift_bump_path(arg);
  if (name == "power") return power_path(arg);
  fail(ErrorCode::InvalidArgument, "unknown path '" + spec + "'");
}

Potential parse_potential(const std::string& name) {
  if (name == "harmonic") return [](Complex x) { return x * x; };
  if (name == "quartic") return [](Complex x) { return x * x * x * x; };
  if (name == "ix3") return [](Complex x) { return kI * x * x * x; };
  if (name == "zero") return [](Complex) { return Complex(0.0); };
  fail(ErrorCode::InvalidArgument, "unknown potential '" + name + "'");
}

ComplexMatrix SturmProblem::weight() const { return w.asDiagonal().toDenseMatrix(); }

bool SturmProblem::weight_non_hermitian() const {
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (std::abs(w(i).imag()) > 1e-14 * std::abs(w(i))) return true;
  return false;
}

SturmProblem rectify(const PathSpec& path, const Potential& v, SGrid grid, std::string potential_label) {
  require(static_cast<bool>(path.q) && static_cast<bool>(v), "rectify: path and potential are required");
  require(grid.n >= 3 && grid.s_max > grid.s_min, "rectify: invalid grid");
  PathSpec p = path;
  if (!p.q1) p.q1 = differentiate(p.q);
  if (!p.q2) p.q2 = differentiate(p.q1);
  if (!p.q3) p.q3 = differentiate(p.q2);

  const auto n = static_cast<Eigen::Index>(grid.n);
  const double h = grid.spacing();
  SturmProblem sp;
  sp.grid = grid;
  sp.path = p;
  sp.potential_label = std::move(potential_label);
  sp.w = ComplexVector(n);
  sp.delta = ComplexVector(n);
  sp.h.diag = ComplexVector(n);
  sp.h.off = ComplexVector::Constant(n - 1, -1.0 / (h * h));

  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = grid.node(static_cast<std::size_t>(i));
    const Complex d1 = p.q1(s);
    if (!(std::abs(d1) > 1e-10)) {
      std::ostringstream os;
      os << "q'(s) vanishes at s=" << s;
      fail(ErrorCode::DegeneratePath, os.str());
    }
    const Complex d2 = p.q2(s);
    const Complex d3 = p.q3(s);
    const Complex ratio = d2 / d1;
    sp.delta(i) = 0.75 * ratio * ratio - 0.5 * d3 / d1;
    sp.w(i) = d1 * d1;
    sp.h.diag(i) = 2.0 / (h * h) + sp.w(i) * v(p.q(s)) + sp.delta(i);
  }
  require(sp.h.diag.allFinite(), "rectify: potential is not finite along the path");

  const double delta_scale = sp.delta.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double jump_w = std::abs(sp.w(i + 1) - sp.w(i));
    const double jump_d = std::abs(sp.delta(i + 1) - sp.delta(i));
    const double ref_w = std::max(std::abs(sp.w(i)), std::abs(sp.w(i + 1)));
    const double ref_d = std::max({std::abs(sp.delta(i)), std::abs(sp.delta(i + 1)), delta_scale});
    if (jump_w > 0.5 * ref_w || (ref_d > 0.0 && jump_d > 0.5 * ref_d)) {
      std::ostringstream os;
      os << "W or the derivative correction changes by more than 50% near s=" << grid.node(static_cast<std::size_t>(i))
         << "; refine the grid";
      fail(ErrorCode::GridTooCoarse, os.str());
    }
  }
  return sp;
}

linalg::Spectrum solve_sturm(const SturmProblem& p, std::size_t k, double tol) {
  if (k < 1 || k > p.dim() / 10) {
    std::ostringstream os;
    os << "solve_sturm: " << k << " levels requested but only " << p.dim() / 10 << " are trustworthy on " << p.dim()
       << " nodes";
    fail(ErrorCode::InvalidArgument, os.str());
  }
  return linalg::geig_tridiagonal(p.h, p.w, k, tol);
}

SturmHermiticityReport sturm_hermiticity_check(const SturmProblem& p, const ComplexMatrix& theta) {
  const auto n = static_cast<Eigen::Index>(p.dim());
  require(theta.rows() == n && theta.cols() == n, "sturm_hermiticity_check: dimension mismatch");
  const ComplexMatrix h = p.hamiltonian();
  const ComplexMatrix w = p.weight();
  SturmHermiticityReport r;
  r.h_residual = metric::quasi_hermiticity_residual(h, theta);
  r.w_residual = metric::quasi_hermiticity_residual(w, theta);
  const ComplexMatrix reduced = p.w.cwiseInverse().asDiagonal() * h;
  r.reduced_residual = metric::quasi_hermiticity_residual(reduced, theta);
  r.weight_non_hermitian = p.weight_non_hermitian();
  try {
    const linalg::HermitianRoot root = linalg::herm_sqrt_with_inverse(theta, 1e-12);
    r.physical_weight_defect = linalg::hermiticity_defect(root.root * w * root.inverse);
  } catch (const Error&) {
    r.physical_weight_defect.reset();
  }
  return r;
}

ComplexMatrix sturm_metric(const SturmProblem& p, double tol) {
  require(p.dim() <= 1000, "sturm_metric: dense construction limited to 1000 nodes");
  const ComplexMatrix reduced = p.w.cwiseInverse().asDiagonal() * p.hamiltonian();
  return metric::build_metric(reduced, tol).theta;
}

ComplexMatrix sturm_subspace_metric(const SturmProblem& p, std::size_t k, double tol) {
  require(p.dim() <= 4000, "sturm_subspace_metric: dense output limited to 4000 nodes");
  const linalg::Spectrum s = solve_sturm(p, k, tol);
  for (Eigen::Index i = 0; i < s.values.size(); ++i)
    if (std::abs(s.values(i).imag()) > linalg::reality_threshold(s.values(i))) {
      std::ostringstream os;
      os << "level " << s.values(i) << " is not real; the subspace carries no metric";
      fail(ErrorCode::ComplexSpectrum, os.str());
    }
  // left vectors of W⁻¹H are m = W†l
  const auto n = static_cast<Eigen::Index>(p.dim());
  ComplexMatrix theta = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < s.values.size(); ++i) {
    ComplexVector m = p.w.conjugate().cwiseProduct(s.left.col(i));
    m.normalize();
    theta += m * m.adjoint();
  }
  return 0.5 * (theta + theta.adjoint());
}

}  // namespace cryptoherm::sturm
