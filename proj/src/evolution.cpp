#include "cryptoherm/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cryptoherm/metric.hpp"

namespace cryptoherm::evolution {

namespace {

constexpr Complex kI{0.0, 1.0};

ComplexMatrix checked(const ComplexMatrix& m, std::size_t dim, const char* what) {
  const auto n = static_cast<Eigen::Index>(dim);
  if (m.rows() != n || m.cols() != n) {
    std::ostringstream os;
    os << what << " has shape " << m.rows() << "x" << m.cols() << ", expected " << n << "x" << n;
    fail(ErrorCode::InvalidArgument, os.str());
  }
  if (!m.allFinite()) fail(ErrorCode::InvalidArgument, std::string(what) + " is not finite");
  return m;
}

ComplexMatrix central_difference(const MatrixFn& omega, double t, double h) {
  return (omega(t + h) - omega(t - h)) / (2.0 * h);
}

}  // namespace

DysonFamily::DysonFamily(std::size_t dim, MatrixFn h, MatrixFn omega, std::optional<MatrixFn> omega_dot,
                         Window domain, double h_fd)
    : dim_(dim), h_(std::move(h)), omega_(std::move(omega)), omega_dot_(std::move(omega_dot)), domain_(domain) {
  require(dim_ >= 1, "DysonFamily: dimension must be positive");
  require(static_cast<bool>(h_) && static_cast<bool>(omega_), "DysonFamily: H and Omega closures are required");
  require(domain_.t1 > domain_.t0, "DysonFamily: empty time domain");
  h_fd_ = h_fd > 0.0 ? h_fd : 1e-5 * domain_.length();

  for (double t : {domain_.t0, domain_.t1}) {
    omega_inverse(t);
    checked(h_(t), dim_, "H(t)");
    if (!omega_dot_) continue;
    const ComplexMatrix analytic = checked((*omega_dot_)(t), dim_, "dOmega/dt");
    const ComplexMatrix fd = central_difference(omega_, t, h_fd_);
    const double scale = std::max(analytic.norm(), omega_(t).norm());
    if ((analytic - fd).norm() > 1e-6 * scale) {
      std::ostringstream os;
      os << "analytic dOmega/dt disagrees with the central difference at t=" << t << " (relative "
         << (analytic - fd).norm() / scale << ")";
      fail(ErrorCode::InvalidArgument, os.str());
    }
  }
}

void DysonFamily::check_time(double t) const {
  const double slack = 1e-12 * domain_.length();
  if (!(t >= domain_.t0 - slack && t <= domain_.t1 + slack)) {
    std::ostringstream os;
    os << "t=" << t << " lies outside the family domain [" << domain_.t0 << ", " << domain_.t1 << "]";
    fail(ErrorCode::WindowViolation, os.str());
  }
}

ComplexMatrix DysonFamily::hamiltonian(double t) const {
  check_time(t);
  return checked(h_(t), dim_, "H(t)");
}

ComplexMatrix DysonFamily::omega(double t) const {
  check_time(t);
  return checked(omega_(t), dim_, "Omega(t)");
}

ComplexMatrix DysonFamily::omega_dot(double t) const {
  check_time(t);
  if (omega_dot_) return checked((*omega_dot_)(t), dim_, "dOmega/dt");
  return central_difference(omega_, t, h_fd_);
}

ComplexMatrix DysonFamily::omega_inverse(double t) const {
  const ComplexMatrix o = omega(t);
  Eigen::PartialPivLU<ComplexMatrix> lu(o);
  const double rcond = linalg::reciprocal_condition(lu);
  if (!(rcond * max_condition >= 1.0)) {
    std::ostringstream os;
    os << "Omega(t) at t=" << t << " has condition estimate " << (rcond > 0 ? 1.0 / rcond : INFINITY);
    fail(ErrorCode::IllConditionedOmega, os.str());
  }
  return lu.inverse();
}

ComplexMatrix DysonFamily::metric(double t) const {
  const ComplexMatrix o = omega(t);
  return o.adjoint() * o;
}

ComplexMatrix h_gen(const DysonFamily& f, double t) {
  return f.hamiltonian(t) - kI * (f.omega_inverse(t) * f.omega_dot(t));
}

ComplexMatrix p_space_generator(const DysonFamily& f, double t) {
  const ComplexMatrix o = f.omega(t);
  const ComplexMatrix inv = f.omega_inverse(t);
  return o * h_gen(f, t) * inv + kI * (f.omega_dot(t) * inv);
}

double EvolutionResult::overlap_drift() const {
  double drift = 0.0;
  for (const Complex& c : overlap_log) drift = std::max(drift, std::abs(c - overlap_log.front()));
  return drift;
}

// ---------------------------------------------------------------------------

namespace {

using Generator = std::function<ComplexMatrix(double)>;

// y' = −i G(t) y, m equal RK4 steps on [a, b].
ComplexMatrix rk4(const Generator& g, ComplexMatrix y, double a, double b, std::size_t m, StepStats& st) {
  const double h = (b - a) / static_cast<double>(m);
  ComplexMatrix g0 = g(a);
  for (std::size_t s = 0; s < m; ++s) {
    const double t = a + h * static_cast<double>(s);
    const double t_next = s + 1 == m ? b : t + h;
    const ComplexMatrix g_mid = g(t + 0.5 * h);
    ComplexMatrix g1 = g(t_next);
    const ComplexMatrix k1 = -kI * (g0 * y);
    const ComplexMatrix k2 = -kI * (g_mid * (y + 0.5 * h * k1));
    const ComplexMatrix k3 = -kI * (g_mid * (y + 0.5 * h * k2));
    const ComplexMatrix k4 = -kI * (g1 * (y + h * k3));
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    g0 = std::move(g1);
    st.rhs_evaluations += 4;
  }
  st.substeps += m;
  return y;
}

std::vector<double> report_grid(Window w, std::size_t intervals) {
  require(intervals >= 1, "at least one report interval is required");
  std::vector<double> t(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k)
    t[k] = w.t0 + w.length() * static_cast<double>(k) / static_cast<double>(intervals);
  t.back() = w.t1;
  return t;
}

std::vector<ComplexMatrix> integrate(const Generator& g, const ComplexMatrix& y0, const std::vector<double>& times,
                                     double tol, const IntegratorOptions& opt, StepStats& st) {
  require(tol > 0.0, "integration tolerance must be positive");
  std::vector<ComplexMatrix> out{y0};
  ComplexMatrix y = y0;
  std::size_t m = std::max<std::size_t>(1, opt.initial_substeps);
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double a = times[k];
    const double b = times[k + 1];
    const double budget = tol * (b - a) * std::max(1.0, y.norm());
    m = std::max<std::size_t>(std::max<std::size_t>(1, opt.initial_substeps), m / 2);
    ComplexMatrix coarse = rk4(g, y, a, b, m, st);
    for (;;) {
      if (2 * m > opt.max_substeps) {
        std::ostringstream os;
        os << "step size underflow on [" << a << ", " << b << "]: " << 2 * m << " substeps exceed the limit";
        fail(ErrorCode::StepSizeUnderflow, os.str());
      }
      ComplexMatrix fine = rk4(g, y, a, b, 2 * m, st);
      const double err = (fine - coarse).norm() / 15.0;
      if (!std::isfinite(err)) fail(ErrorCode::StepSizeUnderflow, "integration diverged");
      m *= 2;
      if (err <= budget) {
        st.max_error_estimate = std::max(st.max_error_estimate, err);
        y = std::move(fine);
        break;
      }
      ++st.refinements;
      coarse = std::move(fine);
    }
    out.push_back(y);
  }
  return out;
}

void check_start(const DysonFamily& f, const ComplexVector& v, Window w) {
  require(v.size() == static_cast<Eigen::Index>(f.dim()), "initial vector has the wrong dimension");
  require(v.norm() > 0.0 && v.allFinite(), "initial vector must be finite and nonzero");
  require(w.t1 > w.t0, "empty evolution window");
  const Window& d = f.domain();
  if (w.t0 < d.t0 || w.t1 > d.t1) fail(ErrorCode::WindowViolation, "evolution window exceeds the family domain");
}

std::vector<ComplexVector> columns(const std::vector<ComplexMatrix>& ys) {
  std::vector<ComplexVector> out;
  out.reserve(ys.size());
  for (const auto& y : ys) out.emplace_back(y.col(0));
  return out;
}

}  // namespace

EvolutionResult evolve_ket(const DysonFamily& f, const ComplexVector& psi0, Window window, double tol,
                           const IntegratorOptions& opt) {
  check_start(f, psi0, window);
  EvolutionResult r;
  r.times = report_grid(window, opt.report_intervals);
  Generator g = [&f](double t) { return h_gen(f, t); };
  r.kets = columns(integrate(g, psi0, r.times, tol, opt, r.step_stats));
  return r;
}

EvolutionResult evolve_brabra(const DysonFamily& f, const ComplexVector& phi0_bb, Window window, double tol,
                              const IntegratorOptions& opt) {
  check_start(f, phi0_bb, window);
  EvolutionResult r;
  r.times = report_grid(window, opt.report_intervals);
  Generator g = [&f](double t) { return ComplexMatrix(h_gen(f, t).adjoint()); };
  r.brabras = columns(integrate(g, phi0_bb, r.times, tol, opt, r.step_stats));
  return r;
}

EvolutionResult evolve_doublet(const DysonFamily& f, const ComplexVector& phi0_bb, const ComplexVector& psi0,
                               Window window, double tol, const IntegratorOptions& opt) {
  EvolutionResult r = evolve_ket(f, psi0, window, tol, opt);
  EvolutionResult bb = evolve_brabra(f, phi0_bb, window, tol, opt);
  r.brabras = std::move(bb.brabras);
  r.step_stats.substeps += bb.step_stats.substeps;
  r.step_stats.rhs_evaluations += bb.step_stats.rhs_evaluations;
  r.step_stats.refinements += bb.step_stats.refinements;
  r.step_stats.max_error_estimate = std::max(r.step_stats.max_error_estimate, bb.step_stats.max_error_estimate);
  for (std::size_t k = 0; k < r.times.size(); ++k) r.overlap_log.push_back(r.brabras[k].dot(r.kets[k]));
  return r;
}

Complex physical_overlap(const Trajectory& bb, const Trajectory& ket, double t) {
  if (bb.times != ket.times || bb.states.size() != bb.times.size() || ket.states.size() != ket.times.size())
    fail(ErrorCode::GridMismatch, "brabra and ket trajectories use different report grids");
  const auto it = std::find(bb.times.begin(), bb.times.end(), t);
  if (it == bb.times.end()) fail(ErrorCode::GridMismatch, "requested time is not a report time");
  const auto k = static_cast<std::size_t>(it - bb.times.begin());
  return bb.states[k].dot(ket.states[k]);
}

double brabra_compatibility(const DysonFamily& f, const EvolutionResult& r) {
  if (r.brabras.size() != r.kets.size()) fail(ErrorCode::GridMismatch, "doublet trajectories differ in length");
  double worst = 0.0;
  for (std::size_t k = 0; k < r.times.size(); ++k)
    worst = std::max(worst, (r.brabras[k] - f.metric(r.times[k]) * r.kets[k]).norm());
  return worst;
}

PullbackReport pullback_check(const DysonFamily& f, const ComplexVector& psi0, Window window, double tol,
                              const IntegratorOptions& opt) {
  require(f.dim() <= 64, "pullback_check: dense propagator limited to dim <= 64");
  require(tol > 0.0, "pullback_check: tolerance must be positive");
  check_start(f, psi0, window);
  // both integrations run well below the comparison tolerance
  const double inner = 1e-2 * tol / std::max(1.0, window.length());
  const EvolutionResult ket = evolve_ket(f, psi0, window, inner, opt);

  StepStats st;
  Generator g = [&f](double t) { return p_space_generator(f, t); };
  const auto n = static_cast<Eigen::Index>(f.dim());
  const auto u = integrate(g, ComplexMatrix::Identity(n, n), ket.times, inner, opt, st);
  const ComplexMatrix omega0 = f.omega(window.t0);

  PullbackReport rep;
  rep.tolerance = tol;
  rep.times = ket.times;
  for (std::size_t k = 0; k < ket.times.size(); ++k) {
    const ComplexVector pulled = f.omega_inverse(ket.times[k]) * u[k] * omega0 * psi0;
    rep.deviation.push_back((pulled - ket.kets[k]).norm());
    rep.max_deviation = std::max(rep.max_deviation, rep.deviation.back());
  }
  rep.passed = rep.max_deviation <= tol;
  return rep;
}

ComplexVector rk4_fixed(const DysonFamily& f, const ComplexVector& psi0, Window window, std::size_t steps) {
  check_start(f, psi0, window);
  require(steps >= 1, "rk4_fixed: at least one step");
  StepStats st;
  Generator g = [&f](double t) { return h_gen(f, t); };
  return rk4(g, psi0, window.t0, window.t1, steps, st).col(0);
}

// ---------------------------------------------------------------------------

namespace {

ComplexMatrix rotation(double a) {
  ComplexMatrix r(2, 2);
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

ComplexMatrix rotation_dot(double a) {
  ComplexMatrix r(2, 2);
  r << -std::sin(a), -std::cos(a), std::cos(a), -std::sin(a);
  return r;
}

ComplexMatrix driven_hermitian(double t, double drive) {
  ComplexMatrix h(2, 2);
  h << 1.0 + drive * std::cos(t), Complex(0.5, 0.2), Complex(0.5, -0.2), -1.0 - drive * std::cos(t);
  return h;
}

ComplexMatrix pt_hamiltonian(double gamma) {
  ComplexMatrix h(2, 2);
  h << Complex(0.0, gamma), 1.0, 1.0, Complex(0.0, -gamma);
  return h;
}

}  // namespace

DysonFamily rotating_family(double omega_rate, double stretch, double drive, Window domain) {
  require(stretch > 0.0, "rotating_family: stretch must be positive");
  ComplexMatrix d = ComplexMatrix::Identity(2, 2);
  d(0, 0) = stretch;
  ComplexMatrix d_inv = ComplexMatrix::Identity(2, 2);
  d_inv(0, 0) = 1.0 / stretch;
  auto omega = [=](double t) -> ComplexMatrix {
    const ComplexMatrix r = rotation(omega_rate * t);
    return r * d * r.transpose();
  };
  auto omega_dot = [=](double t) -> ComplexMatrix {
    const ComplexMatrix r = rotation(omega_rate * t);
    const ComplexMatrix rd = rotation_dot(omega_rate * t);
    return omega_rate * (rd * d * r.transpose() + r * d * rd.transpose());
  };
  auto h = [=](double t) -> ComplexMatrix {
    const ComplexMatrix r = rotation(omega_rate * t);
    return r * d_inv * r.transpose() * driven_hermitian(t, drive) * r * d * r.transpose();
  };
  return DysonFamily(2, h, omega, omega_dot, domain);
}

DysonFamily interpolating_family(Window domain) {
  ComplexMatrix a(2, 2), b(2, 2);
  a << 1.0, 0.4, 0.0, 1.0;
  b << 1.5, 0.0, Complex(0.0, 0.3), 0.8;
  const double t0 = domain.t0;
  const double len = domain.length();
  auto s = [=](double t) { return std::pow(std::sin(std::numbers::pi * (t - t0) / (2.0 * len)), 2); };
  auto s_dot = [=](double t) {
    return std::numbers::pi / (2.0 * len) * std::sin(std::numbers::pi * (t - t0) / len);
  };
  auto omega = [=](double t) -> ComplexMatrix { return (1.0 - s(t)) * a + s(t) * b; };
  auto omega_dot = [=](double t) -> ComplexMatrix { return s_dot(t) * (b - a); };
  auto h = [=](double t) -> ComplexMatrix {
    const ComplexMatrix o = omega(t);
    return o.inverse() * driven_hermitian(t, 0.3) * o;
  };
  return DysonFamily(2, h, omega, omega_dot, domain);
}

DysonFamily static_pt_family(double gamma, Window domain) {
  const ComplexMatrix h = pt_hamiltonian(gamma);
  const ComplexMatrix o = metric::dyson_from_metric(metric::build_metric(h)).omega;
  return DysonFamily(
      2, [h](double) { return h; }, [o](double) { return o; },
      MatrixFn([](double) -> ComplexMatrix { return ComplexMatrix::Zero(2, 2); }), domain);
}

DysonFamily phase_family(double lambda, double gamma, Window domain) {
  const ComplexMatrix h = pt_hamiltonian(gamma);
  auto omega = [lambda](double t) -> ComplexMatrix {
    return std::exp(kI * (lambda * t)) * ComplexMatrix::Identity(2, 2);
  };
  auto omega_dot = [lambda](double t) -> ComplexMatrix {
    return (kI * lambda) * std::exp(kI * (lambda * t)) * ComplexMatrix::Identity(2, 2);
  };
  return DysonFamily(2, [h](double) { return h; }, omega, omega_dot, domain);
}

}  // namespace cryptoherm::evolution
