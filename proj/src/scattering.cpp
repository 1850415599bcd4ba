#include "cryptoherm/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cryptoherm/metric.hpp"

namespace cryptoherm::scattering {

namespace {

constexpr Complex kI{0.0, 1.0};

void check_sign(int mass_sign) { require(mass_sign == 1 || mass_sign == -1, "mass_sign must be +1 or -1"); }

// e^{ik} continued to complex energy, on the decaying sheet |z| ≤ 1.
Complex lead_phase(Complex energy, int mass_sign) {
  const Complex c = 1.0 - static_cast<double>(mass_sign) * energy / 2.0;
  Complex z = c + kI * std::sqrt(1.0 - c * c);
  if (std::abs(z) > 1.0) z = 1.0 / z;
  return z;
}

// Solves the open-lead system for the model's banded form.
ComplexVector open_solve_banded(const models::LatticeModel& m, Complex energy, Complex z) {
  const linalg::Tridiagonal h = m.tridiagonal();
  const std::size_t n = h.size();
  const double hop = -static_cast<double>(m.mass_sign);
  std::vector<Complex> diag(n), off(h.off.data(), h.off.data() + h.off.size());
  for (std::size_t i = 0; i < n; ++i) diag[i] = h.diag(static_cast<Eigen::Index>(i)) - energy;
  diag.front() += hop * z;
  diag.back() += hop * z;
  ComplexVector rhs = ComplexVector::Zero(static_cast<Eigen::Index>(n));
  const Complex sin_k = (z - 1.0 / z) / (2.0 * kI);
  rhs(0) = 2.0 * kI * hop * sin_k;
  return linalg::solve_tridiagonal(off, diag, off, rhs);
}

ScatteringResult amplitudes(const ComplexVector& psi, double energy, double k) {
  ScatteringResult s;
  s.energy = energy;
  s.wavenumber = k;
  const auto last = psi.size() - 1;
  s.r = psi(0) - 1.0;
  s.t = psi(last) * std::exp(-kI * (k * static_cast<double>(last)));
  s.unitarity_deficit = std::abs(std::norm(s.r) + std::norm(s.t) - 1.0);
  if (!std::isfinite(s.unitarity_deficit)) fail(ErrorCode::NonConvergence, "scattering system is singular");
  return s;
}

}  // namespace

std::pair<double, double> band(int mass_sign) {
  check_sign(mass_sign);
  return mass_sign > 0 ? std::pair{0.0, 4.0} : std::pair{-4.0, 0.0};
}

double wavenumber(double energy, int mass_sign) {
  check_sign(mass_sign);
  const double c = 1.0 - static_cast<double>(mass_sign) * energy / 2.0;
  if (!(std::abs(c) < 1.0) || std::sqrt(1.0 - c * c) <= 1e-8) {
    std::ostringstream os;
    os << "energy " << energy << " is not inside the open band";
    fail(ErrorCode::BandEdge, os.str());
  }
  return std::acos(c);
}

ScatteringResult scatter(const models::LatticeModel& m, double energy) {
  check_sign(m.mass_sign);
  require(m.dim() >= 3, "scatter: chain too short");
  const auto last = m.potential.size() - 1;
  if (m.potential(0) != Complex(0.0) || m.potential(last) != Complex(0.0))
    fail(ErrorCode::SupportTouchesLead, "the interaction reaches the first or last site");
  const double k = wavenumber(energy, m.mass_sign);
  return amplitudes(open_solve_banded(m, energy, std::exp(kI * k)), energy, k);
}

ScatteringResult scatter_dense(const ComplexMatrix& h, int mass_sign, double energy) {
  linalg::check_operator(h, "scatter_dense");
  const double k = wavenumber(energy, mass_sign);
  const Eigen::Index n = h.rows();
  const double hop = -static_cast<double>(mass_sign);
  const Complex z = std::exp(kI * k);
  ComplexMatrix a = h - energy * ComplexMatrix::Identity(n, n);
  a(0, 0) += hop * z;
  a(n - 1, n - 1) += hop * z;
  ComplexVector rhs = ComplexVector::Zero(n);
  rhs(0) = 2.0 * kI * hop * std::sin(k);
  return amplitudes(a.partialPivLu().solve(rhs), energy, k);
}

double unitarity_deficit_weighted(const models::LatticeModel& m, const ComplexMatrix& theta, double energy) {
  const ComplexMatrix h = m.hamiltonian();
  const metric::MetricOperator cert = metric::certify_metric(h, theta, 1e-8);
  const metric::DysonMap d = metric::dyson_from_metric(cert);
  const ComplexMatrix herm = metric::hermitize(h, d, 1e-8);
  return scatter_dense(herm, m.mass_sign, energy).unitarity_deficit;
}

LocalityReport asymptotic_locality_check(const ComplexMatrix& theta, std::size_t lead_width, double threshold) {
  linalg::check_operator(theta, "asymptotic_locality_check");
  const Eigen::Index n = theta.rows();
  const auto w = static_cast<Eigen::Index>(lead_width);
  require(2 * w < n, "asymptotic_locality_check: lead width must be below dim/2");
  LocalityReport rep;
  rep.threshold = threshold;
  rep.lead_width = lead_width;
  auto outer = [&](Eigen::Index i) { return i < w || i >= n - w; };
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || !(outer(i) || outer(j))) continue;
      const double norm = std::sqrt(std::abs(theta(i, i).real() * theta(j, j).real()));
      const double v = norm > 0.0 ? std::abs(theta(i, j)) / norm : INFINITY;
      rep.measure = std::max(rep.measure, v);
    }
  }
  rep.passed = rep.measure <= threshold;
  return rep;
}

Complex inverse_transmission(const models::LatticeModel& m, Complex energy) {
  check_sign(m.mass_sign);
  const Complex z = lead_phase(energy, m.mass_sign);
  // 1/T from the continuant of the open system, so a pole is a zero rather
  // than a singular solve. g_k = f_k z^k / prod(-dl) keeps the free part O(1).
  const linalg::Tridiagonal h = m.tridiagonal();
  const std::size_t n = h.size();
  const double hop = -static_cast<double>(m.mass_sign);
  auto d = [&](std::size_t i) {
    Complex v = h.diag(static_cast<Eigen::Index>(i)) - energy;
    if (i == 0) v += hop * z;
    if (i + 1 == n) v += hop * z;
    return v;
  };
  auto off = [&](std::size_t i) { return h.off(static_cast<Eigen::Index>(i)); };
  Complex g2 = 1.0, g1 = d(0) * z;
  for (std::size_t k = 2; k <= n; ++k) {
    const Complex a = -off(k - 2);
    const Complex scale2 = k == 2 ? z * z / a : z * z / (a * -off(k - 3));
    const Complex g = d(k - 1) * (z / a) * g1 - off(k - 2) * off(k - 2) * scale2 * g2;
    g2 = g1;
    g1 = g;
  }
  const Complex sin_k = (z - 1.0 / z) / (2.0 * kI);
  return g1 / (z * 2.0 * kI * hop * sin_k);
}

PoleTable pole_scan(const models::LatticeModel& m, EnergyWindow window, std::size_t grid_density) {
  require(grid_density >= 3, "pole_scan: grid density must be at least 3");
  require(window.upper.real() > window.lower.real() && window.upper.imag() >= window.lower.imag(),
          "pole_scan: empty energy window");
  const auto [lo, hi] = band(m.mass_sign);
  if (!(window.upper.real() < lo - kBandMargin || window.lower.real() > hi + kBandMargin)) {
    std::ostringstream os;
    os << "pole window must stay " << kBandMargin << " away from the band [" << lo << ", " << hi << "]";
    fail(ErrorCode::BandEdge, os.str());
  }

  const std::size_t nr = grid_density;
  const std::size_t ni = window.upper.imag() > window.lower.imag() ? grid_density : 1;
  auto node = [&](std::size_t a, std::size_t b) {
    const double x = window.lower.real() +
                     (window.upper.real() - window.lower.real()) * static_cast<double>(a) / static_cast<double>(nr - 1);
    const double y = ni == 1 ? window.lower.imag()
                             : window.lower.imag() + (window.upper.imag() - window.lower.imag()) *
                                                         static_cast<double>(b) / static_cast<double>(ni - 1);
    return Complex(x, y);
  };
  std::vector<double> mag(nr * ni);
  for (std::size_t a = 0; a < nr; ++a)
    for (std::size_t b = 0; b < ni; ++b) {
      const double v = std::abs(inverse_transmission(m, node(a, b)));
      mag[a * ni + b] = std::isfinite(v) ? v : 0.0;
    }

  const double scale = *std::max_element(mag.begin(), mag.end());
  const double width = std::abs(window.upper - window.lower);
  const double step = (window.upper.real() - window.lower.real()) / static_cast<double>(nr - 1);
  PoleTable table;
  for (std::size_t a = 0; a < nr; ++a) {
    for (std::size_t b = 0; b < ni; ++b) {
      const double here = mag[a * ni + b];
      bool minimum = true;
      for (int da = -1; da <= 1 && minimum; ++da)
        for (int db = -1; db <= 1; ++db) {
          if (da == 0 && db == 0) continue;
          const auto aa = static_cast<long>(a) + da;
          const auto bb = static_cast<long>(b) + db;
          if (aa < 0 || bb < 0 || aa >= static_cast<long>(nr) || bb >= static_cast<long>(ni)) continue;
          if (mag[static_cast<std::size_t>(aa) * ni + static_cast<std::size_t>(bb)] < here) {
            minimum = false;
            break;
          }
        }
      if (!minimum) continue;

      // secant on 1/T from the grid minimum and a nearby point
      Complex e0 = node(a, b);
      Complex e1 = e0 + Complex(0.25 * step, 0.0);
      Complex f0 = inverse_transmission(m, e0);
      Complex f1 = inverse_transmission(m, e1);
      bool converged = false;
      for (int it = 0; it < 100; ++it) {
        if (f1 == f0) break;
        const Complex e2 = e1 - f1 * (e1 - e0) / (f1 - f0);
        if (!std::isfinite(e2.real()) || !std::isfinite(e2.imag())) break;
        e0 = e1;
        f0 = f1;
        e1 = e2;
        f1 = inverse_transmission(m, e1);
        if (std::abs(e1 - e0) <= 1e-8 * std::max(1.0, std::abs(e1)) || f1 == Complex(0.0)) {
          converged = true;
          break;
        }
      }
      // a flat 1/T also stalls the secant, so require an actual zero
      if (!converged || std::abs(f1) > 1e-8 * std::max(1.0, scale)) continue;
      // reject wanderers and duplicates
      if (std::abs(e1 - 0.5 * (window.lower + window.upper)) > width) continue;
      if (std::abs(lead_phase(e1, m.mass_sign)) >= 1.0) continue;
      const bool seen = std::any_of(table.poles.begin(), table.poles.end(),
                                    [&](Complex p) { return std::abs(p - e1) <= 1e-6; });
      if (!seen) table.poles.push_back(e1);
    }
  }
  std::sort(table.poles.begin(), table.poles.end(), linalg::spectral_less);
  table.no_poles_found = table.poles.empty();

  const ComplexVector values = linalg::tridiagonal_eigenvalues(m.tridiagonal());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const Complex e = values(i);
    if (std::abs(e.imag()) > linalg::reality_threshold(e)) continue;
    if (e.real() < window.lower.real() || e.real() > window.upper.real()) continue;
    table.bound_states.push_back(e.real());
  }
  for (double e : table.bound_states) {
    if (table.poles.empty()) {
      table.unmatched.push_back(e);
      continue;
    }
    const auto best = std::min_element(table.poles.begin(), table.poles.end(), [e](Complex a, Complex b) {
      return std::abs(a - e) < std::abs(b - e);
    });
    const double gap = std::abs(*best - e);
    table.matches.push_back({e, *best, gap});
    table.max_mismatch = std::max(table.max_mismatch, gap);
  }
  return table;
}

}  // namespace cryptoherm::scattering
