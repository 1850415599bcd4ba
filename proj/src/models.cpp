#include "cryptoherm/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cryptoherm::models {

linalg::Tridiagonal LatticeModel::tridiagonal() const {
  linalg::Tridiagonal t;
  t.diag = static_cast<double>(mass_sign) * kinetic.diag + potential;
  t.off = static_cast<double>(mass_sign) * kinetic.off;
  return t;
}

ComplexMatrix LatticeModel::hamiltonian() const { return tridiagonal().dense(); }

LatticeModel LatticeModel::with_mass_sign(int sign) const {
  require(sign == 1 || sign == -1, "mass_sign must be +1 or -1");
  LatticeModel copy = *this;
  copy.mass_sign = sign;
  return copy;
}

linalg::Tridiagonal chain_kinetic(std::size_t n) {
  require(n >= 1, "chain_kinetic: empty chain");
  const auto size = static_cast<Eigen::Index>(n);
  linalg::Tridiagonal t;
  t.diag = ComplexVector::Constant(size, 2.0);
  t.off = ComplexVector::Constant(size - 1, -1.0);
  return t;
}

// ---------------------------------------------------------------------------

SusyPair susy_pair(const Superpotential& w, const Grid& grid, const std::optional<ComplexMatrix>& t_map) {
  require(static_cast<bool>(w), "susy_pair: superpotential is empty");
  require(grid.n >= 2 && grid.x_max > grid.x_min, "susy_pair: invalid grid");
  const auto n = static_cast<Eigen::Index>(grid.n);
  const double h = grid.spacing();

  ComplexMatrix t = ComplexMatrix::Identity(n, n);
  if (t_map) {
    require(t_map->rows() == n && t_map->cols() == n, "susy_pair: T map must be n x n");
    t = *t_map;
  }
  Eigen::PartialPivLU<ComplexMatrix> lu(t);
  if (!t.allFinite() || !(linalg::reciprocal_condition(lu) > 1e-12)) fail(ErrorCode::SingularTMap, "T map is not invertible");
  const ComplexMatrix t_inv = lu.inverse();

  ComplexMatrix forward = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    forward(i, i) = -1.0 / h;
    if (i + 1 < n) forward(i, i + 1) = 1.0 / h;
  }
  const ComplexMatrix backward = -forward.transpose();
  ComplexVector wv(n);
  for (Eigen::Index i = 0; i < n; ++i) wv(i) = w(grid.node(static_cast<std::size_t>(i)));
  require(wv.allFinite(), "susy_pair: superpotential is not finite on the grid");

  SusyPair p;
  p.spacing = h;
  p.t_map = t;
  p.a = -t * forward + t * wv.asDiagonal();
  p.b = backward * t_inv + wv.asDiagonal() * t_inv;
  p.h_minus = p.b * p.a;
  p.h_plus = p.a * p.b;
  const double scale = linalg::fro_norm(p.a) * linalg::fro_norm(p.h_minus);
  p.intertwining_residual = scale > 0 ? (p.a * p.h_minus - p.h_plus * p.a).norm() / scale : 0.0;
  return p;
}

std::size_t PairingReport::bulk_zero_modes() const {
  auto bulk = [](const ZeroMode& z) { return !z.edge_localized; };
  return static_cast<std::size_t>(std::count_if(zero_modes_minus.begin(), zero_modes_minus.end(), bulk) +
                                  std::count_if(zero_modes_plus.begin(), zero_modes_plus.end(), bulk));
}

namespace {

bool edge_localized(const ComplexVector& v) {
  const Eigen::Index n = v.size();
  const Eigen::Index m = std::max<Eigen::Index>(1, n / 10);
  const double total = v.squaredNorm();
  return v.head(m).squaredNorm() > 0.5 * total || v.tail(m).squaredNorm() > 0.5 * total;
}

struct Sector {
  std::vector<Complex> levels;
  std::vector<ZeroMode> zeros;
};

Sector split(const ComplexMatrix& h, double tol) {
  const linalg::Spectrum s = linalg::eig(h, kDefaultTol);
  Sector out;
  for (Eigen::Index i = 0; i < s.values.size(); ++i) {
    if (std::abs(s.values(i)) <= tol)
      out.zeros.push_back({s.values(i), edge_localized(s.right.col(i))});
    else
      out.levels.push_back(s.values(i));
  }
  return out;
}

}  // namespace

PairingReport isospectrality_report(const ComplexMatrix& h_minus, const ComplexMatrix& h_plus, double tol) {
  require(tol > 0, "isospectrality_report: tolerance must be positive");
  Sector minus = split(h_minus, tol);
  Sector plus = split(h_plus, tol);

  PairingReport r;
  r.tolerance = tol;
  r.zero_modes_minus = std::move(minus.zeros);
  r.zero_modes_plus = std::move(plus.zeros);

  std::sort(minus.levels.begin(), minus.levels.end(),
            [](Complex a, Complex b) { return std::abs(a) < std::abs(b); });
  std::vector<bool> used(plus.levels.size(), false);
  for (Complex e : minus.levels) {
    std::size_t best = plus.levels.size();
    double best_gap = 0.0;
    for (std::size_t j = 0; j < plus.levels.size(); ++j) {
      if (used[j]) continue;
      const double gap = std::abs(plus.levels[j] - e);
      if (best == plus.levels.size() || gap < best_gap) {
        best = j;
        best_gap = gap;
      }
    }
    if (best < plus.levels.size() && best_gap <= tol) {
      used[best] = true;
      r.pairs.push_back({e, plus.levels[best], best_gap});
      r.max_mismatch = std::max(r.max_mismatch, best_gap);
    } else {
      r.unpaired_minus.push_back(e);
    }
  }
  for (std::size_t j = 0; j < plus.levels.size(); ++j)
    if (!used[j]) r.unpaired_plus.push_back(plus.levels[j]);
  return r;
}

PairingReport isospectrality_report(const SusyPair& p, double tol) {
  return isospectrality_report(p.h_minus, p.h_plus, tol);
}

// ---------------------------------------------------------------------------

LatticeModel singular_oscillator(double gamma, double length, std::size_t n) {
  require(gamma > -1.0, "singular_oscillator: gamma must exceed -1");
  require(length > 0.0, "singular_oscillator: length must be positive");
  require(n >= 1000, "singular_oscillator: at least 1000 nodes are required");
  const double h = length / static_cast<double>(n);
  if (h > 0.05) {
    std::ostringstream os;
    os << "spacing " << h << " does not resolve the 1/x^2 core; use n >= "
       << static_cast<std::size_t>(std::ceil(length / 0.05));
    fail(ErrorCode::GridTooCoarse, os.str());
  }
  const auto size = static_cast<Eigen::Index>(n);
  LatticeModel m;
  m.label = "singular-osc";
  m.spacing = h;
  m.kinetic.diag = ComplexVector::Constant(size, 2.0 / (h * h));
  m.kinetic.off = ComplexVector::Constant(size - 1, -1.0 / (h * h));
  m.potential = ComplexVector(size);
  const double core = gamma * (gamma + 1.0);
  for (Eigen::Index i = 0; i < size; ++i) {
    const double x = h * static_cast<double>(i + 1);
    m.potential(i) = x * x + core / (x * x);
  }
  m.parameters = {{"gamma", gamma}, {"length", length}, {"n", static_cast<double>(n)}};
  return m;
}

std::vector<double> singular_oscillator_levels(double gamma, double length, std::size_t n, std::size_t count) {
  const LatticeModel m = singular_oscillator(gamma, length, n);
  require(count >= 1 && count <= n, "singular_oscillator_levels: level count out of range");
  const ComplexVector values = linalg::tridiagonal_eigenvalues(m.tridiagonal());
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = values(static_cast<Eigen::Index>(i)).real();
  return out;
}

LatticeModel pt_chain(std::size_t n, double gamma, double g, int mass_sign) {
  require(n >= 2, "pt_chain: at least two sites are required");
  require(mass_sign == 1 || mass_sign == -1, "pt_chain: mass_sign must be +1 or -1");
  const auto size = static_cast<Eigen::Index>(n);
  LatticeModel m;
  m.label = "pt-chain";
  m.mass_sign = mass_sign;
  m.kinetic.diag = ComplexVector::Zero(size);
  m.kinetic.off = ComplexVector::Constant(size - 1, g);
  m.potential = ComplexVector::Zero(size);
  m.potential(0) = Complex(0.0, gamma);
  m.potential(size - 1) = Complex(0.0, -gamma);
  m.parameters = {{"n", static_cast<double>(n)}, {"gamma", gamma}, {"g", g}};
  return m;
}

std::size_t smeared_support_radius(double width) { return static_cast<std::size_t>(std::ceil(4.0 * width)); }

LatticeModel smeared_interaction(std::size_t n, const std::vector<Center>& centers, double width, int mass_sign) {
  require(n >= 3, "smeared_interaction: chain too short");
  require(width >= 1.0, "smeared_interaction: width must be at least one lattice site");
  require(mass_sign == 1 || mass_sign == -1, "smeared_interaction: mass_sign must be +1 or -1");
  const auto radius = static_cast<double>(smeared_support_radius(width));
  const auto size = static_cast<Eigen::Index>(n);

  LatticeModel m;
  m.label = "smeared";
  m.mass_sign = mass_sign;
  m.kinetic = chain_kinetic(n);
  m.potential = ComplexVector::Zero(size);
  m.parameters = {{"n", static_cast<double>(n)}, {"width", width}, {"centers", static_cast<double>(centers.size())}};
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const Center& ctr = centers[c];
    if (!(ctr.position - radius >= 1.0 && ctr.position + radius <= static_cast<double>(n) - 2.0)) {
      std::ostringstream os;
      os << "center at " << ctr.position << " with support radius " << radius << " does not fit strictly inside "
         << n << " sites";
      fail(ErrorCode::CenterOutOfRange, os.str());
    }
    for (Eigen::Index i = 0; i < size; ++i) {
      const double dx = static_cast<double>(i) - ctr.position;
      if (std::abs(dx) <= radius) m.potential(i) += ctr.strength * std::exp(-dx * dx / (2.0 * width * width));
    }
    m.parameters["center" + std::to_string(c)] = ctr.position;
    m.parameters["strength" + std::to_string(c)] = ctr.strength;
  }
  return m;
}

std::optional<std::pair<std::size_t, std::size_t>> potential_support(const LatticeModel& m) {
  std::optional<std::pair<std::size_t, std::size_t>> out;
  for (Eigen::Index i = 0; i < m.potential.size(); ++i) {
    if (m.potential(i) == Complex(0.0)) continue;
    const auto idx = static_cast<std::size_t>(i);
    if (!out) out.emplace(idx, idx);
    out->second = idx;
  }
  return out;
}

}  // namespace cryptoherm::models
