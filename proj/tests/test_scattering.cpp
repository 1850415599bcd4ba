#include "doctest.h"

#include <cmath>
#include <random>

#include "cryptoherm/metric.hpp"
#include "cryptoherm/scattering.hpp"
#include "oracles.hpp"

using namespace cryptoherm;
using namespace cryptoherm::scattering;
using models::LatticeModel;

namespace {

const Complex I1(0.0, 1.0);

LatticeModel chain_with(const ComplexVector& v) {
  LatticeModel m;
  m.label = "test";
  m.kinetic = models::chain_kinetic(static_cast<std::size_t>(v.size()));
  m.potential = v;
  return m;
}

LatticeModel impurity(std::size_t n, std::size_t site, Complex v) {
  ComplexVector pot = ComplexVector::Zero(static_cast<Eigen::Index>(n));
  pot(static_cast<Eigen::Index>(site)) = v;
  return chain_with(pot);
}

// Backward transfer-matrix recursion for −ψ_{j+1} − ψ_{j−1} + (2 + V_j)ψ_j = Eψ_j
// with ψ_j = e^{ikj} to the right, decomposed into e^{±ikj} on the left.
std::pair<Complex, Complex> transfer_oracle(const ComplexVector& v, double e) {
  const double k = std::acos(1.0 - e / 2.0);
  const auto n = v.size();
  Complex next = std::exp(I1 * (k * static_cast<double>(n)));
  Complex here = std::exp(I1 * (k * static_cast<double>(n - 1)));
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    const Complex prev = (2.0 + v(j) - e) * here - next;
    next = here;
    here = prev;
  }
  // here = ψ_{−1}, next = ψ_0
  const Complex p = std::exp(I1 * k), q = std::exp(-I1 * k);
  const Complex a = (next * p - here) / (p - q);
  const Complex b = next - a;
  return {b / a, 1.0 / a};
}

}  // namespace

TEST_CASE("free chain is reflectionless") {
  const LatticeModel m = chain_with(ComplexVector::Zero(12));
  for (int i = 1; i <= 20; ++i) {
    const double e = 4.0 * i / 21.0;
    const ScatteringResult s = scatter(m, e);
    CHECK(std::abs(s.r) < 1e-12);
    CHECK(std::abs(s.t - 1.0) < 1e-12);
    CHECK(s.unitarity_deficit < 1e-12);
  }
}

TEST_CASE("single impurity closed form") {
  const std::size_t j0 = 7;
  for (double v : {-1.5, 0.4, 2.0}) {
    const LatticeModel m = impurity(15, j0, v);
    for (double e : {0.3, 1.1, 2.0, 3.6}) {
      const double k = wavenumber(e, 1);
      const Complex d = 2.0 * I1 * std::sin(k) - v;
      const Complex t = 2.0 * I1 * std::sin(k) / d;
      const Complex r = v * std::exp(2.0 * I1 * (k * static_cast<double>(j0))) / d;
      const ScatteringResult s = scatter(m, e);
      CHECK(std::abs(s.t - t) < 1e-10);
      CHECK(std::abs(s.r - r) < 1e-10);
      CHECK(s.unitarity_deficit < 1e-12);
    }
  }
}

TEST_CASE("extended potentials agree with the transfer-matrix oracle") {
  const LatticeModel m = models::smeared_interaction(30, {{12.0, Complex(-1.2, 0.3)}, {17.0, 0.8}}, 1.5);
  for (double e : {0.25, 1.5, 2.9, 3.7}) {
    const auto [r, t] = transfer_oracle(m.potential, e);
    const ScatteringResult s = scatter(m, e);
    CHECK(std::abs(s.r - r) < 1e-10);
    CHECK(std::abs(s.t - t) < 1e-10);
    const ScatteringResult d = scatter_dense(m.hamiltonian(), 1, e);
    CHECK(std::abs(d.r - r) < 1e-10);
    CHECK(std::abs(d.t - t) < 1e-10);
  }
}

TEST_CASE("complex impurity is not unitary in the plain reading") {
  const LatticeModel m = impurity(11, 5, Complex(0.0, 0.7));
  CHECK(scatter(m, 1.3).unitarity_deficit > 1e-3);
}

TEST_CASE("random Hermitian blocks conserve flux") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.05, 3.95);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4 + trial % 9;
    const ComplexMatrix x = oracle::random_complex(rng, n);
    const ComplexMatrix h = 0.5 * (x + x.adjoint());
    CHECK(scatter_dense(h, 1, u(rng)).unitarity_deficit <= 1e-10);
    CHECK(scatter_dense(h, -1, -u(rng)).unitarity_deficit <= 1e-10);
  }
}

TEST_CASE("negative bare mass") {
  // H(−1, V) = −H(+1, −V): amplitudes at −E equal those of the flipped potential at E
  const LatticeModel m = models::smeared_interaction(20, {{9.0, Complex(-0.9, 0.1)}}, 1.0);
  LatticeModel flipped = m;
  flipped.potential = -m.potential;
  CHECK(band(-1).first == -4.0);
  for (double e : {0.4, 1.9, 3.3}) {
    const ScatteringResult a = scatter(m.with_mass_sign(-1), -e);
    const ScatteringResult b = scatter(flipped, e);
    CHECK(std::abs(a.r - b.r) < 1e-12);
    CHECK(std::abs(a.t - b.t) < 1e-12);
  }
}

TEST_CASE("errors") {
  const LatticeModel m = impurity(9, 4, -1.0);
  for (double e : {0.0, 4.0, -0.5, 4.5}) {
    try {
      scatter(m, e);
      FAIL("expected BandEdge");
    } catch (const Error& err) {
      CHECK(err.code() == ErrorCode::BandEdge);
    }
  }
  try {
    scatter(impurity(9, 0, -1.0), 1.0);
    FAIL("expected SupportTouchesLead");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::SupportTouchesLead);
  }
}

TEST_CASE("metric-weighted deficit") {
  SUBCASE("Hermitian model, identity metric") {
    const LatticeModel m = impurity(11, 5, -0.8);
    for (double e : {0.5, 2.5})
      CHECK(std::abs(unitarity_deficit_weighted(m, ComplexMatrix::Identity(11, 11), e) -
                     scatter(m, e).unitarity_deficit) < 1e-12);
  }
  SUBCASE("two-center PT model in its real phase") {
    const LatticeModel m = models::smeared_interaction(
        24, {{11.0, Complex(-1.5, 0.02)}, {12.0, Complex(-1.5, -0.02)}}, 1.0);
    const metric::MetricOperator theta = metric::build_metric(m.hamiltonian());
    for (int i = 1; i <= 9; ++i) CHECK(unitarity_deficit_weighted(m, theta.theta, 0.4 * i) <= 1e-8);
    CHECK(scatter(m, 1.0).unitarity_deficit > 1e-6);
  }
  SUBCASE("past the exceptional point the metric does not exist") {
    const LatticeModel m = models::smeared_interaction(
        24, {{11.0, Complex(-1.5, 0.5)}, {12.0, Complex(-1.5, -0.5)}}, 1.0);
    try {
      metric::build_metric(m.hamiltonian());
      FAIL("expected ComplexSpectrum");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ComplexSpectrum);
    }
  }
}

TEST_CASE("asymptotic locality") {
  const LocalityReport id = asymptotic_locality_check(ComplexMatrix::Identity(10, 10), 3);
  CHECK(id.passed);
  CHECK(id.measure == 0.0);

  std::mt19937_64 rng(8);
  const ComplexMatrix x = oracle::random_complex(rng, 10);
  const LocalityReport dense = asymptotic_locality_check(x * x.adjoint() + ComplexMatrix::Identity(10, 10), 3);
  CHECK_FALSE(dense.passed);

}

TEST_CASE("transmission poles") {
  SUBCASE("1/T on the real axis") {
    const LatticeModel m = models::smeared_interaction(30, {{12.0, Complex(-1.2, 0.3)}, {17.0, 0.8}}, 1.5);
    for (double e : {0.25, 1.5, 3.7}) CHECK(std::abs(inverse_transmission(m, e) * scatter(m, e).t - 1.0) < 1e-10);
    CHECK(std::abs(inverse_transmission(chain_with(ComplexVector::Zero(8)), -1.0)) > 0.5);
  }
  SUBCASE("single attractive impurity") {
    const double v = -1.5;
    const LatticeModel m = impurity(41, 20, v);
    const PoleTable t = pole_scan(m, {Complex(-3.0, -0.05), Complex(-0.01, 0.05)});
    REQUIRE(t.poles.size() == 1);
    REQUIRE(t.bound_states.size() == 1);
    CHECK(t.max_mismatch < 1e-6);
    CHECK(std::abs(t.poles[0] - (2.0 - std::sqrt(4.0 + v * v))) < 1e-6);
  }
  SUBCASE("no potential, no poles") {
    const PoleTable t = pole_scan(chain_with(ComplexVector::Zero(20)), {Complex(-3.0, -0.05), Complex(-0.01, 0.05)});
    CHECK(t.no_poles_found);
    CHECK(t.bound_states.empty());
  }
  SUBCASE("window touching the band") {
    CHECK_THROWS_AS(pole_scan(impurity(20, 10, -1.0), {Complex(-1.0, 0.0), Complex(0.5, 0.0)}), Error);
  }
  SUBCASE("two-center PT model: every sub-band level has a pole") {
    const LatticeModel m = models::smeared_interaction(
        24, {{11.0, Complex(-1.5, 0.02)}, {12.0, Complex(-1.5, -0.02)}}, 1.0);
    const PoleTable t = pole_scan(m, {Complex(-3.0, -0.05), Complex(-0.01, 0.05)}, 61);
    CHECK(t.bound_states.size() == 2);
    CHECK(t.unmatched.empty());
    CHECK(t.max_mismatch <= 1e-5);
  }
}
