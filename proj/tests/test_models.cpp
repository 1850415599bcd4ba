#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

#include "cryptoherm/models.hpp"
#include "oracles.hpp"

using namespace cryptoherm;
using namespace cryptoherm::models;

namespace {

double max_imag(const ComplexVector& v) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v(i).imag()));
  return m;
}

std::vector<double> sorted_real(const ComplexMatrix& h) {
  const linalg::Spectrum s = linalg::eig(h);
  std::vector<double> out(s.values.size());
  for (Eigen::Index i = 0; i < s.values.size(); ++i) out[i] = s.values(i).real();
  return out;
}

}  // namespace

TEST_CASE("SUSY pair for W(x) = x") {
  const Grid grid{-8.0, 8.0, 400};
  const SusyPair p = susy_pair([](double x) { return x; }, grid);
  CHECK(p.intertwining_residual <= 1e-12);

  const PairingReport r = isospectrality_report(p, 1e-3);
  CHECK(r.unpaired_levels() == 0);
  CHECK(r.bulk_zero_modes() == 1);
  CHECK(r.max_mismatch < 1e-8);

  // the sector carrying the bulk zero mode continues as 2, 4, 6, ... (ħω = 2)
  const std::vector<double> lo = sorted_real(p.h_minus);
  CHECK(std::abs(lo[0]) < 1e-3);
  CHECK(lo[1] == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(lo[2] == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("SUSY pairing to 1e-8 up to dim 200") {
  for (std::size_t n : {50, 120, 200}) {
    const SusyPair p = susy_pair([](double x) { return x; }, Grid{-8.0, 8.0, n});
    CHECK(p.intertwining_residual <= 1e-12);
    const PairingReport r = isospectrality_report(p, 1e-8);
    CHECK(r.unpaired_levels() == 0);
    CHECK(r.max_mismatch <= 1e-8);
  }
}

TEST_CASE("free SUSY pair") {
  const SusyPair p = susy_pair([](double) { return 0.0; }, Grid{-8.0, 8.0, 100});
  // one-sided differences: the matrices differ in one corner, the spectra do not
  CHECK((p.h_minus - p.h_plus).norm() < 2.0 / (p.spacing * p.spacing));
  const auto a = sorted_real(p.h_minus), b = sorted_real(p.h_plus);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-9 * (1.0 + a[i]));
  const PairingReport r = isospectrality_report(p, 1e-6);
  CHECK(r.unpaired_levels() == 0);
  CHECK(r.bulk_zero_modes() == 0);
}

TEST_CASE("diagonal phase T map leaves both spectra unchanged") {
  const Grid grid{-8.0, 8.0, 120};
  const auto w = [](double x) { return x; };
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  ComplexVector phases(120);
  for (Eigen::Index i = 0; i < 120; ++i) phases(i) = std::polar(1.0, u(rng));
  const SusyPair plain = susy_pair(w, grid);
  const SusyPair twisted = susy_pair(w, grid, ComplexMatrix(phases.asDiagonal()));
  CHECK(twisted.intertwining_residual <= 1e-12);
  const auto a = sorted_real(plain.h_plus), b = sorted_real(twisted.h_plus);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-8 * (1.0 + std::abs(a[i])));
  const auto c = sorted_real(plain.h_minus), d = sorted_real(twisted.h_minus);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(std::abs(c[i] - d[i]) <= 1e-8 * (1.0 + std::abs(c[i])));
}

TEST_CASE("non-SUSY random pair does not pair") {
  std::mt19937_64 rng(5);
  const auto x = oracle::random_complex(rng, 20), y = oracle::random_complex(rng, 20);
  const PairingReport r = isospectrality_report(ComplexMatrix(x + x.adjoint()), ComplexMatrix(y + y.adjoint()), 1e-3);
  CHECK(r.unpaired_levels() > 30);
}

TEST_CASE("SUSY errors") {
  const Grid grid{-1.0, 1.0, 4};
  CHECK_THROWS_AS(susy_pair([](double x) { return x; }, grid, ComplexMatrix(ComplexMatrix::Zero(4, 4))), Error);
  try {
    susy_pair([](double x) { return x; }, grid, ComplexMatrix(ComplexMatrix::Zero(4, 4)));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularTMap);
  }
}

TEST_CASE("singular oscillator") {
  SUBCASE("gamma -1/2 is equidistant") {
    const auto lv = singular_oscillator_levels(-0.5, 10.0, 4000, 8);
    std::vector<double> gaps;
    for (std::size_t i = 1; i < lv.size(); ++i) gaps.push_back(lv[i] - lv[i - 1]);
    const double mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / gaps.size();
    for (double g : gaps) CHECK(std::abs(g - mean) < 0.02 * mean);
    // spacing of x² on the half line is 4
    CHECK(mean == doctest::Approx(4.0).epsilon(0.01));
  }
  SUBCASE("gamma 0 gives the odd oscillator levels") {
    const auto lv = singular_oscillator_levels(0.0, 10.0, 4000, 4);
    const double ref[] = {3, 7, 11, 15};
    for (int i = 0; i < 4; ++i) CHECK(lv[i] == doctest::Approx(ref[i]).epsilon(0.01));
  }
  SUBCASE("gamma 2 follows 4n + 2 gamma + 3") {
    const auto lv = singular_oscillator_levels(2.0, 10.0, 4000, 4);
    for (int i = 0; i < 4; ++i) CHECK(lv[i] == doctest::Approx(4.0 * i + 7.0).epsilon(0.02));
  }
  SUBCASE("gamma -0.9 selects the x^{-gamma} branch") {
    const auto lv = singular_oscillator_levels(-0.9, 10.0, 4000, 3);
    for (int i = 0; i < 3; ++i) CHECK(lv[i] == doctest::Approx(4.0 * i + 2.8).epsilon(0.01));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(singular_oscillator(-1.0, 10.0, 4000), Error);
    try {
      singular_oscillator(0.0, 100.0, 1000);
      FAIL("expected GridTooCoarse");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::GridTooCoarse);
      CHECK(std::string(e.what()).find("n >= 2000") != std::string::npos);
    }
  }
}

TEST_CASE("PT chain") {
  SUBCASE("two sites") {
    for (double g : {0.0, 0.3, 0.9, 0.999}) {
      const linalg::Spectrum s = linalg::eig(pt_chain(2, g, 1.0).hamiltonian());
      CHECK(s.reality_flag);
      CHECK(std::abs(s.values(1).real() - std::sqrt(1.0 - g * g)) < 1e-12);
    }
    for (double g : {1.001, 1.5}) {
      const linalg::Spectrum s = linalg::eig(pt_chain(2, g, 1.0).hamiltonian());
      CHECK_FALSE(s.reality_flag);
      CHECK(s.max_imaginary() == doctest::Approx(std::sqrt(g * g - 1.0)).epsilon(1e-10));
    }
  }
  SUBCASE("Hermitian limit") {
    const std::size_t n = 9;
    const auto ev = sorted_real(pt_chain(n, 0.0, 1.0).hamiltonian());
    for (std::size_t k = 1; k <= n; ++k)
      CHECK(ev[n - k] == doctest::Approx(2.0 * std::cos(k * M_PI / (n + 1))).epsilon(1e-12));
  }
  SUBCASE("six sites, exceptional point") {
    // regression fixture: the reality flag of the dense solver flips at 1
    const double gamma_star = 1.0;
    for (double g = 0.05; g < 0.99; g += 0.05) CHECK(linalg::eig(pt_chain(6, g, 1.0).hamiltonian()).reality_flag);
    for (double g = 1.01; g < 1.5; g += 0.05) CHECK_FALSE(linalg::eig(pt_chain(6, g, 1.0).hamiltonian()).reality_flag);
    double lo = 0.5, hi = 1.5;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      (max_imag(linalg::tridiagonal_eigenvalues(pt_chain(6, mid, 1.0).tridiagonal())) < 1e-6 ? lo : hi) = mid;
    }
    CHECK(lo == doctest::Approx(gamma_star).epsilon(1e-6));
  }
}

TEST_CASE("smeared interactions") {
  SUBCASE("zero strength is the free chain") {
    const LatticeModel m = smeared_interaction(30, {{15.0, 0.0}}, 3.0);
    CHECK((m.hamiltonian() - chain_kinetic(30).dense()).norm() == 0.0);
    CHECK_FALSE(potential_support(m).has_value());
  }
  SUBCASE("one attractive center binds one state") {
    const LatticeModel m = smeared_interaction(41, {{20.0, -0.5}}, 1.0);
    const auto ev = sorted_real(m.hamiltonian());
    CHECK(ev[0] < 0.0);
    CHECK(ev[1] > 0.0);
    CHECK(linalg::tridiagonal_eigenvalues(m.tridiagonal())(0).real() == doctest::Approx(ev[0]).epsilon(1e-12));
    const auto support = potential_support(m);
    REQUIRE(support.has_value());
    CHECK(support->first == 16);
    CHECK(support->second == 24);
  }
  SUBCASE("mirror centers with conjugate strengths") {
    const LatticeModel m =
        smeared_interaction(24, {{11.0, Complex(0.0, 0.01)}, {12.0, Complex(0.0, -0.01)}}, 1.0);
    CHECK(linalg::eig(m.hamiltonian()).reality_flag);
  }
  SUBCASE("mass sign flips only the kinetic block") {
    const LatticeModel m = smeared_interaction(20, {{9.0, Complex(-1.0, 0.2)}}, 1.5);
    const ComplexMatrix sum = m.hamiltonian() + m.with_mass_sign(-1).hamiltonian();
    CHECK((sum - ComplexMatrix(2.0 * m.potential.asDiagonal())).norm() < 1e-14);
  }
  SUBCASE("centers must fit") {
    try {
      smeared_interaction(20, {{3.0, -1.0}}, 1.0);
      FAIL("expected CenterOutOfRange");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::CenterOutOfRange);
    }
    CHECK_THROWS_AS(smeared_interaction(20, {{10.0, -1.0}}, 0.5), Error);
  }
}
