#include "doctest.h"

#include <cmath>

#include "cryptoherm/sturm.hpp"

using namespace cryptoherm;
using namespace cryptoherm::sturm;

namespace {

// −D² + x² on the plain grid with the same node count.
std::vector<double> direct_oscillator(double x_min, double x_max, std::size_t n, std::size_t k) {
  const double h = (x_max - x_min) / static_cast<double>(n + 1);
  linalg::Tridiagonal t;
  t.diag.resize(static_cast<Eigen::Index>(n));
  t.off = ComplexVector::Constant(static_cast<Eigen::Index>(n - 1), -1.0 / (h * h));
  for (std::size_t i = 0; i < n; ++i) {
    const double x = x_min + h * static_cast<double>(i + 1);
    t.diag(static_cast<Eigen::Index>(i)) = 2.0 / (h * h) + x * x;
  }
  const ComplexVector ev = linalg::tridiagonal_eigenvalues(t);
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = ev(static_cast<Eigen::Index>(i)).real();
  return out;
}

std::vector<Complex> levels(const PathSpec& path, std::size_t n, std::size_t k) {
  const SturmProblem p = rectify(path, parse_potential("harmonic"), SGrid{-8.0, 8.0, n}, "harmonic");
  const linalg::Spectrum s = solve_sturm(p, k);
  return {s.values.data(), s.values.data() + s.values.size()};
}

}  // namespace

TEST_CASE("identity path is the plain problem") {
  const SturmProblem p = rectify(identity_path(), parse_potential("harmonic"), SGrid{-8.0, 8.0, 2000});
  for (Eigen::Index i = 0; i < p.w.size(); ++i) {
    CHECK(p.w(i) == Complex(1.0, 0.0));
    CHECK(p.delta(i) == Complex(0.0, 0.0));
  }
  CHECK_FALSE(p.weight_non_hermitian());
  const auto e = levels(identity_path(), 2000, 5);
  for (int k = 0; k < 5; ++k) CHECK(std::abs(e[k] - (2.0 * k + 1.0)) < 1e-3);
}

TEST_CASE("q = 2s equals the direct problem on the stretched interval") {
  const std::size_t n = 1000;
  const auto e = levels(scale_path(2.0), n, 5);
  const auto ref = direct_oscillator(-16.0, 16.0, n, 5);
  for (int k = 0; k < 5; ++k) CHECK(std::abs(e[k] - ref[k]) < 1e-9 * ref[k]);
}

TEST_CASE("complex shift-bump path keeps the oscillator spectrum") {
  const SturmProblem p = rectify(shift_bump_path(0.4), parse_potential("harmonic"), SGrid{-8.0, 8.0, 2000});
  CHECK(p.weight_non_hermitian());
  const auto e = levels(shift_bump_path(0.4), 2000, 5);
  for (int k = 0; k < 5; ++k) {
    CHECK(std::abs(e[k].real() - (2.0 * k + 1.0)) < 1e-3);
    CHECK(std::abs(e[k].imag()) < 1e-3);
  }
}

TEST_CASE("second-order convergence") {
  // errors against the exact levels 2k+1
  auto err = [](const PathSpec& path, std::size_t n) {
    const auto e = levels(path, n, 5);
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) worst = std::max(worst, std::abs(e[k] - (2.0 * k + 1.0)));
    return worst;
  };
  for (const PathSpec& path : {scale_path(2.0), shift_bump_path(0.4)}) {
    const double e1 = err(path, 500), e2 = err(path, 1000);
    CHECK(std::log2(e1 / e2) >= 1.9);
  }
}

TEST_CASE("finite-difference derivatives match analytic ones") {
  PathSpec numeric = shift_bump_path(0.4);
  numeric.q1 = numeric.q2 = numeric.q3 = nullptr;
  const SGrid g{-8.0, 8.0, 400};
  const SturmProblem a = rectify(shift_bump_path(0.4), parse_potential("harmonic"), g);
  const SturmProblem b = rectify(numeric, parse_potential("harmonic"), g);
  CHECK((a.w - b.w).norm() < 1e-4 * a.w.norm());
  CHECK((a.delta - b.delta).norm() < 1e-4 * (1.0 + a.delta.norm()));
}

TEST_CASE("hermiticity check") {
  SUBCASE("identity path") {
    const SturmProblem p = rectify(identity_path(), parse_potential("harmonic"), SGrid{-8.0, 8.0, 100});
    const SturmHermiticityReport r = sturm_hermiticity_check(p, ComplexMatrix::Identity(100, 100));
    CHECK(r.h_residual == 0.0);
    CHECK(r.w_residual == 0.0);
  }
  SUBCASE("scaled path") {
    const SturmProblem p = rectify(scale_path(2.0), parse_potential("harmonic"), SGrid{-8.0, 8.0, 100});
    const SturmHermiticityReport r = sturm_hermiticity_check(p, ComplexMatrix::Identity(100, 100));
    CHECK(r.h_residual == 0.0);
    CHECK(r.w_residual == 0.0);
    REQUIRE(r.physical_weight_defect.has_value());
    CHECK(*r.physical_weight_defect < 1e-15);
  }
  SUBCASE("complex path with its own metric") {
    const SturmProblem p = rectify(shift_bump_path(0.4), parse_potential("harmonic"), SGrid{-8.0, 8.0, 300});
    // the full lattice spectrum has complex pairs, so only the low subspace carries Θ
    CHECK_THROWS_AS(sturm_metric(p), Error);
    const ComplexMatrix theta = sturm_subspace_metric(p, 10);
    const SturmHermiticityReport r = sturm_hermiticity_check(p, theta);
    CHECK(r.weight_non_hermitian);
    CHECK(r.reduced_residual <= 1e-8);
    CHECK_FALSE(r.physical_weight_defect.has_value());
  }
  SUBCASE("real scaled path, full metric") {
    const SturmProblem p = rectify(scale_path(2.0), parse_potential("harmonic"), SGrid{-8.0, 8.0, 200});
    const SturmHermiticityReport r = sturm_hermiticity_check(p, sturm_metric(p));
    CHECK(r.reduced_residual <= 1e-8);
    CHECK(r.h_residual <= 1e-8);
    CHECK(r.w_residual <= 1e-8);
  }
}

TEST_CASE("parsers") {
  CHECK(parse_path("identity").label == "identity");
  CHECK(std::abs(parse_path("scale:3").q(1.0) - 3.0) < 1e-15);
  CHECK(std::abs(parse_path("power:0.1").q(2.0) - 2.8) < 1e-14);
  CHECK(std::abs(parse_path("shift-bump:0.4").q(0.0) - Complex(0.0, -0.4)) < 1e-15);
  CHECK_THROWS_AS(parse_path("spiral"), Error);
  CHECK_THROWS_AS(parse_path("scale:abc"), Error);
  CHECK(std::abs(parse_potential("ix3")(Complex(2.0, 0.0)) - Complex(0.0, 8.0)) < 1e-15);
  CHECK(std::abs(parse_potential("quartic")(Complex(2.0, 0.0)) - 16.0) < 1e-15);
  CHECK_THROWS_AS(parse_potential("morse"), Error);
}

TEST_CASE("errors") {
  try {
    rectify(scale_path(0.0), parse_potential("harmonic"), SGrid{-8.0, 8.0, 100});
    FAIL("expected DegeneratePath");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegeneratePath);
  }
  try {
    rectify(shift_bump_path(0.4), parse_potential("harmonic"), SGrid{-8.0, 8.0, 12});
    FAIL("expected GridTooCoarse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridTooCoarse);
  }
  const SturmProblem p = rectify(identity_path(), parse_potential("harmonic"), SGrid{-8.0, 8.0, 40});
  CHECK_THROWS_AS(solve_sturm(p, 5), Error);
}
