// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "cryptoherm/evolution.hpp"
#include "cryptoherm/metric.hpp"
#include "cryptoherm/models.hpp"
#include "cryptoherm/scattering.hpp"
#include "cryptoherm/sturm.hpp"
#include "oracles.hpp"

using namespace cryptoherm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  // records a failed condition without stopping the criterion
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<double> sorted_real(const ComplexVector& v) {
  std::vector<double> out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v(i).real();
  std::sort(out.begin(), out.end());
  return out;
}

// shared by criteria 1 and 2
std::vector<ComplexMatrix> random_instances() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> dim(2, 32);
  std::vector<ComplexMatrix> out;
  for (int i = 0; i < 100; ++i) out.push_back(oracle::random_real_spectrum(rng, dim(rng)));
  return out;
}

void criterion1(Outcome& o) {
  const auto t0 = Clock::now();
  double worst = 0.0, min_eig = INFINITY;
  for (const ComplexMatrix& h : random_instances()) {
    const metric::MetricOperator m = metric::build_metric(h);
    worst = std::max(worst, m.quasi_residual);
    min_eig = std::min(min_eig, m.min_eigenvalue);
  }
  const double dt = seconds_since(t0);
  o.detail << "max residual " << worst << ", min eigenvalue " << min_eig << ", " << dt << " s";
  o.expect(worst <= 1e-10, "residual");
  o.expect(min_eig > 0.0, "positivity");
  o.expect(dt < 30.0, "runtime");
}

void criterion2(Outcome& o) {
  double spec = 0.0, herm = 0.0;
  for (const ComplexMatrix& h : random_instances()) {
    const metric::MetricOperator m = metric::build_metric(h);
    const ComplexMatrix hh = metric::hermitize(h, metric::dyson_from_metric(m));
    herm = std::max(herm, linalg::hermiticity_defect(hh));
    const auto a = sorted_real(linalg::eig(h).values);
    const auto b = sorted_real(Eigen::SelfAdjointEigenSolver<ComplexMatrix>(0.5 * (hh + hh.adjoint())).eigenvalues().cast<Complex>());
    for (std::size_t i = 0; i < a.size(); ++i) spec = std::max(spec, std::abs(a[i] - b[i]));
  }
  o.detail << "spectral mismatch " << spec << ", hermiticity defect " << herm;
  o.expect(spec <= 1e-8, "isospectrality");
  o.expect(herm <= 1e-9, "hermiticity");
}

void criterion3(Outcome& o) {
  std::mt19937_64 rng(77);
  double worst = 0.0;
  for (int n = 2; n <= 6; ++n)
    for (int rep = 0; rep < 4; ++rep) {
      const ComplexMatrix h = oracle::random_real_spectrum(rng, n);
      const ComplexMatrix null = oracle::intertwiner_null_space(h);
      o.expect(null.cols() == n, "null space dimension");
      const linalg::Spectrum s = linalg::eig(h);
      ComplexMatrix family(n * n, n);
      for (int k = 0; k < n; ++k) family.col(k) = oracle::vec(s.left.col(k) * s.left.col(k).adjoint());
      worst = std::max({worst, oracle::span_defect(null, family), oracle::span_defect(family, null)});
    }
  o.detail << "max projection error " << worst;
  o.expect(worst <= 1e-8, "completeness");
}

void criterion4(Outcome& o) {
  const auto t0 = Clock::now();
  const evolution::DysonFamily rot = evolution::rotating_family();
  const ComplexVector psi = (ComplexVector(2) << 1.0, Complex(0.0, 0.5)).finished();
  const evolution::EvolutionResult r = evolution::evolve_doublet(rot, rot.metric(0.0) * psi, psi, {0.0, 10.0}, 1e-8);
  const double drift = r.overlap_drift();

  const evolution::DysonFamily stat = evolution::static_pt_family(0.5);
  double reduction = 0.0;
  for (double t : {0.0, 2.5, 5.0, 10.0}) reduction = std::max(reduction, (evolution::h_gen(stat, t) - stat.hamiltonian(t)).norm());

  const double lambda = 0.3;
  const ComplexVector e0 = (ComplexVector(2) << 1.0, 0.0).finished();
  const auto a = evolution::evolve_ket(stat, e0, {0.0, 10.0}, 1e-11);
  const auto b = evolution::evolve_ket(evolution::phase_family(lambda, 0.5), e0, {0.0, 10.0}, 1e-11);
  double phase = 0.0;
  for (std::size_t k = 0; k < a.times.size(); ++k)
    phase = std::max(phase, (b.kets[k] - std::exp(Complex(0.0, -lambda * a.times[k])) * a.kets[k]).norm());
  const double dt = seconds_since(t0);
  o.detail << "overlap drift " << drift << ", |H_gen - H| " << reduction << ", phase error " << phase << ", " << dt
           << " s";
  o.expect(drift <= 1e-6, "drift");
  o.expect(reduction == 0.0, "quasistationary reduction");
  o.expect(phase <= 1e-8, "phase");
  o.expect(dt < 5.0, "runtime");
}

void criterion5(Outcome& o) {
  const ComplexVector e0 = (ComplexVector(2) << 1.0, 0.0).finished();
  const evolution::PullbackReport rep = evolution::pullback_check(evolution::rotating_family(), e0, {0.0, 10.0}, 1e-6);
  o.detail << "max deviation " << rep.max_deviation;
  o.expect(rep.passed && rep.max_deviation <= 1e-6, "pullback");
}

std::vector<Complex> sturm_levels(const sturm::PathSpec& path, std::size_t n) {
  const sturm::SturmProblem p =
      sturm::rectify(path, sturm::parse_potential("harmonic"), sturm::SGrid{-8.0, 8.0, n}, "harmonic");
  const linalg::Spectrum s = sturm::solve_sturm(p, 5);
  return {s.values.data(), s.values.data() + s.values.size()};
}

void criterion6(Outcome& o) {
  const auto t0 = Clock::now();
  const sturm::SturmProblem id =
      sturm::rectify(sturm::identity_path(), sturm::parse_potential("harmonic"), sturm::SGrid{-8.0, 8.0, 2000});
  bool exact = !id.weight_non_hermitian();
  for (Eigen::Index i = 0; i < id.w.size(); ++i) exact = exact && id.w(i) == Complex(1.0) && id.delta(i) == Complex(0.0);
  o.expect(exact, "identity path W = I");

  // discretisation error of the plain problem at n = 2000, per level, by Richardson
  const auto plain = sturm_levels(sturm::identity_path(), 2000);
  const auto fine = sturm_levels(sturm::identity_path(), 4000);
  std::vector<double> budget(5);
  for (int k = 0; k < 5; ++k) budget[k] = 10.0 * std::abs(plain[k] - fine[k]) * 4.0 / 3.0;

  double worst_ratio = 0.0, min_order = INFINITY;
  for (const sturm::PathSpec& path : {sturm::scale_path(2.0), sturm::shift_bump_path(0.4)}) {
    const auto e = sturm_levels(path, 2000);
    for (int k = 0; k < 5; ++k) worst_ratio = std::max(worst_ratio, std::abs(e[k] - (2.0 * k + 1.0)) / budget[k] * 10.0);
    const auto half = sturm_levels(path, 1000);
    double e1 = 0.0, e2 = 0.0;
    for (int k = 0; k < 5; ++k) {
      e1 = std::max(e1, std::abs(half[k] - (2.0 * k + 1.0)));
      e2 = std::max(e2, std::abs(e[k] - (2.0 * k + 1.0)));
    }
    min_order = std::min(min_order, std::log2(e1 / e2));
  }
  const double dt = seconds_since(t0);
  o.detail << "worst error / O(h^2) error " << worst_ratio << " (limit 10), order " << min_order << ", " << dt << " s";
  o.expect(worst_ratio <= 10.0, "levels");
  o.expect(min_order >= 1.9, "order");
  o.expect(dt < 60.0, "runtime");
}

void criterion7(Outcome& o) {
  double inter = 0.0, pairing = 0.0;
  std::size_t unpaired = 0;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  const std::vector<std::function<double(double)>> ws = {[](double x) { return x; }, [](double) { return 0.0; },
                                                         [](double x) { return 0.05 * x * x * x; }};
  for (const auto& w : ws)
    for (std::size_t n : {50, 120, 200}) {
      ComplexVector phases(static_cast<Eigen::Index>(n));
      for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::polar(1.0, u(rng));
      for (bool twisted : {false, true}) {
        const models::SusyPair p = twisted ? models::susy_pair(w, models::Grid{-8.0, 8.0, n},
                                                               ComplexMatrix(phases.asDiagonal()))
                                           : models::susy_pair(w, models::Grid{-8.0, 8.0, n});
        inter = std::max(inter, p.intertwining_residual);
        if (twisted) continue;
        const models::PairingReport r = models::isospectrality_report(p, 1e-8);
        pairing = std::max(pairing, r.max_mismatch);
        unpaired += r.unpaired_levels();
      }
    }
  const models::SusyPair lin = models::susy_pair([](double x) { return x; }, models::Grid{-8.0, 8.0, 400});
  const std::size_t zero = models::isospectrality_report(lin, 1e-3).bulk_zero_modes();
  o.detail << "intertwining " << inter << ", pairing " << pairing << ", unpaired " << unpaired << ", zero modes "
           << zero;
  o.expect(inter <= 1e-12, "intertwining");
  o.expect(pairing <= 1e-8 && unpaired == 0, "pairing");
  o.expect(zero == 1, "zero mode");
}

int run_chq(const std::string& args) {
  const std::string cmd = std::string(CHQ_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("chq-acceptance-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void criterion8(Outcome& o) {
  const auto t0 = Clock::now();
  const auto lv = models::singular_oscillator_levels(-0.5, 10.0, 4000, 8);
  std::vector<double> gaps;
  for (std::size_t i = 1; i < lv.size(); ++i) gaps.push_back(lv[i] - lv[i - 1]);
  const double mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(gaps.size());
  double dev = 0.0;
  for (double g : gaps) dev = std::max(dev, std::abs(g - mean) / mean);

  const fs::path out = scratch("fig1");
  const int code = run_chq("run --strict --out-dir " + out.string() + " " + CONFIG_DIR + "/fig1-table.yaml");
  std::ifstream csv(out / "fig1-table.levels.csv");
  std::string line;
  while (std::getline(csv, line) && line.rfind("#", 0) == 0) {
  }
  const bool header = line == "gamma,level,energy";
  std::size_t rows = 0;
  bool well_formed = header;
  while (std::getline(csv, line)) {
    std::istringstream cells(line);
    std::string cell;
    int fields = 0;
    while (std::getline(cells, cell, ',')) {
      char* end = nullptr;
      std::strtod(cell.c_str(), &end);
      well_formed = well_formed && end && *end == '\0' && !cell.empty();
      ++fields;
    }
    well_formed = well_formed && fields == 3;
    ++rows;
  }
  const double dt = seconds_since(t0);
  o.detail << "spacing deviation " << dev * 100.0 << " %, mean spacing " << mean << ", CSV rows " << rows << ", "
           << dt << " s";
  o.expect(dev < 0.02, "equidistance");
  o.expect(code == 0, "fig1-table exit code");
  o.expect(well_formed && rows > 0, "CSV");
  o.expect(dt < 120.0, "runtime");
}

void criterion9(Outcome& o) {
  const auto t0 = Clock::now();
  models::LatticeModel free;
  free.label = "free";
  free.kinetic = models::chain_kinetic(16);
  free.potential = ComplexVector::Zero(16);
  double free_err = 0.0;
  for (int i = 1; i <= 50; ++i) {
    const auto s = scattering::scatter(free, 4.0 * i / 51.0);
    free_err = std::max({free_err, std::abs(s.r), std::abs(s.t - 1.0)});
  }

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.05, 3.95);
  double herm = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const ComplexMatrix x = oracle::random_complex(rng, 4 + trial % 20);
    herm = std::max(herm, scattering::scatter_dense(0.5 * (x + x.adjoint()), 1, u(rng)).unitarity_deficit);
  }

  const models::LatticeModel two =
      models::smeared_interaction(24, {{11.0, Complex(-1.5, 0.02)}, {12.0, Complex(-1.5, -0.02)}}, 1.0);
  const ComplexMatrix theta = metric::build_metric(two.hamiltonian()).theta;
  double weighted = 0.0;
  for (int i = 1; i <= 19; ++i)
    weighted = std::max(weighted, scattering::unitarity_deficit_weighted(two, theta, 0.2 * i));

  double mismatch = 0.0;
  std::size_t unmatched = 0, levels = 0;
  ComplexVector imp = ComplexVector::Zero(41);
  imp(20) = -1.5;
  models::LatticeModel single = free;
  single.kinetic = models::chain_kinetic(41);
  single.potential = imp;
  for (const models::LatticeModel& m : {two, single, two.with_mass_sign(-1)}) {
    const auto [lo, hi] = scattering::band(m.mass_sign);
    const scattering::EnergyWindow w = m.mass_sign > 0 ? scattering::EnergyWindow{{-3.0, -0.05}, {lo - 0.01, 0.05}}
                                                       : scattering::EnergyWindow{{hi + 0.01, -0.05}, {3.0, 0.05}};
    const scattering::PoleTable t = scattering::pole_scan(m, w, 61);
    mismatch = std::max(mismatch, t.max_mismatch);
    unmatched += t.unmatched.size();
    levels += t.bound_states.size();
  }
  const double dt = seconds_since(t0);
  o.detail << "free " << free_err << ", Hermitian deficit " << herm << ", weighted deficit " << weighted << ", "
           << levels << " sub-band levels, pole mismatch " << mismatch << ", " << dt << " s";
  o.expect(free_err <= 1e-12, "free chain");
  o.expect(herm <= 1e-10, "Hermitian deficits");
  o.expect(weighted <= 1e-8, "weighted deficit");
  o.expect(levels > 0 && unmatched == 0 && mismatch <= 1e-5, "poles");
  o.expect(dt < 60.0, "runtime");
}

std::string without_timestamps(const fs::path& p) {
  std::ifstream in(p);
  std::string out;
  for (std::string line; std::getline(in, line);)
    if (line.find("timestamp") == std::string::npos) out += line + "\n";
  return out;
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

void criterion10(Outcome& o) {
  std::string configs;
  for (const auto& e : fs::directory_iterator(CONFIG_DIR))
    if (e.path().extension() == ".yaml" && e.path().stem() != "fig1-table") configs += " " + e.path().string();

  const fs::path a = scratch("det-a"), b = scratch("det-b");
  const int ca = run_chq("run --strict -j 2 --out-dir " + a.string() + configs);
  const int cb = run_chq("run --strict --format json --out-dir " + b.string() + configs);
  const int cc = run_chq("run --strict --format json -j 3 --out-dir " + a.string() + configs);
  const int cd = run_chq("run --strict --out-dir " + b.string() + configs);
  std::size_t files = 0, differing = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    const fs::path other = b / e.path().filename();
    if (!fs::exists(other) || without_timestamps(e.path()) != without_timestamps(other)) ++differing;
  }
  o.expect(ca == 0 && cb == 0 && cc == 0 && cd == 0, "shipped configs pass under --strict");
  o.expect(files > 0 && differing == 0, "byte-identical outputs");

  const fs::path dir = scratch("codes");
  write_text(dir / "fails.yaml",
             "kind: scatter\nmodel:\n  label: smeared\n  params:\n    n: 20\n    width: 1.0\n    centers:\n"
             "      - {position: 9.0, strength_re: -1.0, strength_im: 0.4}\nsettings: {e_min: 0.5, e_max: 3.5, count: 7}\n");
  write_text(dir / "bad.yaml", "kind: metric\nmodel: {label: pt-chain, params: {n: 2, gamma: 0.5}}\ntypo: 1\n");
  write_text(dir / "numeric.yaml", "kind: metric\nmodel: {label: pt-chain, params: {n: 2, gamma: 1.5}}\n");
  const fs::path out = dir / "out";
  const int strict_fail = run_chq("run --strict --out-dir " + out.string() + " " + (dir / "fails.yaml").string());
  const int lax_fail = run_chq("run --out-dir " + out.string() + " " + (dir / "fails.yaml").string());
  const int config = run_chq("run --strict --out-dir " + out.string() + " " + (dir / "bad.yaml").string());
  const int numeric = run_chq("run --strict --out-dir " + out.string() + " " + (dir / "numeric.yaml").string());
  o.detail << files << " files compared, " << differing << " differ; exit codes strict-fail " << strict_fail
           << ", lax-fail " << lax_fail << ", config " << config << ", numeric " << numeric;
  o.expect(strict_fail == 1 && lax_fail == 0 && config == 2 && numeric == 3, "exit codes");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"metric certification", criterion1},
      {"hermitization isospectrality", criterion2},
      {"metric family completeness", criterion3},
      {"time-dependent doublet", criterion4},
      {"pullback consistency", criterion5},
      {"Sturm rectification", criterion6},
      {"SUSY pairs", criterion7},
      {"singular oscillator sweep", criterion8},
      {"scattering", criterion9},
      {"CLI determinism and exit codes", criterion10},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    std::cout << (o.passed ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": " << o.detail.str()
              << std::endl;
    failed += o.passed ? 0 : 1;
  }
  std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
