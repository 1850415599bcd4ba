#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <numeric>
#include <random>
#include <sstream>

#include "cryptoherm/evolution.hpp"
#include "cryptoherm/experiment.hpp"
#include "cryptoherm/metric.hpp"
#include "cryptoherm/models.hpp"
#include "cryptoherm/scattering.hpp"
#include "cryptoherm/sturm.hpp"

namespace cryptoherm::experiment {

namespace {

Certificate check(std::string name, double value, std::string relation, double tol) {
  bool ok = false;
  if (relation == "<=") ok = value <= tol;
  else if (relation == ">=") ok = value >= tol;
  else if (relation == ">") ok = value > tol;
  else if (relation == "==") ok = value == tol;
  return {std::move(name), value, std::move(relation), tol, ok};
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::size_t as_size(double v) { return static_cast<std::size_t>(std::llround(v)); }
int as_sign(double v) { return v < 0 ? -1 : 1; }

models::Superpotential superpotential(const std::string& label) {
  const std::string w = label.substr(label.find(':') + 1);
  if (w == "linear") return [](double x) { return x; };
  if (w == "zero") return [](double) { return 0.0; };
  if (w == "cubic") return [](double x) { return x * x * x; };
  fail(ErrorCode::ConfigError, "unknown superpotential '" + w + "'");
}

models::SusyPair build_susy(const ExperimentConfig& c) {
  const auto& p = c.model_params;
  const models::Grid grid{p.at("x_min"), p.at("x_max"), as_size(p.at("n"))};
  std::optional<ComplexMatrix> t_map;
  if (p.at("random_phases") != 0.0) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(c.seed));
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    ComplexVector d(static_cast<Eigen::Index>(grid.n));
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::polar(1.0, phase(rng));
    t_map = d.asDiagonal().toDenseMatrix();
  }
  return models::susy_pair(superpotential(c.model_label), grid, t_map);
}

models::LatticeModel build_lattice(const ExperimentConfig& c) {
  const auto& p = c.model_params;
  const std::string& l = c.model_label;
  if (l == "pt-chain") return models::pt_chain(as_size(p.at("n")), p.at("gamma"), p.at("g"), as_sign(p.at("mass_sign")));
  if (l == "smeared") {
    std::vector<models::Center> centers;
    for (const auto& [pos, s] : c.centers) centers.push_back({pos, s});
    return models::smeared_interaction(as_size(p.at("n")), centers, p.at("width"), as_sign(p.at("mass_sign")));
  }
  if (l == "singular-osc") return models::singular_oscillator(p.at("gamma"), p.at("length"), as_size(p.at("n")));
  fail(ErrorCode::ConfigError, "model '" + l + "' is not a banded lattice model");
}

ComplexMatrix dense_hamiltonian(const ExperimentConfig& c) {
  if (c.model_label.rfind("susy:", 0) == 0) return build_susy(c).h_minus;
  return build_lattice(c).hamiltonian();
}

evolution::DysonFamily build_family(const ExperimentConfig& c, evolution::Window w) {
  const auto& p = c.model_params;
  const std::string& l = c.model_label;
  if (l == "family:rotating") return evolution::rotating_family(p.at("omega_rate"), p.at("stretch"), p.at("drive"), w);
  if (l == "family:interpolating") return evolution::interpolating_family(w);
  if (l == "family:static-pt") return evolution::static_pt_family(p.at("gamma"), w);
  if (l == "family:phase") return evolution::phase_family(p.at("lambda"), p.at("gamma"), w);
  fail(ErrorCode::ConfigError, "model '" + l + "' is not a Dyson family");
}

Table spectrum_table(const ComplexVector& values) {
  Table t{"spectrum", {"index", "re", "im"}, {}};
  for (Eigen::Index i = 0; i < values.size(); ++i)
    t.rows.push_back({static_cast<double>(i), values(i).real(), values(i).imag()});
  return t;
}

void run_metric(const ExperimentConfig& c, ResultRecord& r) {
  const ComplexMatrix h = dense_hamiltonian(c);
  require(h.rows() <= 400, "metric experiments are limited to 400 sites");
  const double tol = c.settings.at("tol");
  metric::MetricOperator m;
  if (c.settings.count("band")) {
    const auto b = metric::band_metric(h, as_size(c.settings.at("band")), tol);
    m = b.metric;
    r.tables.push_back({"band", {"theta_range", "out_of_band", "infeasible", "sweeps"},
                        {{static_cast<double>(b.theta_range), b.out_of_band, b.infeasible ? 1.0 : 0.0,
                          static_cast<double>(b.sweeps)}}});
  } else if (!c.kappa.empty()) {
    if (static_cast<Eigen::Index>(c.kappa.size()) != h.rows())
      fail(ErrorCode::ConfigError, "settings.kappa must list one weight per level");
    m = metric::build_metric(h, c.kappa, tol);
  } else {
    m = metric::build_metric(h, tol);
  }
  const metric::DysonMap d = metric::dyson_from_metric(m);
  const ComplexMatrix herm = metric::hermitize(h, d, std::max(tol, 1e-10));

  const linalg::Spectrum sh = linalg::eig(h);
  const linalg::Spectrum sp = linalg::eig(herm);
  double iso = 0.0;
  for (Eigen::Index i = 0; i < sh.values.size(); ++i) iso = std::max(iso, std::abs(sh.values(i) - sp.values(i)));

  r.tables.push_back(spectrum_table(sh.values));
  Table theta{"theta", {"row", "col", "re", "im"}, {}};
  for (Eigen::Index i = 0; i < m.theta.rows(); ++i)
    for (Eigen::Index j = 0; j < m.theta.cols(); ++j)
      theta.rows.push_back({static_cast<double>(i), static_cast<double>(j), m.theta(i, j).real(), m.theta(i, j).imag()});
  r.tables.push_back(std::move(theta));

  r.certificates.push_back(check("quasi_residual", m.quasi_residual, "<=", tol));
  r.certificates.push_back(check("theta_min_eigenvalue", m.min_eigenvalue, ">", 0.0));
  r.certificates.push_back(check("hermitized_defect", linalg::hermiticity_defect(herm), "<=", 1e-9));
  r.certificates.push_back(check("isospectrality", iso, "<=", 1e-8 * std::max(1.0, linalg::fro_norm(h))));
}

void run_evolve(const ExperimentConfig& c, ResultRecord& r) {
  const evolution::Window w{c.settings.at("t0"), c.settings.at("t1")};
  const evolution::DysonFamily f = build_family(c, w);
  evolution::IntegratorOptions opt;
  opt.report_intervals = as_size(c.settings.at("reports"));
  const double tol = c.settings.at("tol");

  ComplexVector psi0 = ComplexVector::Zero(static_cast<Eigen::Index>(f.dim()));
  psi0(0) = 1.0;
  const ComplexVector bb0 = f.metric(w.t0) * psi0;
  const evolution::EvolutionResult e = evolution::evolve_doublet(f, bb0, psi0, w, tol, opt);
  const evolution::PullbackReport pb = evolution::pullback_check(f, psi0, w, c.settings.at("pullback_tol"), opt);

  Table overlap{"overlap", {"t", "re", "im", "pullback_deviation"}, {}};
  Table kets{"kets", {"t", "component", "ket_re", "ket_im", "brabra_re", "brabra_im"}, {}};
  for (std::size_t k = 0; k < e.times.size(); ++k) {
    overlap.rows.push_back({e.times[k], e.overlap_log[k].real(), e.overlap_log[k].imag(), pb.deviation[k]});
    for (Eigen::Index i = 0; i < e.kets[k].size(); ++i)
      kets.rows.push_back({e.times[k], static_cast<double>(i), e.kets[k](i).real(), e.kets[k](i).imag(),
                           e.brabras[k](i).real(), e.brabras[k](i).imag()});
  }
  r.tables.push_back(std::move(overlap));
  r.tables.push_back(std::move(kets));
  r.tables.push_back({"integrator",
                      {"substeps", "rhs_evaluations", "refinements", "max_error_estimate"},
                      {{static_cast<double>(e.step_stats.substeps), static_cast<double>(e.step_stats.rhs_evaluations),
                        static_cast<double>(e.step_stats.refinements), e.step_stats.max_error_estimate}}});

  const double drift_tol = c.settings.at("drift_tol");
  r.certificates.push_back(check("overlap_drift", e.overlap_drift(), "<=", drift_tol));
  r.certificates.push_back(check("brabra_compatibility", evolution::brabra_compatibility(f, e), "<=", drift_tol));
  r.certificates.push_back(check("pullback_deviation", pb.max_deviation, "<=", pb.tolerance));
}

void run_sturm(const ExperimentConfig& c, ResultRecord& r) {
  const sturm::SGrid grid{c.settings.at("s_min"), c.settings.at("s_max"), as_size(c.settings.at("n"))};
  const std::string& pot = c.text_settings.at("potential");
  const sturm::SturmProblem p =
      sturm::rectify(sturm::parse_path(c.text_settings.at("path")), sturm::parse_potential(pot), grid, pot);
  const double tol = c.settings.at("tol");
  const linalg::Spectrum s = sturm::solve_sturm(p, as_size(c.settings.at("levels")), tol);

  Table levels{"levels", {"index", "re", "im"}, {}};
  double oracle = 0.0;
  for (Eigen::Index i = 0; i < s.values.size(); ++i) {
    levels.rows.push_back({static_cast<double>(i), s.values(i).real(), s.values(i).imag()});
    oracle = std::max(oracle, std::abs(s.values(i) - Complex(2.0 * static_cast<double>(i) + 1.0)));
  }
  r.tables.push_back(std::move(levels));
  r.tables.push_back({"weight",
                      {"non_hermitian", "condition"},
                      {{p.weight_non_hermitian() ? 1.0 : 0.0, s.weight_condition}}});
  r.certificates.push_back(check("geig_residual", s.max_residual, "<=", tol));
  if (c.settings.count("oracle_tol")) {
    if (pot != "harmonic") fail(ErrorCode::ConfigError, "settings.oracle_tol applies to the harmonic potential only");
    r.certificates.push_back(check("oscillator_oracle", oracle, "<=", c.settings.at("oracle_tol")));
  }
}

void run_susy(const ExperimentConfig& c, ResultRecord& r) {
  const models::SusyPair pair = build_susy(c);
  const double tol = c.settings.at("tol");
  const models::PairingReport rep = models::isospectrality_report(pair, tol);

  Table pairs{"pairs", {"index", "minus_re", "minus_im", "plus_re", "plus_im", "mismatch"}, {}};
  for (std::size_t i = 0; i < rep.pairs.size(); ++i) {
    const auto& lp = rep.pairs[i];
    pairs.rows.push_back({static_cast<double>(i), lp.minus.real(), lp.minus.imag(), lp.plus.real(), lp.plus.imag(),
                          lp.mismatch});
  }
  Table zeros{"zero_modes", {"sector", "re", "im", "edge_localized"}, {}};
  for (const auto& z : rep.zero_modes_minus)
    zeros.rows.push_back({-1.0, z.value.real(), z.value.imag(), z.edge_localized ? 1.0 : 0.0});
  for (const auto& z : rep.zero_modes_plus)
    zeros.rows.push_back({1.0, z.value.real(), z.value.imag(), z.edge_localized ? 1.0 : 0.0});
  r.tables.push_back(std::move(pairs));
  r.tables.push_back(std::move(zeros));

  r.certificates.push_back(check("intertwining_residual", pair.intertwining_residual, "<=",
                                 c.settings.at("intertwining_tol")));
  r.certificates.push_back(check("pairing_mismatch", rep.max_mismatch, "<=", tol));
  r.certificates.push_back(check("unpaired_levels", static_cast<double>(rep.unpaired_levels()), "==", 0.0));
  if (c.settings.count("expected_zero_modes"))
    r.certificates.push_back(check("bulk_zero_modes", static_cast<double>(rep.bulk_zero_modes()), "==",
                                   c.settings.at("expected_zero_modes")));
}

void run_scatter(const ExperimentConfig& c, ResultRecord& r) {
  const models::LatticeModel m = build_lattice(c);
  const std::size_t count = as_size(c.settings.at("count"));
  const double lo = c.settings.at("e_min");
  const double hi = c.settings.at("e_max");
  const bool weighted = c.settings.at("weighted") != 0.0;
  ComplexMatrix theta;
  if (weighted) theta = metric::build_metric(m.hamiltonian()).theta;

  Table t{"amplitudes", {"energy", "k", "r_re", "r_im", "t_re", "t_im", "deficit"}, {}};
  if (weighted) t.columns.push_back("weighted_deficit");
  double worst = 0.0;
  double worst_weighted = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double e = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    const scattering::ScatteringResult s = scattering::scatter(m, e);
    std::vector<double> row{e, s.wavenumber, s.r.real(), s.r.imag(), s.t.real(), s.t.imag(), s.unitarity_deficit};
    worst = std::max(worst, s.unitarity_deficit);
    if (weighted) {
      const double wd = scattering::unitarity_deficit_weighted(m, theta, e);
      worst_weighted = std::max(worst_weighted, wd);
      row.push_back(wd);
    }
    t.rows.push_back(std::move(row));
  }
  r.tables.push_back(std::move(t));
  if (weighted)
    r.certificates.push_back(check("weighted_deficit", worst_weighted, "<=", c.settings.at("weighted_tol")));
  else
    r.certificates.push_back(check("unitarity_deficit", worst, "<=", c.settings.at("deficit_tol")));
}

void run_pole_scan(const ExperimentConfig& c, ResultRecord& r) {
  const models::LatticeModel m = build_lattice(c);
  const scattering::EnergyWindow w{{c.settings.at("re_min"), c.settings.at("im_min")},
                                   {c.settings.at("re_max"), c.settings.at("im_max")}};
  const scattering::PoleTable pt = scattering::pole_scan(m, w, as_size(c.settings.at("density")));
  Table poles{"poles", {"re", "im"}, {}};
  for (const Complex& p : pt.poles) poles.rows.push_back({p.real(), p.imag()});
  Table matches{"matches", {"bound_state", "pole_re", "pole_im", "mismatch"}, {}};
  for (const auto& mt : pt.matches) matches.rows.push_back({mt.bound_state, mt.pole.real(), mt.pole.imag(), mt.mismatch});
  r.tables.push_back(std::move(poles));
  r.tables.push_back(std::move(matches));
  r.certificates.push_back(check("pole_mismatch", pt.max_mismatch, "<=", c.settings.at("match_tol")));
  r.certificates.push_back(check("unmatched_bound_states", static_cast<double>(pt.unmatched.size()), "==", 0.0));
}

void run_fig1(const ExperimentConfig& c, ResultRecord& r) {
  const double from = c.settings.at("gamma_from");
  const double to = c.settings.at("gamma_to");
  const double step = c.settings.at("gamma_step");
  const std::size_t n = as_size(c.settings.at("n"));
  const double length = c.settings.at("length");
  const std::size_t levels = as_size(c.settings.at("levels"));

  Table t{"levels", {"gamma", "level", "energy"}, {}};
  std::optional<double> spacing_dev;
  const auto steps = static_cast<long>(std::floor((to - from) / step + 1e-9));
  for (long i = 0; i <= steps; ++i) {
    const double gamma = from + step * static_cast<double>(i);
    const std::vector<double> e = models::singular_oscillator_levels(gamma, length, n, levels);
    for (std::size_t k = 0; k < e.size(); ++k) t.rows.push_back({gamma, static_cast<double>(k), e[k]});
    if (std::abs(gamma + 0.5) < 1e-9 && e.size() >= 3) {
      std::vector<double> gaps;
      for (std::size_t k = 1; k < e.size(); ++k) gaps.push_back(e[k] - e[k - 1]);
      const double mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(gaps.size());
      double dev = 0.0;
      for (double g : gaps) dev = std::max(dev, std::abs(g - mean) / mean);
      spacing_dev = dev;
    }
  }
  r.tables.push_back(std::move(t));
  if (spacing_dev)
    r.certificates.push_back(check("equidistance_at_gamma_-0.5", *spacing_dev, "<=", c.settings.at("spacing_tol")));
}

}  // namespace

bool ResultRecord::all_passed() const {
  return std::all_of(certificates.begin(), certificates.end(), [](const Certificate& c) { return c.passed; });
}

const char* tool_version() { return "cryptoherm 0.3.0"; }

ResultRecord run_experiment(const ExperimentConfig& config) {
  ResultRecord r;
  r.id = config.id;
  r.kind = kind_name(config.kind);
  r.timestamp = utc_now();
  r.resolved_config = config.resolved;
  try {
    switch (config.kind) {
      case Kind::Metric: run_metric(config, r); break;
      case Kind::Evolve: run_evolve(config, r); break;
      case Kind::Sturm: run_sturm(config, r); break;
      case Kind::Susy: run_susy(config, r); break;
      case Kind::Scatter: run_scatter(config, r); break;
      case Kind::PoleScan: run_pole_scan(config, r); break;
      case Kind::Fig1Table: run_fig1(config, r); break;
    }
  } catch (const Error& e) {
    throw Error(e.code(), "experiment '" + config.id + "': " + e.detail());
  }
  return r;
}

}  // namespace cryptoherm::experiment
