// chq: runs experiment configs through the cryptoherm C API.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "cryptoherm/cryptoherm.h"

namespace {

enum Exit { kOk = 0, kCertificateFailure = 1, kConfigError = 2, kNumericFailure = 3 };

struct Outcome {
  int exit = kOk;
  std::string report;
  bool passed = true;
};

std::string failure(const std::string& config) { return config + ": " + chq_last_error() + "\n"; }

Outcome run_one(const std::string& path, const std::string& out_dir, int format) {
  Outcome o;
  chq_experiment* exp = nullptr;
  int st = chq_experiment_load(path.c_str(), &exp);
  if (st != CHQ_OK) {
    o.exit = st == CHQ_CONFIG_ERROR ? kConfigError : kNumericFailure;
    o.report = failure(path);
    return o;
  }
  chq_result* res = nullptr;
  st = chq_experiment_run(exp, &res);
  const std::string id = chq_experiment_id(exp);
  chq_experiment_destroy(exp);
  if (st != CHQ_OK) {
    o.exit = st == CHQ_CONFIG_ERROR ? kConfigError : kNumericFailure;
    o.report = failure(path);
    return o;
  }

  o.passed = chq_result_passed(res) == 1;
  std::string lines;
  const std::size_t n = chq_result_certificate_count(res);
  for (std::size_t i = 0; i < n; ++i) {
    const char* name = nullptr;
    const char* rel = nullptr;
    double value = 0.0, tol = 0.0;
    int ok = 0;
    chq_result_certificate(res, i, &name, &value, &rel, &tol, &ok);
    char buf[256];
    std::snprintf(buf, sizeof buf, "  %-4s %s = %.6g %s %.3g\n", ok ? "PASS" : "FAIL", name, value, rel, tol);
    lines += buf;
  }
  st = chq_result_write(res, out_dir.c_str(), format);
  chq_result_destroy(res);
  if (st != CHQ_OK) {
    o.exit = kNumericFailure;
    o.report = failure(path);
    return o;
  }
  o.report = "experiment " + id + ": " + (o.passed ? "PASS" : "FAIL") + "\n" + lines;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crypto-Hermitian experiment runner"};
  app.set_version_flag("--version", std::string(chq_version()));
  bool list_models = false;
  app.add_flag("--list-models", list_models, "List model registry labels and exit");

  auto* run = app.add_subcommand("run", "Run one or more experiment configs");
  std::vector<std::string> configs;
  bool strict = false;
  std::string out_dir = ".";
  std::string format;
  unsigned jobs = 1;
  run->add_option("config", configs, "Experiment config files (YAML)")->required()->check(CLI::ExistingFile);
  run->add_flag("--strict", strict, "Exit with status 1 when any certificate fails");
  run->add_option("--out-dir", out_dir, "Directory receiving result files");
  run->add_option("--format", format, "Override the output format")->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--jobs,-j", jobs, "Experiments run in parallel")->check(CLI::Range(1u, 64u));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (list_models) {
    for (std::size_t i = 0; i < chq_model_count(); ++i)
      std::printf("%-22s %s\n", chq_model_label(i), chq_model_description(i));
    return kOk;
  }
  if (!*run) {
    std::fputs(app.help().c_str(), stdout);
    return kConfigError;
  }

  const int fmt = format.empty() ? CHQ_FORMAT_CONFIG : format == "json" ? CHQ_FORMAT_JSON : CHQ_FORMAT_CSV;
  std::vector<Outcome> outcomes(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) outcomes[i] = run_one(configs[i], out_dir, fmt);
  };
  std::vector<std::thread> pool;
  const unsigned workers = std::min<unsigned>(jobs, static_cast<unsigned>(configs.size()));
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int exit = kOk;
  for (const auto& o : outcomes) {
    std::fputs(o.report.c_str(), o.exit == kOk ? stdout : stderr);
    exit = std::max(exit, o.exit);
    if (o.exit == kOk && !o.passed && strict) exit = std::max<int>(exit, kCertificateFailure);
  }
  return exit;
}
