#pragma once

// Config-driven experiment runner and result emitter.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cryptoherm/linalg.hpp"

namespace cryptoherm::experiment {

enum class Kind { Metric, Evolve, Sturm, Susy, Scatter, PoleScan, Fig1Table };
enum class Format { Csv, Json };

const char* kind_name(Kind k);
const char* format_name(Format f);
Format parse_format(const std::string& name);

struct ModelInfo {
  std::string label;
  std::string description;
};

/// Every registry label accepted in a config's model section.
const std::vector<ModelInfo>& model_registry();

/// A strictly validated config. `resolved` is the canonical YAML text with
/// every default filled in; it is embedded in every output.
struct ExperimentConfig {
  std::string id;
  Kind kind = Kind::Metric;
  std::string model_label;
  std::map<std::string, double> model_params;
  /// smeared centers: (position, strength)
  std::vector<std::pair<double, Complex>> centers;
  std::map<std::string, double> settings;
  std::map<std::string, std::string> text_settings;
  std::vector<double> kappa;
  std::string output_path;
  Format format = Format::Csv;
  long long seed = 0;
  std::string resolved;
};

/// Parses YAML text. Unknown keys, missing required fields and wrong types
/// raise ConfigError naming the field and its line.
ExperimentConfig parse_config(const std::string& text, const std::string& default_id = "experiment");
ExperimentConfig load_config(const std::filesystem::path& path);

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// One PASS/FAIL flag with the value and the tolerance it was judged against.
struct Certificate {
  std::string name;
  double value = 0.0;
  std::string relation;  // "<=", ">=", "==", ">"
  double tolerance = 0.0;
  bool passed = false;
};

struct ResultRecord {
  std::string id;
  std::string kind;
  std::string timestamp;
  std::string resolved_config;
  std::vector<Table> tables;
  std::vector<Certificate> certificates;

  bool all_passed() const;
};

/// Dispatches to the owning module. Module errors are rethrown with the
/// experiment id prepended; the error code is preserved.
ResultRecord run_experiment(const ExperimentConfig& config);

/// Writes the record atomically (temp file + rename) below `out_dir`:
/// CSV gives one `<path>.<table>.csv` per table, JSON a single `<path>.json`.
/// Returns the files written.
std::vector<std::filesystem::path> emit_results(const ResultRecord& record, const ExperimentConfig& config,
                                                const std::filesystem::path& out_dir, Format format);

/// Tool version string embedded in outputs.
const char* tool_version();

}  // namespace cryptoherm::experiment
