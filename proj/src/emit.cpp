#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "cryptoherm/experiment.hpp"

namespace cryptoherm::experiment {

namespace fs = std::filesystem;

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_atomic(const fs::path& target, const std::string& content) {
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + target.parent_path().string() + ": " + ec.message());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot open " + tmp.string());
    out << content;
    out.flush();
    if (!out) fail(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorCode::IoError, "cannot move result into " + target.string());
  }
}

std::string certificate_line(const Certificate& c) {
  return c.name + " = " + g17(c.value) + " " + c.relation + " " + g17(c.tolerance) + " " +
         (c.passed ? "PASS" : "FAIL");
}

std::string csv_header(const ResultRecord& r, const Table& t) {
  std::ostringstream os;
  os << "# tool: " << tool_version() << "\n";
  os << "# experiment: " << r.id << "\n";
  os << "# kind: " << r.kind << "\n";
  os << "# timestamp: " << r.timestamp << "\n";
  os << "# config:\n";
  std::istringstream cfg(r.resolved_config);
  for (std::string line; std::getline(cfg, line);) os << "#   " << line << "\n";
  os << "# certificates:\n";
  for (const auto& c : r.certificates) os << "#   " << certificate_line(c) << "\n";
  os << "# table: " << t.name << "\n";
  return os.str();
}

std::string csv_body(const Table& t) {
  std::ostringstream os;
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << g17(row[i]);
    os << "\n";
  }
  return os.str();
}

std::string json_document(const ResultRecord& r) {
  nlohmann::ordered_json doc;
  doc["tool"] = tool_version();
  doc["experiment"] = r.id;
  doc["kind"] = r.kind;
  doc["timestamp"] = r.timestamp;
  doc["config"] = r.resolved_config;
  doc["certificates"] = nlohmann::ordered_json::array();
  for (const auto& c : r.certificates)
    doc["certificates"].push_back(
        {{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"tolerance", c.tolerance},
         {"passed", c.passed}});
  doc["tables"] = nlohmann::ordered_json::object();
  for (const auto& t : r.tables) doc["tables"][t.name] = {{"columns", t.columns}, {"rows", t.rows}};
  return doc.dump(2) + "\n";
}

}  // namespace

std::vector<fs::path> emit_results(const ResultRecord& record, const ExperimentConfig& config,
                                   const fs::path& out_dir, Format format) {
  std::vector<fs::path> written;
  const fs::path base = out_dir / config.output_path;
  if (format == Format::Json) {
    fs::path target = base;
    target += ".json";
    write_atomic(target, json_document(record));
    written.push_back(target);
    return written;
  }
  for (const auto& t : record.tables) {
    fs::path target = base;
    target += "." + t.name + ".csv";
    write_atomic(target, csv_header(record, t) + csv_body(t));
    written.push_back(target);
  }
  return written;
}

}  // namespace cryptoherm::experiment
