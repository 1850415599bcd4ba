#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "cryptoherm/experiment.hpp"

namespace cryptoherm::experiment {

namespace {

[[noreturn]] void config_error(const YAML::Node& at, const std::string& what) {
  std::ostringstream os;
  if (at.IsDefined() && at.Mark().line >= 0) os << "line " << at.Mark().line + 1 << ": ";
  os << what;
  fail(ErrorCode::ConfigError, os.str());
}

// A mapping whose keys must all be consumed; records the resolved values.
class Section {
 public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_.IsDefined() && !node_.IsNull() && !node_.IsMap())
      config_error(node_, "'" + path_ + "' must be a mapping");
    resolved_ = YAML::Node(YAML::NodeType::Map);
  }

  bool has(const std::string& key) const { return node_.IsMap() && node_[key].IsDefined() && !node_[key].IsNull(); }

  double number(const std::string& key, std::optional<double> fallback = {}) {
    const auto v = fetch(key, fallback.has_value());
    double out = fallback.value_or(0.0);
    if (v) {
      try {
        out = v->as<double>();
      } catch (const YAML::Exception&) {
        config_error(*v, "field '" + field(key) + "' must be a number");
      }
      if (!std::isfinite(out)) config_error(*v, "field '" + field(key) + "' must be finite");
    }
    resolved_[key] = out;
    return out;
  }

  long long integer(const std::string& key, std::optional<long long> fallback = {}) {
    const auto v = fetch(key, fallback.has_value());
    long long out = fallback.value_or(0);
    if (v) {
      try {
        out = v->as<long long>();
      } catch (const YAML::Exception&) {
        config_error(*v, "field '" + field(key) + "' must be an integer");
      }
    }
    resolved_[key] = out;
    return out;
  }

  std::size_t count(const std::string& key, std::optional<long long> fallback = {}) {
    const long long v = integer(key, fallback);
    if (v < 1) config_error(node_[key], "field '" + field(key) + "' must be a positive integer");
    return static_cast<std::size_t>(v);
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = {}) {
    const auto v = fetch(key, fallback.has_value());
    std::string out = fallback.value_or("");
    if (v) {
      if (!v->IsScalar()) config_error(*v, "field '" + field(key) + "' must be a string");
      out = v->Scalar();
    }
    resolved_[key] = out;
    return out;
  }

  bool boolean(const std::string& key, bool fallback) {
    const auto v = fetch(key, true);
    bool out = fallback;
    if (v) {
      try {
        out = v->as<bool>();
      } catch (const YAML::Exception&) {
        config_error(*v, "field '" + field(key) + "' must be true or false");
      }
    }
    resolved_[key] = out;
    return out;
  }

  std::vector<double> numbers(const std::string& key) {
    const auto v = fetch(key, true);
    std::vector<double> out;
    if (!v) return out;
    if (!v->IsSequence()) config_error(*v, "field '" + field(key) + "' must be a list of numbers");
    for (const auto& item : *v) {
      try {
        out.push_back(item.as<double>());
      } catch (const YAML::Exception&) {
        config_error(item, "field '" + field(key) + "' must be a list of numbers");
      }
    }
    YAML::Node list(YAML::NodeType::Sequence);
    for (double x : out) list.push_back(x);
    resolved_[key] = list;
    return out;
  }

  YAML::Node raw(const std::string& key) {
    consumed_.insert(key);
    return node_.IsMap() ? node_[key] : YAML::Node();
  }

  void put(const std::string& key, const YAML::Node& value) { resolved_[key] = value; }

  void finish() const {
    if (!node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!consumed_.count(key)) config_error(kv.first, "unknown key '" + key + "' in '" + path_ + "'");
    }
  }

  const YAML::Node& resolved() const { return resolved_; }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::optional<YAML::Node> fetch(const std::string& key, bool optional) {
    consumed_.insert(key);
    if (has(key)) return node_[key];
    if (!optional) config_error(node_, "missing required field '" + field(key) + "'");
    return std::nullopt;
  }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> consumed_;
  YAML::Node resolved_;
};

Kind parse_kind(const YAML::Node& at, const std::string& name) {
  static const std::map<std::string, Kind> kinds = {
      {"metric", Kind::Metric},   {"evolve", Kind::Evolve},      {"sturm", Kind::Sturm},
      {"susy", Kind::Susy},       {"scatter", Kind::Scatter},    {"pole-scan", Kind::PoleScan},
      {"fig1-table", Kind::Fig1Table}};
  const auto it = kinds.find(name);
  if (it == kinds.end()) config_error(at, "unknown experiment kind '" + name + "'");
  return it->second;
}

bool is_lattice(const std::string& label) {
  return label == "pt-chain" || label == "smeared" || label == "singular-osc" || label.rfind("susy:", 0) == 0;
}

void parse_model(Section& top, ExperimentConfig& c) {
  const bool needed = c.kind != Kind::Sturm && c.kind != Kind::Fig1Table;
  if (!needed) {
    if (top.has("model")) config_error(top.raw("model"), "kind '" + std::string(kind_name(c.kind)) +
                                                              "' takes no model section");
    top.raw("model");
    return;
  }
  if (!top.has("model")) config_error(top.raw("model").IsDefined() ? top.raw("model") : YAML::Node(),
                                      "missing required field 'model'");
  Section model(top.raw("model"), "model");
  c.model_label = model.text("label");
  const auto& reg = model_registry();
  if (std::none_of(reg.begin(), reg.end(), [&](const ModelInfo& m) { return m.label == c.model_label; }))
    config_error(model.raw("label"), "unknown model '" + c.model_label + "' (see --list-models)");

  const bool family = c.model_label.rfind("family:", 0) == 0;
  if ((c.kind == Kind::Evolve) != family)
    config_error(model.raw("label"), "model '" + c.model_label + "' cannot be used with kind '" +
                                         kind_name(c.kind) + "'");
  if (c.kind == Kind::Susy && c.model_label.rfind("susy:", 0) != 0)
    config_error(model.raw("label"), "kind 'susy' requires a susy:<W> model");
  if ((c.kind == Kind::Scatter || c.kind == Kind::PoleScan) &&
      !(c.model_label == "pt-chain" || c.model_label == "smeared"))
    config_error(model.raw("label"), "scattering requires a pt-chain or smeared model");
  if (c.kind == Kind::Metric && !is_lattice(c.model_label))
    config_error(model.raw("label"), "kind 'metric' requires a lattice model");

  Section p(model.raw("params"), "model.params");
  auto& m = c.model_params;
  const std::string& l = c.model_label;
  if (l == "pt-chain") {
    m["n"] = static_cast<double>(p.count("n"));
    m["gamma"] = p.number("gamma");
    m["g"] = p.number("g", 1.0);
    m["mass_sign"] = static_cast<double>(p.integer("mass_sign", 1));
  } else if (l == "smeared") {
    m["n"] = static_cast<double>(p.count("n"));
    m["width"] = p.number("width");
    m["mass_sign"] = static_cast<double>(p.integer("mass_sign", 1));
    const YAML::Node list = p.raw("centers");
    if (!list.IsDefined() || !list.IsSequence() || list.size() == 0)
      config_error(list.IsDefined() ? list : YAML::Node(), "field 'model.params.centers' must be a non-empty list");
    YAML::Node out(YAML::NodeType::Sequence);
    for (std::size_t i = 0; i < list.size(); ++i) {
      Section ctr(list[i], "model.params.centers[" + std::to_string(i) + "]");
      const double pos = ctr.number("position");
      const double re = ctr.number("strength_re", 0.0);
      const double im = ctr.number("strength_im", 0.0);
      ctr.finish();
      c.centers.emplace_back(pos, Complex(re, im));
      out.push_back(ctr.resolved());
    }
    p.put("centers", out);
  } else if (l == "singular-osc") {
    m["gamma"] = p.number("gamma");
    m["length"] = p.number("length", 10.0);
    m["n"] = static_cast<double>(p.count("n", 4000));
  } else if (l.rfind("susy:", 0) == 0) {
    m["x_min"] = p.number("x_min", -8.0);
    m["x_max"] = p.number("x_max", 8.0);
    m["n"] = static_cast<double>(p.count("n"));
    m["random_phases"] = p.boolean("random_phases", false) ? 1.0 : 0.0;
  } else if (l == "family:rotating") {
    m["omega_rate"] = p.number("omega_rate", 0.7);
    m["stretch"] = p.number("stretch", 2.0);
    m["drive"] = p.number("drive", 0.3);
  } else if (l == "family:static-pt") {
    m["gamma"] = p.number("gamma", 0.5);
  } else if (l == "family:phase") {
    m["lambda"] = p.number("lambda", 0.3);
    m["gamma"] = p.number("gamma", 0.5);
  }
  p.finish();
  if (m.count("mass_sign") && m["mass_sign"] != 1.0 && m["mass_sign"] != -1.0)
    config_error(model.raw("params")["mass_sign"], "field 'model.params.mass_sign' must be +1 or -1");
  model.put("params", p.resolved());
  model.finish();
  top.put("model", model.resolved());
}

void parse_settings(Section& top, ExperimentConfig& c) {
  Section s(top.raw("settings"), "settings");
  auto& v = c.settings;
  auto& t = c.text_settings;
  switch (c.kind) {
    case Kind::Metric:
      v["tol"] = s.number("tol", 1e-10);
      c.kappa = s.numbers("kappa");
      if (s.has("band")) v["band"] = static_cast<double>(s.integer("band"));
      break;
    case Kind::Evolve:
      v["t0"] = s.number("t0", 0.0);
      v["t1"] = s.number("t1", 10.0);
      v["tol"] = s.number("tol", 1e-8);
      v["reports"] = static_cast<double>(s.count("reports", 10));
      v["drift_tol"] = s.number("drift_tol", 1e-6);
      v["pullback_tol"] = s.number("pullback_tol", 1e-6);
      break;
    case Kind::Sturm:
      t["path"] = s.text("path", std::string("identity"));
      t["potential"] = s.text("potential", std::string("harmonic"));
      v["s_min"] = s.number("s_min", -8.0);
      v["s_max"] = s.number("s_max", 8.0);
      v["n"] = static_cast<double>(s.count("n"));
      v["levels"] = static_cast<double>(s.count("levels", 5));
      v["tol"] = s.number("tol", 1e-10);
      if (s.has("oracle_tol")) v["oracle_tol"] = s.number("oracle_tol");
      break;
    case Kind::Susy:
      v["tol"] = s.number("tol", 1e-3);
      v["intertwining_tol"] = s.number("intertwining_tol", 1e-12);
      if (s.has("expected_zero_modes"))
        v["expected_zero_modes"] = static_cast<double>(s.integer("expected_zero_modes"));
      break;
    case Kind::Scatter:
      v["e_min"] = s.number("e_min");
      v["e_max"] = s.number("e_max");
      v["count"] = static_cast<double>(s.count("count"));
      v["deficit_tol"] = s.number("deficit_tol", 1e-10);
      v["weighted"] = s.boolean("weighted", false) ? 1.0 : 0.0;
      v["weighted_tol"] = s.number("weighted_tol", 1e-8);
      break;
    case Kind::PoleScan:
      v["re_min"] = s.number("re_min");
      v["re_max"] = s.number("re_max");
      v["im_min"] = s.number("im_min", 0.0);
      v["im_max"] = s.number("im_max", 0.0);
      v["density"] = static_cast<double>(s.count("density", 41));
      v["match_tol"] = s.number("match_tol", 1e-5);
      break;
    case Kind::Fig1Table:
      v["gamma_from"] = s.number("gamma_from", -0.9);
      v["gamma_to"] = s.number("gamma_to", 2.0);
      v["gamma_step"] = s.number("gamma_step", 0.1);
      v["n"] = static_cast<double>(s.count("n", 4000));
      v["length"] = s.number("length", 10.0);
      v["levels"] = static_cast<double>(s.count("levels", 8));
      v["spacing_tol"] = s.number("spacing_tol", 0.02);
      if (!(v["gamma_step"] > 0.0)) config_error(s.raw("gamma_step"), "field 'settings.gamma_step' must be positive");
      break;
  }
  s.finish();
  top.put("settings", s.resolved());
}

}  // namespace

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Metric: return "metric";
    case Kind::Evolve: return "evolve";
    case Kind::Sturm: return "sturm";
    case Kind::Susy: return "susy";
    case Kind::Scatter: return "scatter";
    case Kind::PoleScan: return "pole-scan";
    case Kind::Fig1Table: return "fig1-table";
  }
  return "?";
}

const char* format_name(Format f) { return f == Format::Csv ? "csv" : "json"; }

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  fail(ErrorCode::ConfigError, "unknown output format '" + name + "' (csv or json)");
}

const std::vector<ModelInfo>& model_registry() {
  static const std::vector<ModelInfo> registry = {
      {"pt-chain", "g-hopping chain with +-i*gamma on the end sites (n, gamma, g, mass_sign)"},
      {"smeared", "chain with Gaussian-profile complex centers (n, width, centers, mass_sign)"},
      {"singular-osc", "-D^2 + x^2 + gamma(gamma+1)/x^2 on (0, length] (gamma, length, n)"},
      {"susy:linear", "lattice SUSY pair with W(x) = x (x_min, x_max, n, random_phases)"},
      {"susy:zero", "lattice SUSY pair with W(x) = 0 (x_min, x_max, n, random_phases)"},
      {"susy:cubic", "lattice SUSY pair with W(x) = x^3 (x_min, x_max, n, random_phases)"},
      {"family:rotating", "2x2 Dyson family with a rotating metric (omega_rate, stretch, drive)"},
      {"family:interpolating", "2x2 Dyson family interpolating two non-unitary maps"},
      {"family:static-pt", "2x2 PT model with its static metric (gamma)"},
      {"family:phase", "2x2 PT model with Omega(t) = exp(i*lambda*t) (lambda, gamma)"},
  };
  return registry;
}

ExperimentConfig parse_config(const std::string& text, const std::string& default_id) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream os;
    os << "line " << e.mark.line + 1 << ": " << e.msg;
    fail(ErrorCode::ConfigError, os.str());
  }
  if (!root.IsMap()) fail(ErrorCode::ConfigError, "config must be a mapping");

  ExperimentConfig c;
  Section top(root, "");
  c.id = top.text("id", default_id);
  const std::string kind = top.text("kind");
  c.kind = parse_kind(root["kind"], kind);
  parse_model(top, c);
  parse_settings(top, c);

  Section out(top.raw("output"), "output");
  c.output_path = out.text("path", c.id);
  c.format = parse_format(out.text("format", std::string("csv")));
  if (c.output_path.empty() || c.output_path.find("..") != std::string::npos)
    config_error(out.raw("path"), "field 'output.path' must be a plain relative name");
  out.finish();
  top.put("output", out.resolved());
  c.seed = top.integer("seed", 0);
  top.finish();

  YAML::Emitter em;
  em.SetDoublePrecision(17);
  em << top.resolved();
  c.resolved = em.c_str();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, "cannot read config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str(), path.stem().string());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

}  // namespace cryptoherm::experiment
