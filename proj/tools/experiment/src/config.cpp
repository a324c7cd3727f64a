#include "lvi/experiment/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "lvi/errors.hpp"

namespace lvi::experiment {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "profile",
      "problem.alpha", "problem.gamma_bar", "problem.dim", "problem.horizon", "problem.lambdas",
      "problem.sigmas",
      "bank.m_sub", "bank.m_ou", "bank.delta_fine", "bank.delta_coarse", "bank.seed",
      "bank.path", "bank.precision", "bank.save",
      "query.alphas", "query.sigmas", "query.times", "query.s", "query.x", "query.radius",
      "query.shift",
      "field.kind", "field.b0", "field.y_bar", "field.sharpness",
      "estimator.mesh", "estimator.order2_mesh", "estimator.n_pairs", "estimator.n_tuples",
      "estimator.max_order", "estimator.benchmark_paths", "estimator.delta_em",
      "estimator.em_scheme", "estimator.flow_scheme", "estimator.flow_step",
      "estimator.pairing_seed", "estimator.benchmark_seed", "estimator.threads",
      "sweep.s", "sweep.x", "sweep.sigmas", "sweep.fields", "sweep.t",
      "validate.samples", "validate.lambdas",
      "output.dir",
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError("key " + key + ": not a finite number: '" + raw + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec == std::errc() && ptr == v.data() + v.size()) return out;
  // Allow counts written as 1e4.
  const double d = to_double(key, raw);
  if (d < 0.0 || d != std::floor(d) || d > 9.007199254740992e15) {
    throw ConfigError("key " + key + ": not a nonnegative integer: '" + raw + "'");
  }
  return static_cast<std::uint64_t>(d);
}

std::vector<std::string> split(const std::string& raw) {
  std::vector<std::string> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  for (const auto& item : split(raw)) out.push_back(to_double(key, item));
  if (out.empty()) throw ConfigError("key " + key + ": empty list");
  return out;
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw ConfigError("key " + key + ": expected true/false, got '" + raw + "'");
}

FieldKind to_field(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "zero") return FieldKind::kZero;
  if (v == "sine") return FieldKind::kSine;
  if (v == "bounded_cubic") return FieldKind::kBoundedCubic;
  throw ConfigError("key " + key + ": unknown field kind '" + raw + "'");
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

VectorFieldSpec FieldConfig::build(std::size_t dim) const {
  switch (kind) {
    case FieldKind::kZero:
      return VectorFieldSpec::zero();
    case FieldKind::kSine:
      return VectorFieldSpec::sine();
    case FieldKind::kBoundedCubic:
      return VectorFieldSpec::bounded_cubic(b0, std::vector<double>(dim, y_bar), sharpness);
    case FieldKind::kCustom:
      break;
  }
  throw ConfigError("custom fields cannot be configured from a file");
}

ProblemSpec ExperimentConfig::problem(double alpha_value) const {
  ProblemSpec spec = ProblemSpec::with_defaults(alpha_value, dim);
  spec.gamma_bar = gamma_bar;
  spec.horizon = horizon;
  if (!lambdas.empty()) spec.lambdas = lambdas;
  if (!sigmas.empty()) spec.sigmas = sigmas;
  try {
    spec.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid problem: ") + e.what());
  }
  return spec;
}

std::filesystem::path ExperimentConfig::bank_file(double alpha_value) const {
  std::string p = bank_path;
  const std::string tag = "{alpha}";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", alpha_value);
  for (auto pos = p.find(tag); pos != std::string::npos; pos = p.find(tag)) {
    p.replace(pos, tag.size(), buf);
  }
  return p;
}

std::vector<bool> ExperimentConfig::shift_modes() const {
  switch (shift) {
    case ShiftMode::kOn:
      return {true};
    case ShiftMode::kOff:
      return {false};
    case ShiftMode::kBoth:
      return {true, false};
  }
  return {true};
}

KeyValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file: " + path.string());
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.message() + " (line " +
                      std::to_string(e.line()) + ")");
  }
  KeyValues out;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      out[name] = node.data();
      continue;
    }
    for (const auto& [key, leaf] : node) out[name + "." + key] = leaf.data();
  }
  return out;
}

KeyValues profile_defaults(const std::string& profile) {
  if (profile == "desk") {
    return {
        {"bank.m_ou", "10000"},          {"bank.m_sub", "10000"},
        {"bank.delta_fine", "1e-3"},     {"estimator.delta_em", "1e-3"},
        {"estimator.benchmark_paths", "10000"}, {"estimator.n_pairs", "10000"},
        {"estimator.n_tuples", "5000"},  {"estimator.flow_scheme", "etdrk4"},
        {"estimator.flow_step", "1e-3"}, {"estimator.em_scheme", "exponential"},
    };
  }
  if (profile == "paper") {
    return {
        {"bank.m_ou", "100000"},         {"bank.m_sub", "100000"},
        {"bank.delta_fine", "1e-4"},     {"estimator.delta_em", "1e-4"},
        {"estimator.benchmark_paths", "100000"}, {"estimator.n_pairs", "100000"},
        {"estimator.n_tuples", "50000"}, {"estimator.flow_scheme", "euler"},
        {"estimator.flow_step", "1e-4"}, {"estimator.em_scheme", "explicit"},
    };
  }
  throw ConfigError("unknown profile '" + profile + "' (expected desk or paper)");
}

KeyValues table_preset(int table_id) {
  KeyValues kv{{"query.alphas", "0.55,0.65,0.75,0.85"}, {"query.times", "1"},
               {"query.s", "0"},  {"query.x", "1"}, {"query.radius", "1"}};
  switch (table_id) {
    case 1:
    case 2:
      kv["field.kind"] = "sine";
      kv["query.sigmas"] = "1";
      kv["estimator.max_order"] = "1";
      kv["query.shift"] = table_id == 1 ? "on" : "off";
      return kv;
    case 3:
    case 4:
      kv["field.kind"] = "bounded_cubic";
      kv["field.b0"] = "2";
      kv["field.y_bar"] = "2";
      kv["field.sharpness"] = "1e4";
      kv["query.sigmas"] = "0.7";
      kv["estimator.max_order"] = table_id == 3 ? "1" : "2";
      kv["query.shift"] = table_id == 3 ? "on" : "off";
      return kv;
    default:
      throw ConfigError("table id must be 1, 2, 3 or 4");
  }
}

KeyValues figure_preset(int figure_id) {
  KeyValues kv{{"query.times", "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1"},
               {"query.s", "0"}, {"query.x", "1"}, {"query.radius", "1"},
               {"estimator.max_order", "1"}};
  switch (figure_id) {
    case 1:
      kv["field.kind"] = "sine";
      kv["query.alphas"] = "0.6";
      kv["query.sigmas"] = "0.1,1.3";
      kv["query.shift"] = "on";
      return kv;
    case 2:
      kv["field.kind"] = "bounded_cubic";
      kv["query.alphas"] = "0.55,0.85";
      kv["query.sigmas"] = "0.5";
      kv["query.shift"] = "both";
      return kv;
    case 3:
      kv["field.kind"] = "bounded_cubic";
      kv["query.alphas"] = "0.6";
      kv["query.sigmas"] = "0.1,1.3";
      kv["query.shift"] = "on";
      return kv;
    default:
      throw ConfigError("figure id must be 1, 2 or 3");
  }
}

ExperimentConfig parse_config(const KeyValues& values) {
  for (const auto& [key, value] : values) {
    if (!known_keys().contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  ExperimentConfig c;
  const auto get = [&](const std::string& key) -> const std::string* {
    const auto it = values.find(key);
    return it == values.end() ? nullptr : &it->second;
  };
  if (auto v = get("profile")) c.profile = trim(*v);

  if (auto v = get("problem.alpha")) c.alpha = to_double("problem.alpha", *v);
  if (auto v = get("problem.gamma_bar")) c.gamma_bar = to_double("problem.gamma_bar", *v);
  if (auto v = get("problem.dim")) c.dim = to_u64("problem.dim", *v);
  if (auto v = get("problem.horizon")) c.horizon = to_double("problem.horizon", *v);
  if (auto v = get("problem.lambdas"); v && trim(*v) != "squares") {
    c.lambdas = to_doubles("problem.lambdas", *v);
  }
  if (auto v = get("problem.sigmas")) {
    c.sigmas = to_doubles("problem.sigmas", *v);
    if (c.sigmas.size() == 1) c.sigmas.assign(c.dim, c.sigmas[0]);
  }
  if (c.dim == 0) throw ConfigError("problem.dim must be positive");
  if (!c.lambdas.empty() && c.lambdas.size() != c.dim) {
    throw ConfigError("problem.lambdas must list problem.dim values");
  }
  if (!c.sigmas.empty() && c.sigmas.size() != c.dim) {
    throw ConfigError("problem.sigmas must be one value or problem.dim values");
  }

  if (auto v = get("bank.m_sub")) c.m_sub = to_u64("bank.m_sub", *v);
  if (auto v = get("bank.m_ou")) c.m_ou = to_u64("bank.m_ou", *v);
  if (auto v = get("bank.delta_fine")) c.delta_fine = to_double("bank.delta_fine", *v);
  if (auto v = get("bank.delta_coarse")) c.delta_coarse = to_double("bank.delta_coarse", *v);
  if (auto v = get("bank.seed")) c.seed = to_u64("bank.seed", *v);
  if (auto v = get("bank.path")) c.bank_path = trim(*v);
  if (auto v = get("bank.precision")) {
    const std::string p = trim(*v);
    if (p == "f64") {
      c.precision = StoragePrecision::kFloat64;
    } else if (p == "f32") {
      c.precision = StoragePrecision::kFloat32;
    } else {
      throw ConfigError("bank.precision must be f64 or f32");
    }
  }
  if (auto v = get("bank.save")) c.save_bank = to_bool("bank.save", *v);
  if (!(c.delta_fine > 0.0) || !(c.delta_coarse > 0.0)) {
    throw ConfigError("bank steps must be positive");
  }
  if (!integer_ratio(c.delta_coarse, c.delta_fine)) {
    throw ConfigError("bank.delta_coarse must be an integer multiple of bank.delta_fine");
  }

  c.alphas = {c.alpha};
  if (auto v = get("query.alphas")) c.alphas = to_doubles("query.alphas", *v);
  if (auto v = get("query.sigmas")) c.query_sigmas = to_doubles("query.sigmas", *v);
  if (auto v = get("query.times")) c.times = to_doubles("query.times", *v);
  if (auto v = get("query.s")) c.s = to_double("query.s", *v);
  if (auto v = get("query.x")) c.x = to_double("query.x", *v);
  if (auto v = get("query.radius")) c.radius = to_double("query.radius", *v);
  if (auto v = get("query.shift")) {
    const std::string m = trim(*v);
    if (m == "on") {
      c.shift = ShiftMode::kOn;
    } else if (m == "off") {
      c.shift = ShiftMode::kOff;
    } else if (m == "both") {
      c.shift = ShiftMode::kBoth;
    } else {
      throw ConfigError("query.shift must be on, off or both");
    }
  }
  if (auto v = get("field.kind")) c.field.kind = to_field("field.kind", *v);
  if (auto v = get("field.b0")) c.field.b0 = to_double("field.b0", *v);
  if (auto v = get("field.y_bar")) c.field.y_bar = to_double("field.y_bar", *v);
  if (auto v = get("field.sharpness")) c.field.sharpness = to_double("field.sharpness", *v);

  if (auto v = get("estimator.mesh")) c.mesh = to_double("estimator.mesh", *v);
  if (auto v = get("estimator.order2_mesh")) {
    c.order2_mesh = to_double("estimator.order2_mesh", *v);
  }
  if (auto v = get("estimator.n_pairs")) c.n_pairs = to_u64("estimator.n_pairs", *v);
  if (auto v = get("estimator.n_tuples")) c.n_tuples = to_u64("estimator.n_tuples", *v);
  if (auto v = get("estimator.max_order")) {
    c.max_order = static_cast<int>(to_u64("estimator.max_order", *v));
  }
  if (auto v = get("estimator.benchmark_paths")) {
    c.benchmark_paths = to_u64("estimator.benchmark_paths", *v);
  }
  if (auto v = get("estimator.delta_em")) c.delta_em = to_double("estimator.delta_em", *v);
  if (auto v = get("estimator.em_scheme")) {
    const std::string m = trim(*v);
    if (m == "exponential") {
      c.em_scheme = EmScheme::kExponential;
    } else if (m == "explicit") {
      c.em_scheme = EmScheme::kExplicit;
    } else {
      throw ConfigError("estimator.em_scheme must be exponential or explicit");
    }
  }
  if (auto v = get("estimator.flow_scheme")) {
    const std::string m = trim(*v);
    if (m == "etdrk4") {
      c.flow_scheme = FlowScheme::kExponentialRk4;
    } else if (m == "euler") {
      c.flow_scheme = FlowScheme::kEuler;
    } else {
      throw ConfigError("estimator.flow_scheme must be etdrk4 or euler");
    }
  }
  if (auto v = get("estimator.flow_step")) c.flow_step = to_double("estimator.flow_step", *v);
  if (auto v = get("estimator.pairing_seed")) {
    c.pairing_seed = to_u64("estimator.pairing_seed", *v);
  }
  c.benchmark_seed = c.seed + 1;
  if (auto v = get("estimator.benchmark_seed")) {
    c.benchmark_seed = to_u64("estimator.benchmark_seed", *v);
  }
  if (auto v = get("estimator.threads")) {
    c.threads = static_cast<unsigned>(to_u64("estimator.threads", *v));
  }
  if (c.max_order < 0 || c.max_order > 2) {
    throw ConfigError("estimator.max_order must be 0, 1 or 2");
  }

  c.sweep_s = {c.s};
  c.sweep_x = {c.x};
  c.sweep_sigmas = c.query_sigmas;
  c.sweep_fields = {c.field.kind};
  c.sweep_t = c.times.back();
  if (auto v = get("sweep.s")) c.sweep_s = to_doubles("sweep.s", *v);
  if (auto v = get("sweep.x")) c.sweep_x = to_doubles("sweep.x", *v);
  if (auto v = get("sweep.sigmas")) c.sweep_sigmas = to_doubles("sweep.sigmas", *v);
  if (auto v = get("sweep.fields")) {
    c.sweep_fields.clear();
    for (const auto& item : split(*v)) c.sweep_fields.push_back(to_field("sweep.fields", item));
  }
  if (auto v = get("sweep.t")) c.sweep_t = to_double("sweep.t", *v);

  if (auto v = get("validate.samples")) c.validate_samples = to_u64("validate.samples", *v);
  if (auto v = get("validate.lambdas")) c.validate_lambdas = to_doubles("validate.lambdas", *v);

  if (auto v = get("output.dir")) c.out_dir = trim(*v);
  return c;
}

ExperimentConfig resolve_config(const Overrides& overrides, const KeyValues& preset) {
  KeyValues file;
  if (overrides.config) file = read_config_file(*overrides.config);
  std::string profile = "desk";
  if (auto it = file.find("profile"); it != file.end()) profile = trim(it->second);
  if (overrides.profile) profile = *overrides.profile;

  KeyValues merged = profile_defaults(profile);
  for (const auto& [k, v] : preset) merged[k] = v;
  for (const auto& [k, v] : file) merged[k] = v;
  merged["profile"] = profile;
  if (overrides.bank) merged["bank.path"] = *overrides.bank;
  if (overrides.out) merged["output.dir"] = *overrides.out;
  if (overrides.seed) merged["bank.seed"] = std::to_string(*overrides.seed);
  if (overrides.threads) merged["estimator.threads"] = std::to_string(*overrides.threads);
  return parse_config(merged);
}

}  // namespace lvi::experiment
