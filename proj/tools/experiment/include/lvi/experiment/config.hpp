#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lvi/bank.hpp"
#include "lvi/estimators.hpp"
#include "lvi/fields.hpp"
#include "lvi/flow.hpp"
#include "lvi/model.hpp"

namespace lvi::experiment {

/// Flat "section.key" -> raw value map.
using KeyValues = std::map<std::string, std::string>;

enum class ShiftMode { kOn, kOff, kBoth };

struct FieldConfig {
  FieldKind kind = FieldKind::kSine;
  double b0 = 2.0;
  double y_bar = 2.0;  ///< constant entry of y_bar
  double sharpness = 1e4;

  VectorFieldSpec build(std::size_t dim) const;
};

struct ExperimentConfig {
  std::string profile = "desk";

  // problem
  double alpha = 0.75;
  double gamma_bar = 1.0;
  std::size_t dim = 100;
  double horizon = 1.0;
  std::vector<double> lambdas;  ///< empty: k^2
  std::vector<double> sigmas;   ///< empty: all ones

  // bank
  std::size_t m_sub = 10000;
  std::size_t m_ou = 10000;
  double delta_fine = 1e-3;
  double delta_coarse = 1e-2;
  std::uint64_t seed = 1;
  std::string bank_path = "banks/bank_alpha{alpha}.lvib";
  StoragePrecision precision = StoragePrecision::kFloat64;
  bool save_bank = true;

  // query
  std::vector<double> alphas{0.75};
  std::vector<double> query_sigmas{1.0};
  std::vector<double> times{1.0};
  double s = 0.0;
  double x = 1.0;  ///< start point x * e
  double radius = 1.0;
  ShiftMode shift = ShiftMode::kOn;
  FieldConfig field;

  // estimators
  double mesh = 1e-2;
  double order2_mesh = 2e-2;
  std::size_t n_pairs = 10000;
  std::size_t n_tuples = 5000;
  int max_order = 1;
  std::size_t benchmark_paths = 10000;
  double delta_em = 1e-3;
  EmScheme em_scheme = EmScheme::kExponential;
  FlowScheme flow_scheme = FlowScheme::kExponentialRk4;
  double flow_step = 1e-3;
  std::uint64_t pairing_seed = 0;
  std::uint64_t benchmark_seed = 2;
  unsigned threads = 1;

  // sweep
  std::vector<double> sweep_s{0.0};
  std::vector<double> sweep_x{1.0};
  std::vector<double> sweep_sigmas{1.0};
  std::vector<FieldKind> sweep_fields{FieldKind::kSine};
  double sweep_t = 1.0;

  // validate
  std::size_t validate_samples = 100000;
  std::vector<double> validate_lambdas{0.5, 1.0, 2.0};

  std::filesystem::path out_dir = "out";

  ProblemSpec problem(double alpha_value) const;
  /// bank_path with "{alpha}" replaced by the formatted alpha.
  std::filesystem::path bank_file(double alpha_value) const;
  std::vector<bool> shift_modes() const;
};

/// Command-line overrides; each one wins over the file and the presets.
struct Overrides {
  std::optional<std::filesystem::path> config;
  std::optional<std::string> bank;
  std::optional<std::string> out;
  std::optional<std::string> profile;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

/// Parses an INI-style file ([section] headers, key = value, '#' or ';' comments) into
/// a flat map. Throws IoError when unreadable, ConfigError on syntax errors.
KeyValues read_config_file(const std::filesystem::path& path);

KeyValues profile_defaults(const std::string& profile);
KeyValues table_preset(int table_id);
KeyValues figure_preset(int figure_id);

/// defaults < profile < preset < file < overrides. Unknown keys throw ConfigError.
ExperimentConfig resolve_config(const Overrides& overrides, const KeyValues& preset = {});

/// Parses an already merged map (every key optional).
ExperimentConfig parse_config(const KeyValues& values);

std::string format_number(double v);

}  // namespace lvi::experiment
