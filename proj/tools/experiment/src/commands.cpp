#include "lvi/experiment/commands.hpp"

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "lvi/errors.hpp"
#include "lvi/stable.hpp"

namespace lvi::experiment {

namespace {

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : path_(path) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("cannot write " + path.string());
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
    if (!out_) throw IoError("failed writing " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

std::string num(double v) { return format_number(v); }

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016" PRIx64, v);
  return buf;
}

QueryParams make_query(const ExperimentConfig& cfg, const ProblemSpec& spec, double sigma,
                       bool shift, FieldKind kind, double x, double s, double t) {
  QueryParams q;
  q.s = s;
  q.t = t;
  q.x.assign(spec.dim, x);
  q.sigma_scale = sigma;
  q.radius = cfg.radius;
  FieldConfig field = cfg.field;
  field.kind = kind;
  q.field = field.build(spec.dim);
  q.use_shift = shift;
  return q;
}

EmOptions em_options(const ExperimentConfig& cfg) { return EmOptions{cfg.em_scheme, cfg.threads}; }
IterateOptions it_options(const ExperimentConfig& cfg) { return IterateOptions{cfg.threads}; }

struct Iterates {
  std::vector<IterateEstimate> v;  ///< orders 0..max_order
};

Iterates run_iterates(const ExperimentConfig& cfg, const SimulationBank& bank,
                      const ProblemSpec& spec, const QueryParams& q) {
  const TimeShift shift = make_shift(spec, q, cfg.flow_step, cfg.flow_scheme);
  Iterates out;
  out.v.push_back(v0_estimate(bank, spec, shift, q, it_options(cfg)));
  if (cfg.max_order >= 1) {
    out.v.push_back(
        v1_estimate(bank, spec, shift, q, cfg.mesh, cfg.n_pairs, cfg.pairing_seed, it_options(cfg)));
  }
  if (cfg.max_order >= 2) {
    out.v.push_back(vn_estimate(bank, spec, shift, q, 2, cfg.order2_mesh, cfg.n_tuples,
                                cfg.pairing_seed, it_options(cfg)));
  }
  return out;
}

}  // namespace

SimulationBank obtain_bank(const ExperimentConfig& cfg, double alpha, std::ostream& log) {
  const ProblemSpec spec = cfg.problem(alpha);
  const std::filesystem::path path = cfg.bank_file(alpha);
  if (std::filesystem::exists(path)) {
    SimulationBank bank = load_bank(path, spec);
    log << "loaded bank " << path.string() << " (m_sub=" << bank.header.m_sub
        << ", m_ou=" << bank.header.m_ou << ")\n";
    return bank;
  }
  SimulationBank bank =
      generate_bank(spec, cfg.delta_fine, cfg.delta_coarse, cfg.m_sub, cfg.m_ou, cfg.seed,
                    BankOptions{cfg.precision, cfg.threads, false});
  if (cfg.save_bank) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    save_bank(bank, path);
    log << "generated and saved bank " << path.string() << "\n";
  } else {
    log << "generated bank in memory for alpha=" << num(alpha) << "\n";
  }
  return bank;
}

void cmd_bank(const ExperimentConfig& cfg, std::ostream& log) {
  for (double alpha : cfg.alphas) {
    const ProblemSpec spec = cfg.problem(alpha);
    const SimulationBank bank =
        generate_bank(spec, cfg.delta_fine, cfg.delta_coarse, cfg.m_sub, cfg.m_ou, cfg.seed,
                      BankOptions{cfg.precision, cfg.threads, false});
    const std::filesystem::path path = cfg.bank_file(alpha);
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    save_bank(bank, path);
    log << "bank alpha=" << num(alpha) << " path=" << path.string()
        << " m_sub=" << bank.header.m_sub << " m_ou=" << bank.header.m_ou
        << " delta_fine=" << num(bank.header.delta_fine)
        << " delta_coarse=" << num(bank.header.delta_coarse)
        << " checkpoints=" << bank.coarse_grid().num_points()
        << " bytes=" << std::filesystem::file_size(path)
        << " spec_hash=" << hex(bank.header.spec_hash) << "\n";
  }
}

void cmd_table(const ExperimentConfig& cfg, int table_id, std::ostream& log) {
  std::vector<std::string> header{"alpha", "P", "v0", "eps0"};
  std::vector<std::string> se_header{"alpha", "P_se", "v0_se", "eps0_se"};
  for (int n = 1; n <= cfg.max_order; ++n) {
    header.push_back("v" + std::to_string(n));
    header.push_back("eps" + std::to_string(n));
    se_header.push_back("v" + std::to_string(n) + "_se");
    se_header.push_back("eps" + std::to_string(n) + "_se");
  }
  const std::string stem = "table" + std::to_string(table_id);
  CsvWriter values(cfg.out_dir / (stem + ".csv"), header);
  CsvWriter errors(cfg.out_dir / (stem + "_se.csv"), se_header);
  const double sigma = cfg.query_sigmas.front();
  const bool shift = cfg.shift_modes().front();
  const double t = cfg.times.back();
  for (double alpha : cfg.alphas) {
    const ProblemSpec spec = cfg.problem(alpha);
    const QueryParams q = make_query(cfg, spec, sigma, shift, cfg.field.kind, cfg.x, cfg.s, t);
    const IterateEstimate p =
        em_benchmark(spec, q, cfg.benchmark_paths, cfg.delta_em, cfg.benchmark_seed, em_options(cfg));
    SimulationBank bank = obtain_bank(cfg, alpha, log);
    const Iterates it = run_iterates(cfg, bank, spec, q);
    const auto rows = partial_sums(it.v, p);
    std::vector<std::string> v{num(alpha), num(p.value)};
    std::vector<std::string> e{num(alpha), num(p.std_error)};
    for (std::size_t n = 0; n < rows.size(); ++n) {
      v.push_back(num(it.v[n].value));
      v.push_back(num(rows[n].rel_error));
      e.push_back(num(it.v[n].std_error));
      e.push_back(num(rows[n].rel_error_se));
    }
    values.row(v);
    errors.row(e);
    log << stem << " alpha=" << num(alpha) << " P=" << p.value << " v0=" << it.v[0].value
        << " eps" << rows.size() - 1 << "=" << rows.back().rel_error << "\n";
  }
}

void cmd_figure(const ExperimentConfig& cfg, int figure_id, std::ostream& log) {
  CsvWriter out(cfg.out_dir / ("figure" + std::to_string(figure_id) + ".csv"),
                {"alpha", "sigma", "shift", "t", "P", "v0", "v0_plus_v1", "abs_eps0", "abs_eps1"});
  for (double alpha : cfg.alphas) {
    const ProblemSpec spec = cfg.problem(alpha);
    SimulationBank bank = obtain_bank(cfg, alpha, log);
    for (double sigma : cfg.query_sigmas) {
      for (bool shift : cfg.shift_modes()) {
        QueryParams q =
            make_query(cfg, spec, sigma, shift, cfg.field.kind, cfg.x, cfg.s, cfg.times.back());
        const auto bench = em_benchmark_series(spec, q, cfg.times, cfg.benchmark_paths,
                                               cfg.delta_em, cfg.benchmark_seed, em_options(cfg));
        const TimeShift ts = make_shift(spec, q, cfg.flow_step, cfg.flow_scheme);
        for (std::size_t i = 0; i < cfg.times.size(); ++i) {
          q.t = cfg.times[i];
          const IterateEstimate v0 = v0_estimate(bank, spec, ts, q, it_options(cfg));
          const IterateEstimate v1 = v1_estimate(bank, spec, ts, q, cfg.mesh, cfg.n_pairs,
                                                 cfg.pairing_seed, it_options(cfg));
          const IterateEstimate both[] = {v0, v1};
          const auto rows = partial_sums(both, bench[i]);
          out.row({num(alpha), num(sigma), shift ? "on" : "off", num(q.t), num(bench[i].value),
                   num(v0.value), num(rows[1].partial_sum), num(std::fabs(rows[0].rel_error)),
                   num(std::fabs(rows[1].rel_error))});
        }
        log << "figure" << figure_id << " series alpha=" << num(alpha) << " sigma=" << num(sigma)
            << " shift=" << (shift ? "on" : "off") << " done\n";
      }
    }
  }
}

void cmd_sweep(const ExperimentConfig& cfg, std::ostream& log) {
  const ProblemSpec spec = cfg.problem(cfg.alpha);
  const std::filesystem::path path = cfg.bank_file(cfg.alpha);
  if (!std::filesystem::exists(path)) {
    throw IoError("sweep needs an existing bank file: " + path.string());
  }
  const std::size_t loads_before = bank_load_count();
  const SimulationBank bank = load_bank(path, spec);
  std::vector<std::string> header{"s", "t", "x", "sigma", "field", "shift", "valid", "v0", "v0_se"};
  if (cfg.max_order >= 1) {
    header.push_back("v1");
    header.push_back("v1_se");
  }
  header.push_back("note");
  CsvWriter out(cfg.out_dir / "sweep.csv", header);
  CsvWriter timing(cfg.out_dir / "sweep_timing.csv", {"row", "wall_seconds"});
  std::size_t row = 0;
  std::size_t invalid = 0;
  for (double s : cfg.sweep_s) {
    for (double x : cfg.sweep_x) {
      for (double sigma : cfg.sweep_sigmas) {
        for (FieldKind kind : cfg.sweep_fields) {
          for (bool shift : cfg.shift_modes()) {
            const auto start = std::chrono::steady_clock::now();
            FieldConfig fc = cfg.field;
            fc.kind = kind;
            const std::string field_name = fc.build(spec.dim).name();
            std::vector<std::string> cells{num(s),     num(cfg.sweep_t), num(x), num(sigma),
                                           field_name, shift ? "on" : "off"};
            try {
              const QueryParams q = make_query(cfg, spec, sigma, shift, kind, x, s, cfg.sweep_t);
              const Iterates it = run_iterates(cfg, bank, spec, q);
              cells.push_back("1");
              for (const auto& e : it.v) {
                cells.push_back(num(e.value));
                cells.push_back(num(e.std_error));
              }
              cells.push_back("");
            } catch (const DomainError& e) {
              ++invalid;
              cells.push_back("0");
              for (int k = 0; k <= cfg.max_order && k <= 1; ++k) {
                cells.push_back("");
                cells.push_back("");
              }
              cells.push_back(std::string("\"") + e.what() + "\"");
              log << "sweep row " << row << " invalid: " << e.what() << "\n";
            }
            out.row(cells);
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            timing.row({std::to_string(row), num(secs)});
            ++row;
          }
        }
      }
    }
  }
  log << "sweep rows=" << row << " invalid=" << invalid
      << " bank_loads=" << bank_load_count() - loads_before << "\n";
}

bool cmd_validate(const ExperimentConfig& cfg, std::ostream& log) {
  CsvWriter out(cfg.out_dir / "validate.csv",
                {"check", "alpha", "lambda", "empirical", "analytic", "std_error", "flagged"});
  bool ok = true;
  for (double alpha : cfg.alphas) {
    const auto rows = validate_sampler(alpha, cfg.gamma_bar, cfg.validate_samples,
                                       cfg.validate_lambdas, cfg.seed);
    for (const auto& r : rows) {
      out.row({"laplace", num(alpha), num(r.lam), num(r.empirical), num(r.analytic),
               num(r.std_error), r.flagged ? "1" : "0"});
      log << "laplace alpha=" << num(alpha) << " lambda=" << num(r.lam)
          << " empirical=" << r.empirical << " analytic=" << r.analytic
          << (r.flagged ? " FLAGGED" : " ok") << "\n";
      ok = ok && !r.flagged;
    }
  }
  const ProblemSpec spec = cfg.problem(cfg.alpha);
  const TimeGrid grid(0.0, spec.horizon, cfg.delta_fine);
  const SubordinatorPath clock{grid, std::vector<double>(grid.num_steps(), grid.step()), 0};
  const DiagonalOperator quad = covariance_integral(clock, spec, 1.0, 0.0, spec.horizon);
  const DiagonalOperator exact = covariance_deterministic_clock(spec, 0.0, spec.horizon);
  double worst = 0.0;
  for (std::size_t k = 0; k < spec.dim; ++k) {
    worst = std::max(worst, std::fabs(quad[k] - exact[k]) / exact[k]);
  }
  const bool cov_ok = worst <= 1e-10;
  out.row({"covariance", num(cfg.alpha), "", num(worst), "0", "", cov_ok ? "0" : "1"});
  log << "covariance oracle max relative error " << worst << (cov_ok ? " ok" : " FLAGGED") << "\n";
  return ok && cov_ok;
}

int run_guarded(const std::function<bool()>& body, std::ostream& err) {
  try {
    return body() ? kExitOk : kExitFlagged;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace lvi::experiment
