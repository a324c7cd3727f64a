#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "lvi/experiment/commands.hpp"

int main(int argc, char** argv) {
  using namespace lvi::experiment;
  CLI::App app{"lvi: iterate-scheme estimator for Levy-driven semilinear SDEs"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config, bank, out, profile;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  auto* o_config = app.add_option("--config", config, "Config file (INI sections, key = value)");
  auto* o_bank = app.add_option("--bank", bank, "Bank file path; {alpha} expands per alpha");
  auto* o_out = app.add_option("--out", out, "Output directory");
  auto* o_profile = app.add_option("--profile", profile, "Scale profile")
                        ->check(CLI::IsMember({"desk", "paper"}));
  auto* o_seed = app.add_option("--seed", seed, "Base seed");
  auto* o_threads = app.add_option("--threads", threads, "Worker threads (0 = all cores)");

  int table_id = 1;
  int figure_id = 1;
  auto* c_bank = app.add_subcommand("bank", "Generate and save simulation banks");
  auto* c_table = app.add_subcommand("table", "Reproduce a table (1-4) as CSV");
  c_table->add_option("id", table_id, "Table id")->required()->check(CLI::Range(1, 4));
  auto* c_figure = app.add_subcommand("figure", "Time series for a figure (1-3) as CSV");
  c_figure->add_option("id", figure_id, "Figure id")->required()->check(CLI::Range(1, 3));
  auto* c_sweep = app.add_subcommand("sweep", "Parameter sweep against one bank");
  auto* c_validate = app.add_subcommand("validate", "Sampler and covariance checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  Overrides ov;
  if (*o_config) ov.config = config;
  if (*o_bank) ov.bank = bank;
  if (*o_out) ov.out = out;
  if (*o_profile) ov.profile = profile;
  if (*o_seed) ov.seed = seed;
  if (*o_threads) ov.threads = threads;

  return run_guarded(
      [&] {
        if (*c_bank) {
          cmd_bank(resolve_config(ov), std::cout);
        } else if (*c_table) {
          cmd_table(resolve_config(ov, table_preset(table_id)), table_id, std::cout);
        } else if (*c_figure) {
          cmd_figure(resolve_config(ov, figure_preset(figure_id)), figure_id, std::cout);
        } else if (*c_sweep) {
          cmd_sweep(resolve_config(ov), std::cout);
        } else if (*c_validate) {
          return cmd_validate(resolve_config(ov), std::cout);
        }
        return true;
      },
      std::cerr);
}
