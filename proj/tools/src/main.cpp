#include <CLI11.hpp>
#include <iostream>

#include "snls/errors.hpp"
#include "snlsapp/commands.hpp"
#include "snlsapp/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo simulator for the damped stochastic NLS on a periodic box"};
  app.require_subcommand(1);

  snlsapp::CommandOptions opts;
  std::string config;
  std::string output;
  std::string record;
  std::string check;
  std::string horizons;
  int moment_k = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config, "INI configuration file")->required();
    cmd->add_option("--output", output, "output root (overrides run.output)");
  };

  auto* sim = app.add_subcommand("simulate", "run the ensemble and write CSV artifacts");
  add_common(sim);

  auto* verify = app.add_subcommand("verify", "evaluate a diagnostic against its identity");
  add_common(verify);
  verify->add_option("--check", check, "mass | energy | transient | stationary | aldous | tail")->required();
  verify->add_option("--record", record, "existing run directory to analyse");
  verify->add_option("--k", moment_k, "moment order for --check stationary");

  auto* kb = app.add_subcommand("kb", "Krylov-Bogolyubov averages and their W1 convergence");
  add_common(kb);
  kb->add_option("--horizons", horizons, "comma-separated horizons, e.g. 5,10,20");
  kb->add_option("--record", record, "existing run directory to analyse");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : snlsapp::config_error;
  }

  if (!output.empty()) opts.output_root = output;
  if (!record.empty()) opts.record_dir = record;
  if (moment_k > 0) opts.moment_k = moment_k;

  try {
    if (*sim) return snlsapp::cmd_simulate(config, opts, std::cout, std::cerr);
    if (*verify) return snlsapp::cmd_verify(config, snlsapp::parse_check(check), opts, std::cout, std::cerr);
    return snlsapp::cmd_kb(config, snlsapp::parse_real_list(horizons), opts, std::cout, std::cerr);
  } catch (const snls::ConfigError& ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return snlsapp::config_error;
  }
}
