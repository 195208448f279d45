#include <iostream>

#include <CLI11.hpp>

#include "imm/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Stationary market simulation and validation"};
  app.require_subcommand(1);

  std::string config, out, suite = "all", returns;
  double return_horizon = 0.0;
  imm::cli::Overrides o;
  std::uint64_t seed = 0;
  std::size_t paths = 0;
  double dt = 0.0, horizon = 0.0;

  auto common = [&](CLI::App* c) {
    c->add_option("--config", config, "config file (JSON)");
    c->add_option("--out", out, "output directory");
    c->add_option("--seed", seed, "override seed");
    c->add_option("--paths", paths, "override path count");
    c->add_option("--dt", dt, "override grid step");
    c->add_option("--horizon", horizon, "override horizon");
  };
  auto* sim = app.add_subcommand("simulate", "simulate paths and write trajectory tables");
  common(sim);
  auto* val = app.add_subcommand("validate", "run validation suites");
  common(val);
  val->add_option("--suite", suite, "comma-separated suites, or all");
  auto* inf = app.add_subcommand("info", "information quantities of a config");
  common(inf);
  auto* fit = app.add_subcommand("fit", "Student-t fit of log-returns");
  common(fit);
  fit->add_option("--returns", returns, "file of log-returns, one per line");
  fit->add_option("--return-horizon", return_horizon, "horizon of the returns in the file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : imm::cli::kInvalidInput;
  }

  // Only explicitly given overrides apply.
  for (auto* c : {sim, val, inf, fit}) {
    if (!c->parsed()) continue;
    if (c->count("--seed")) o.seed = seed;
    if (c->count("--paths")) o.paths = paths;
    if (c->count("--dt")) o.dt = dt;
    if (c->count("--horizon")) o.horizon = horizon;
  }

  if (sim->parsed()) return imm::cli::simulate(config, out, o, std::cout, std::cerr);
  if (val->parsed()) return imm::cli::validate(config, out, suite, o, std::cout, std::cerr);
  if (inf->parsed()) return imm::cli::info(config, out, o, std::cout, std::cerr);
  if (returns.empty() && config.empty()) {
    std::cerr << "error: fit needs --returns or --config\n";
    return imm::cli::kInvalidInput;
  }
  return imm::cli::fit(returns, config, return_horizon, out, o, std::cout, std::cerr);
}
