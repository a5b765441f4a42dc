#include <CLI11.hpp>

#include <iostream>

#include "gauge_rig/commands.hpp"

using gauge_rig::cli::RunConfig;

namespace {

void add_common(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--input", cfg.input, "framework JSON document")->required();
  cmd->add_option("--omega", cfg.omega, "angular velocity of the initial rigid rotation");
  cmd->add_option("--lambda", cfg.lambda, "tension on the first rod in the initial data");
  cmd->add_option("--out", cfg.out, "output file (written atomically); stdout if omitted");
  cmd->add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"csv", "json"}));
}

void add_time(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--t-end", cfg.t_end, "final time")->check(CLI::PositiveNumber);
  cmd->add_option("--step", cfg.step, "integration step")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and gauge analysis of rod-mass frameworks"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* analyze = app.add_subcommand("analyze", "constraint structure and tension system at the input configuration");
  add_common(analyze, cfg);

  auto* simulate = app.add_subcommand("simulate", "integrate rigidly rotating initial data");
  add_common(simulate, cfg);
  add_time(simulate, cfg);
  simulate->add_option("--xi", cfg.xi, "gauge policy: 0, <c>, const:<c>, cos:<a>,<w>, sin:<a>,<w>")->expected(1);

  auto* compare = app.add_subcommand("gauge-compare", "evolve the same initial data under several gauge policies");
  add_common(compare, cfg);
  add_time(compare, cfg);
  compare->add_option("--xi", cfg.xi, "gauge policy (repeatable)");

  auto* fix = app.add_subcommand("gauge-fix", "fix the tension on one rod and evolve");
  add_common(fix, cfg);
  add_time(fix, cfg);
  fix->add_option("--fixed-edge", cfg.fixed_edge, "rod to fix, written a-b");
  fix->add_option("--fixed-value", cfg.fixed_value, "tension value on the fixed rod");

  auto* reduce = app.add_subcommand("reduce", "map a trajectory of the four-mass system to the reduced phase space");
  reduce->add_option("--input", cfg.input, "framework JSON document")->required();
  reduce->add_option("--trajectory", cfg.trajectory, "trajectory CSV or JSON written by simulate")->required();
  reduce->add_option("--out", cfg.out, "output CSV; stdout if omitted");

  auto* oracle = app.add_subcommand("oracle-check", "run the closed-form and finite-difference oracle comparisons");
  oracle->add_option("--seed", cfg.seed, "random seed for sampled points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    cfg.tolerances = gauge_rig::tolerances_from_environment();
    if (*analyze) return gauge_rig::cli::cmd_analyze(cfg, std::cout);
    if (*simulate) return gauge_rig::cli::cmd_simulate(cfg, std::cout);
    if (*compare) return gauge_rig::cli::cmd_gauge_compare(cfg, std::cout);
    if (*fix) return gauge_rig::cli::cmd_gauge_fix(cfg, std::cout);
    if (*reduce) return gauge_rig::cli::cmd_reduce(cfg, std::cout);
    if (*oracle) return gauge_rig::cli::cmd_oracle_check(cfg, std::cout);
  } catch (const gauge_rig::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
