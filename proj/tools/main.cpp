#include <iostream>

#include "CLI11.hpp"

#include "immergrid/runner.hpp"

using namespace immergrid;

int main(int argc, char** argv) {
  CLI::App app{"Immersed finite element workbench: cut-cell quadrature, multigrid solves,\n"
               "operator spectra and parameter sweeps on implicitly defined 2D domains."};
  app.require_subcommand(1);

  std::string config_path;
  RunOptions opt;
  int depth = -1, gauss_order = -1, maxit = -1;
  double tol = -1.0;
  std::string solver;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "case file (TOML); defaults apply without it");
    cmd->add_option("-o,--out", opt.out_prefix, "artifact path prefix")->capture_default_str();
    cmd->add_option("--depth", depth, "override quadrature.depth");
    cmd->add_option("--gauss-order", gauss_order, "override quadrature.gauss_order");
    cmd->add_option("--tol", tol, "override solver.tol");
    cmd->add_option("--maxit", maxit, "override solver.maxit");
    cmd->add_option("--solver", solver, "override solver.type (pcg | richardson)");
  };

  CLI::App* qc = app.add_subcommand("quadrature-check",
                                    "integrate area and boundary length of the trimmed domain");
  CLI::App* solve = app.add_subcommand("solve", "assemble and solve the configured case");
  CLI::App* spectrum =
      app.add_subcommand("spectrum", "dense spectrum of a preconditioned operator");
  CLI::App* sweep = app.add_subcommand("sweep", "repeat the case across an axis of values");
  CLI::App* print =
      app.add_subcommand("print-config", "echo the configuration with every default explicit");
  for (CLI::App* cmd : {qc, solve, spectrum, sweep, print}) add_common(cmd);

  solve->add_option("--samples", opt.samples, "field sample points per axis")
      ->capture_default_str();
  spectrum
      ->add_option("--op", opt.spectrum_op,
                   "operator composition: jacobi | gs2 | as2 | ms2 | vcycle")
      ->capture_default_str();
  spectrum->add_option("--mode", opt.mode, "also sample eigenvector MODE (ascending index)");
  spectrum->add_option("--samples", opt.samples, "field sample points per axis")
      ->capture_default_str();
  sweep->add_option("--axis", opt.axis, "sweep axis: grid | levels | depth | eta")->required();
  sweep->add_option("--values", opt.values, "axis values")->required()->delimiter(',');
  sweep->add_option("--jobs", opt.jobs, "concurrent sweep points")->capture_default_str();
  sweep->add_flag("--spectrum", opt.sweep_spectrum,
                  "record the preconditioned spectrum at every point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad command line = configuration error
  }

  try {
    CaseConfig cfg = config_path.empty() ? CaseConfig{} : load_case_config(config_path);
    if (depth >= 0) cfg.quadrature.depth = depth;
    if (gauss_order >= 0) cfg.quadrature.gauss_order = gauss_order;
    if (tol >= 0) cfg.solver.tol = tol;
    if (maxit >= 0) cfg.solver.maxit = maxit;
    if (!solver.empty()) cfg.solver.type = solver;
    validate(cfg);
    opt.subcommand = app.get_subcommands().front()->get_name();
    return run_case(cfg, opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
}
