// gaussib command line: Gaussian information bottleneck rates, test-channel
// realizations, predictive-loop simulation, compound IB and privacy funnel.

#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gaussib/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Information bottleneck numerics for stationary Gaussian sources"};
  app.require_subcommand(1);

  gaussib::cli::RunConfig cfg;
  int grid_points = 0;

  auto add_model = [&](CLI::App* cmd) {
    cmd->add_option("--model", cfg.model_path, "source model JSON")->required();
    cmd->add_option("--grid-points", grid_points, "override the frequency grid size");
  };
  auto add_output = [&](CLI::App* cmd) {
    cmd->add_option("--output,-o", cfg.output_path, "output file (stdout when omitted)");
  };

  CLI::App* ib = app.add_subcommand("ib-rate", "water-filling IB rate at a bottleneck C");
  add_model(ib);
  add_output(ib);
  ib->add_option("--c", cfg.c, "bottleneck rate C in bits")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "rate curve R(C) over a list of C values (CSV)");
  add_model(sweep);
  add_output(sweep);
  sweep->add_option("--c-values", cfg.c_values, "ascending C values in bits")
      ->required()
      ->delimiter(',');

  CLI::App* filters = app.add_subcommand("filters", "forward-channel responses (CSV) and FIR taps");
  add_model(filters);
  add_output(filters);
  filters->add_option("--c", cfg.c, "bottleneck rate C in bits")->required();
  filters->add_option("--taps", cfg.taps, "FIR taps per filter (enables tap realization)");
  filters->add_option("--delay", cfg.delay, "FIR delay per causal leg");
  filters->add_option("--taps-output", cfg.taps_output, "taps JSON file (stdout when omitted)");

  CLI::App* audit = app.add_subcommand("audit", "spectral audit of the realized channel");
  add_model(audit);
  add_output(audit);
  audit->add_option("--c", cfg.c, "bottleneck rate C in bits")->required();

  CLI::App* simulate = app.add_subcommand("simulate", "predictive-loop Monte Carlo estimate");
  add_model(simulate);
  add_output(simulate);
  simulate->add_option("--c", cfg.c, "bottleneck rate C in bits")->required();
  simulate->add_option("--order,-L", cfg.order, "predictor order (default 64)");
  simulate->add_option("--length", cfg.length, "path length (default 2^20)");
  simulate->add_option("--seed", cfg.seed, "RNG seed (default 0)");
  simulate->add_option("--trace-csv", cfg.trace_csv, "dump the full loop trace (large)");

  CLI::App* comib = app.add_subcommand("comib", "compound IB closed form and saddle certificate");
  add_output(comib);
  comib->add_option("--c1", cfg.c1, "PF-side constraint C1 in bits")->required();
  comib->add_option("--c2", cfg.c2, "bottleneck constraint C2 in bits")->required();
  comib->add_option("--saddle-check", cfg.saddle_members, "two-band family size per side");
  comib->add_option("--grid-points", grid_points, "frequency grid size for the audit");

  CLI::App* pf = app.add_subcommand("pf", "relaxed vector Gaussian privacy funnel");
  add_output(pf);
  pf->add_option("--instance", cfg.model_path, "PF instance JSON")->required();
  pf->add_option("--c1", cfg.c1, "PF constraint C1 in bits")->required();
  pf->add_option("--restarts", cfg.restarts, "optimizer restarts (default 16)");
  pf->add_option("--seed", cfg.seed, "RNG seed (default 0)");

  CLI::App* szego = app.add_subcommand("szego", "Toeplitz MI convergence table (CSV)");
  add_model(szego);
  add_output(szego);
  szego->add_option("--sizes", cfg.sizes, "ascending block sizes")->required()->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  cfg.command = app.get_subcommands().front()->get_name();
  if (grid_points > 0) cfg.grid_points = grid_points;
  return gaussib::cli::run(cfg);
}
