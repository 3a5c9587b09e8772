#include <iostream>

#include "CLI11.hpp"
#include "gibbskit/cli.hpp"

int main(int argc, char** argv) {
  using gibbskit::cli::RunConfig;
  RunConfig cfg;
  CLI::App app{"Gibbs-state toolkit for one-dimensional lattice models"};
  app.allow_extras(false);

  std::optional<gibbskit::Site> n_max;
  std::optional<double> tol;
  std::optional<std::uint64_t> sweeps;

  app.add_option("command", cfg.command, "Subcommand to run")
      ->required()
      ->check(CLI::IsMember(gibbskit::cli::commands()));
  app.add_option("--model", cfg.model_path, "Model file (JSON)")->required();
  app.add_option("--potential", cfg.potential, "Potential name (default: first in the model)");
  app.add_option("--spec", cfg.spec, "Specification name");
  app.add_option("--measure", cfg.measure, "Measure name");
  app.add_option("--tau", cfg.taus, "Test measure name; repeatable");
  app.add_option("--n-max", n_max, "Largest cylinder length or volume size");
  app.add_option("--tol", tol, "Pass/fail tolerance of the command");
  app.add_option("--seed", cfg.seed, "Random seed");
  app.add_option("--budget", cfg.budget, "Maximum number of patterns to enumerate");
  app.add_option("--pad", cfg.pad, "Padding around the DLR window");
  app.add_option("--out", cfg.out, "Write the report to this file");
  app.add_option("--p-offset", cfg.p_offset, "Added to the pressure in the bowen command");
  app.add_option("--window", cfg.window, "Window as lo:hi");
  app.add_option("--radius", cfg.radius, "Overlay radius for the roundtrip command");
  app.add_option("--trials", cfg.trials, "Random triples for the cocycle command");
  app.add_option("--sweeps", sweeps, "Recorded sweeps after burn-in");
  app.add_option("--burn-in", cfg.burn_in, "Burn-in sweeps");
  app.add_option("--thin", cfg.thin, "Sweeps between samples (0: volume length)");
  app.add_option("--samples-out", cfg.samples_out, "Write every recorded sample to this CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cout << gibbskit::cli::error_json("InvalidArgument", e.what()).dump() << '\n';
    return gibbskit::cli::kInputError;
  }
  cfg.n_max = n_max;
  cfg.tol = tol;
  cfg.sweeps = sweeps;
  return gibbskit::cli::run(cfg, std::cout);
}
