#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fxtnes/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Fixed-time Nash equilibrium seeking simulator"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::vector<std::string> overrides;

  const char* commands[][2] = {
      {"check-game", "Equilibrium, classification and fixed-time bounds of a game"},
      {"simulate", "Full model-free fixed-time seeking dynamics"},
      {"reduced", "Reduced fixed-time flow on the analytic pseudo-gradient"},
      {"average", "Nominal average system"},
      {"boundary-layer", "Estimator boundary layer with frozen actions"},
      {"baseline", "Full model-free gradient seeking dynamics"},
      {"compare", "Fixed-time and gradient seeking on a shared grid"},
      {"reachable", "Envelopes over a grid of initial actions"},
      {"probe-check", "Quadrature check of the probe averaging identities"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory (overrides output_dir)");
    sub->add_option("--override", overrides, "dotted.key=value config override")->take_all();
  }

  CLI11_PARSE(app, argc, argv);

  const auto* chosen = app.get_subcommands().front();
  std::optional<std::filesystem::path> out_dir;
  if (!out.empty()) out_dir = out;
  return fxtnes::run_command(chosen->get_name(), config, out_dir, overrides, std::cout);
}
