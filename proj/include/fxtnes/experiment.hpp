#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fxtnes/analysis.hpp"
#include "fxtnes/dynamics.hpp"
#include "fxtnes/game.hpp"
#include "fxtnes/graph.hpp"
#include "fxtnes/integrator.hpp"

namespace fxtnes {

enum class ExperimentKind {
  CheckGame,
  Simulate,
  Reduced,
  Average,
  BoundaryLayer,
  Baseline,
  Compare,
  Reachable,
  ProbeCheck,
};

ExperimentKind parse_experiment_kind(std::string_view name);
const char* to_string(ExperimentKind kind);

/// Process exit status categories.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,       // unreadable or malformed configuration
  kExitAssumption = 3,   // admissibility, graph, frequency or equilibrium gate
  kExitIntegrator = 4,   // non-finite state during integration
};

struct GridAxis {
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 1;
};

struct ExperimentConfig {
  explicit ExperimentConfig(QuadraticGame g) : game(std::move(g)) {}

  QuadraticGame game;
  std::optional<std::vector<CommGraph::Edge>> edges;  // 1-based
  FxtnesParams params;
  std::optional<double> gain;      // k as given
  std::optional<double> T_star;    // prescribed time as given
  std::optional<double> kappa_override;
  std::optional<double> step;
  double t_end = 6.0;
  std::optional<std::size_t> record_stride;
  std::size_t samples = 5000;
  Vector u_hat0;
  Matrix x0;
  Vector phase0;
  std::vector<GridAxis> grid;
  std::string reachable_system = "reduced";
  double nu = 0.5;
  Vector u_frozen;
  double tau_end = 40.0;
  std::size_t probe_points = 100000;
  std::filesystem::path output_dir = "out";

  CommGraph graph() const;
};

/// Applies "dotted.path=value" to a config document. The value is parsed as
/// JSON when possible and taken as a string otherwise; null removes the key.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Builds a config; relative game paths resolve against base_dir.
ExperimentConfig parse_config(const nlohmann::json& doc,
                              const std::filesystem::path& base_dir);

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

/// Gain and bound actually used: k is taken as given or computed from the
/// prescribed time; kappa is the override or the modulus of the field the
/// players descend.
struct ResolvedBounds {
  BoundRegime regime = BoundRegime::Monotone;
  double kappa = 0.0;
  double derived_kappa = 0.0;
  FixedTimeReport report;
};

ResolvedBounds resolve_bounds(const ExperimentConfig& config);

/// Default integration step for the given experiment.
double default_step(ExperimentKind kind, const ExperimentConfig& config);

/// Full run: validates, integrates, writes CSV and summary files under
/// config.output_dir. Returns an ExitCode; diagnostics go to `log`.
int run_experiment(ExperimentKind kind, const ExperimentConfig& config,
                   std::ostream& log);

/// Loads, applies overrides and output dir, then runs. Errors map to exit
/// codes rather than escaping.
int run_command(std::string_view kind, const std::filesystem::path& config_path,
                const std::optional<std::filesystem::path>& out_dir,
                const std::vector<std::string>& overrides, std::ostream& log);

// CSV emitters. Every file starts with a '#' line carrying `comment`.
void write_trajectory_csv(const std::filesystem::path& path,
                          const Trajectory& traj, std::size_t players,
                          const Vector& u_star, const AffineField& field,
                          const std::string& comment);
void write_envelope_csv(const std::filesystem::path& path, const Envelope& env,
                        const std::string& comment);

}  // namespace fxtnes
