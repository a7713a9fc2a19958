#include "fxtnes/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "fxtnes/systems.hpp"

namespace fxtnes {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Named {
  ExperimentKind kind;
  const char* name;
};

constexpr Named kKinds[] = {
    {ExperimentKind::CheckGame, "check-game"},
    {ExperimentKind::Simulate, "simulate"},
    {ExperimentKind::Reduced, "reduced"},
    {ExperimentKind::Average, "average"},
    {ExperimentKind::BoundaryLayer, "boundary-layer"},
    {ExperimentKind::Baseline, "baseline"},
    {ExperimentKind::Compare, "compare"},
    {ExperimentKind::Reachable, "reachable"},
    {ExperimentKind::ProbeCheck, "probe-check"},
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Vector vector_field(const json& v, std::size_t n, const char* what) {
  if (v.is_number()) return Vector::Constant(static_cast<Eigen::Index>(n), v.get<double>());
  if (!v.is_array() || v.size() != n)
    throw ConfigError(std::string(what) + " must be a number or a list of " +
                      std::to_string(n) + " numbers");
  Vector out(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  return out;
}

Matrix matrix_field(const json& v, std::size_t n, const char* what) {
  if (!v.is_array() || v.size() != n)
    throw ConfigError(std::string(what) + " must be an " + std::to_string(n) +
                      "x" + std::to_string(n) + " matrix");
  const auto nn = static_cast<Eigen::Index>(n);
  Matrix out(nn, nn);
  for (std::size_t r = 0; r < n; ++r) {
    out.row(static_cast<Eigen::Index>(r)) = vector_field(v[r], n, what).transpose();
  }
  return out;
}

Rational frequency_field(const json& v) {
  if (v.is_string()) return Rational::parse(v.get<std::string>());
  if (v.is_number_integer()) return Rational::make(v.get<std::int64_t>());
  if (v.is_number()) {
    std::ostringstream s;
    s << std::setprecision(15) << v.get<double>();
    return Rational::parse(s.str());
  }
  throw ConfigError("probe frequencies must be numbers or \"p/q\" strings");
}

GridAxis axis_field(const json& v) {
  GridAxis a;
  a.min = v.at("min").get<double>();
  a.max = v.at("max").get<double>();
  a.count = v.at("count").get<std::size_t>();
  if (a.count == 0 || !(a.max >= a.min)) throw ConfigError("grid axis needs min <= max and count >= 1");
  return a;
}

std::string fmt17(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::string fmt_vec(const Vector& v) {
  std::ostringstream s;
  s << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) s << (i ? "," : "") << std::setprecision(10) << v(i);
  s << ']';
  return s.str();
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

ExperimentKind parse_experiment_kind(std::string_view name) {
  for (const auto& k : kKinds)
    if (name == k.name) return k.kind;
  throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

const char* to_string(ExperimentKind kind) {
  for (const auto& k : kKinds)
    if (kind == k.kind) return k.name;
  return "unknown";
}

CommGraph ExperimentConfig::graph() const {
  if (edges) return CommGraph::from_one_based(game.players(), *edges);
  return CommGraph::complete(game.players());
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty segment");
    if (dot == std::string::npos) {
      if (value.is_null())
        node->erase(part);
      else
        (*node)[part] = value;
      return;
    }
    if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

ExperimentConfig parse_config(const json& doc, const fs::path& base_dir) {
  try {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    const json& g = doc.at("game");
    QuadraticGame game = g.is_string() ? load_game(base_dir / g.get<std::string>())
                                       : game_from_json(g);
    ExperimentConfig cfg(std::move(game));
    const std::size_t n = cfg.game.players();
    const auto nn = static_cast<Eigen::Index>(n);

    if (doc.contains("graph")) {
      if (!doc["graph"].is_object() || !doc["graph"].contains("edges") ||
          !doc["graph"]["edges"].is_array())
        throw ConfigError("graph must be an object with an \"edges\" list");
      std::vector<CommGraph::Edge> edges;
      for (const auto& e : doc["graph"]["edges"]) {
        if (!e.is_array() || e.size() != 2) throw ConfigError("graph edges are pairs of vertex labels");
        edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
      }
      cfg.edges = std::move(edges);
    }

    cfg.params = FxtnesParams::defaults(n);
    const json p = doc.value("params", json::object());
    if (p.contains("k")) cfg.gain = p["k"].get<double>();
    if (p.contains("T_star")) cfg.T_star = p["T_star"].get<double>();
    if (cfg.gain.has_value() == cfg.T_star.has_value())
      throw ConfigError("params must give exactly one of k and T_star");
    if (p.contains("kappa")) cfg.kappa_override = p["kappa"].get<double>();
    cfg.params.q1 = p.value("q1", cfg.params.q1);
    cfg.params.q2 = p.value("q2", cfg.params.q2);
    if (p.contains("a")) cfg.params.a = vector_field(p["a"], n, "params.a");
    cfg.params.eps1 = p.value("eps1", cfg.params.eps1);
    cfg.params.eps2 = p.value("eps2", cfg.params.eps2);
    if (p.contains("kappa_tilde")) {
      const auto& kt = p["kappa_tilde"];
      if (!kt.is_array()) throw ConfigError("params.kappa_tilde must be a list");
      cfg.params.kappa_tilde.clear();
      for (const auto& f : kt) cfg.params.kappa_tilde.push_back(frequency_field(f));
    }
    if (p.contains("rho2")) cfg.params.rho2 = vector_field(p["rho2"], n, "params.rho2");
    cfg.params.sing_tol = p.value("sing_tol", cfg.params.sing_tol);
    if (cfg.gain) cfg.params.k = *cfg.gain;

    const json integ = doc.value("integrator", json::object());
    if (integ.contains("step")) cfg.step = integ["step"].get<double>();
    cfg.t_end = integ.value("t_end", cfg.t_end);
    if (integ.contains("record_stride")) cfg.record_stride = integ["record_stride"].get<std::size_t>();
    cfg.samples = integ.value("samples", cfg.samples);

    const json init = doc.value("initial", json::object());
    cfg.u_hat0 = init.contains("u_hat") ? vector_field(init["u_hat"], n, "initial.u_hat")
                                        : Vector::Zero(nn);
    cfg.x0 = init.contains("x") ? matrix_field(init["x"], n, "initial.x") : Matrix::Zero(nn, nn);
    cfg.phase0 = init.contains("phase") ? vector_field(init["phase"], n, "initial.phase")
                                        : Vector::Zero(nn);

    if (doc.contains("grid")) {
      const auto& grid = doc["grid"];
      if (grid.is_array()) {
        if (grid.size() != n) throw ConfigError("grid needs one axis per player");
        for (const auto& a : grid) cfg.grid.push_back(axis_field(a));
      } else {
        cfg.grid.assign(n, axis_field(grid));
      }
    }
    cfg.reachable_system = doc.value("reachable_system", cfg.reachable_system);
    if (cfg.reachable_system != "reduced" && cfg.reachable_system != "full")
      throw ConfigError("reachable_system must be reduced or full");
    cfg.nu = doc.value("nu", cfg.nu);
    if (!(cfg.nu > 0.0)) throw ConfigError("nu must be positive");

    const json bl = doc.value("boundary_layer", json::object());
    cfg.u_frozen = bl.contains("u_frozen") ? vector_field(bl["u_frozen"], n, "boundary_layer.u_frozen")
                                           : Vector::Zero(nn);
    cfg.tau_end = bl.value("tau_end", cfg.tau_end);
    cfg.probe_points = doc.value("probe_check", json::object()).value("points", cfg.probe_points);
    if (doc.contains("output_dir")) cfg.output_dir = doc["output_dir"].get<std::string>();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

ExperimentConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc, path.parent_path());
}

ResolvedBounds resolve_bounds(const ExperimentConfig& cfg) {
  ResolvedBounds r;
  const AffineField field = seeking_field(cfg.game);
  const GameClassification cls = classify(field);
  if (cls.pl_modulus) {
    r.regime = BoundRegime::Potential;
    r.derived_kappa = *cls.pl_modulus;
  } else {
    r.regime = BoundRegime::Monotone;
    r.derived_kappa = cls.monotonicity_modulus;
  }
  r.kappa = cfg.kappa_override.value_or(r.derived_kappa);
  if (!(r.kappa > 0.0))
    throw InadmissibleParameters(
        "the field the players descend is not strongly monotone (modulus " +
        fmt17(r.derived_kappa) + "); check the game's sense or pass params.kappa");
  const Exponents ex = cfg.params.exponents();
  double k = cfg.params.k;
  if (cfg.T_star) {
    k = r.regime == BoundRegime::Potential ? gain_for_time_potential(*cfg.T_star, r.kappa, ex)
                                           : gain_for_time_monotone(*cfg.T_star, r.kappa, ex);
  }
  r.report = fixed_time_report(r.regime, k, r.kappa, ex);
  return r;
}

double default_step(ExperimentKind kind, const ExperimentConfig& cfg) {
  const auto& p = cfg.params;
  switch (kind) {
    case ExperimentKind::Simulate:
    case ExperimentKind::Baseline:
    case ExperimentKind::Compare:
      return p.eps2 / (50.0 * p.max_frequency());
    case ExperimentKind::Reachable:
      return cfg.reachable_system == "full" ? p.eps2 / (50.0 * p.max_frequency())
                                            : std::min(p.eps1 / 20.0, 1e-3);
    case ExperimentKind::BoundaryLayer:
      return 1e-3;
    default:
      return std::min(p.eps1 / 20.0, 1e-3);
  }
}

void write_trajectory_csv(const fs::path& path, const Trajectory& traj,
                          std::size_t players, const Vector& u_star,
                          const AffineField& field, const std::string& comment) {
  auto out = open_output(path);
  out << "# " << comment << '\n' << 't';
  for (std::size_t i = 1; i <= players; ++i) out << ",u_" << i;
  for (std::size_t i = 1; i <= players; ++i) out << ",uhat_" << i;
  out << ",dist_to_eq,V\n";
  out << std::setprecision(17);
  const auto n = static_cast<Eigen::Index>(players);
  for (std::size_t s = 0; s < traj.size(); ++s) {
    const Vector& u = traj.actions[s];
    const Vector u_hat = traj.states[s].y.head(n);
    out << traj.times[s];
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << u(i);
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << u_hat(i);
    out << ',' << (u - u_star).norm() << ',' << monotone_lyapunov(field, u_hat) << '\n';
  }
}

void write_envelope_csv(const fs::path& path, const Envelope& env,
                        const std::string& comment) {
  auto out = open_output(path);
  const Eigen::Index n = env.lower.empty() ? 0 : env.lower.front().size();
  out << "# " << comment << '\n' << 't';
  for (Eigen::Index i = 1; i <= n; ++i) out << ",min_u_" << i;
  for (Eigen::Index i = 1; i <= n; ++i) out << ",max_u_" << i;
  out << ",min_dist,max_dist\n" << std::setprecision(17);
  for (std::size_t s = 0; s < env.times.size(); ++s) {
    out << env.times[s];
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << env.lower[s](i);
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << env.upper[s](i);
    out << ',' << env.dist_lower[s] << ',' << env.dist_upper[s] << '\n';
  }
}

namespace {

struct Context {
  Context(ExperimentKind k, const ExperimentConfig& c, std::ostream& l, AffineField f,
          Vector star, Matrix lp)
      : kind(k), cfg(c), log(l), params(c.params), field(std::move(f)),
        u_star(std::move(star)), lap(std::move(lp)) {}

  ExperimentKind kind;
  const ExperimentConfig& cfg;
  std::ostream& log;
  FxtnesParams params;  // k resolved
  ResolvedBounds bounds;
  AffineField field;
  Vector u_star;
  Matrix lap;
  double step = 0.0;
  std::vector<std::string> summary;

  std::string comment(const char* law) const {
    std::ostringstream s;
    const Exponents ex = params.exponents();
    s << "experiment=" << to_string(kind) << " law=" << law << " k=" << fmt17(params.k)
      << " q1=" << params.q1 << " q2=" << params.q2 << " alpha1=" << fmt17(ex.alpha1)
      << " alpha2=" << fmt17(ex.alpha2) << " eps1=" << params.eps1 << " eps2=" << params.eps2
      << " a=" << fmt_vec(params.a) << " kappa_tilde=[";
    for (std::size_t i = 0; i < params.kappa_tilde.size(); ++i)
      s << (i ? "," : "") << params.kappa_tilde[i].str();
    s << "] rho2=" << fmt_vec(params.rho2) << " sing_tol=" << params.sing_tol
      << " kappa=" << fmt17(bounds.kappa) << " regime=" << to_string(bounds.regime)
      << " T_star=" << fmt17(bounds.report.T_star) << " step=" << fmt17(step)
      << " sense=" << (cfg.game.sense() == Sense::Minimize ? "minimize" : "maximize");
    return s.str();
  }

  void note(const std::string& key, const std::string& value) {
    summary.push_back(key + ": " + value);
    log << key << ": " << value << '\n';
  }

  IntegratorConfig integrator(double horizon) const {
    IntegratorConfig ic;
    ic.step = step;
    ic.t_end = horizon;
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
    ic.record_stride = cfg.record_stride.value_or(std::max<std::size_t>(1, steps / std::max<std::size_t>(cfg.samples, 1)));
    return ic;
  }

  void write_summary() const {
    auto out = open_output(cfg.output_dir / "summary.txt");
    for (const auto& line : summary) out << line << '\n';
  }
};

void check_full_step(const Context& c) {
  const auto& p = c.params;
  const double limit = std::min(p.eps1 / 20.0, p.eps2 / (20.0 * p.max_frequency()));
  if (c.step > limit * (1.0 + 1e-12))
    throw InadmissibleParameters("integrator step " + fmt17(c.step) +
                                 " does not resolve the probes and estimator; need step <= " +
                                 fmt17(limit));
}

void check_slow_step(const Context& c) {
  const double limit = std::min(c.params.eps1 / 20.0, 0.01);
  if (c.step > limit * (1.0 + 1e-12))
    throw InadmissibleParameters("integrator step " + fmt17(c.step) + " exceeds " + fmt17(limit));
}

std::string settling_text(const std::optional<double>& s) {
  return s ? fmt17(*s) : std::string("not settled");
}

Trajectory run_seeking(Context& c, SeekingLaw law, const Vector& u_hat0) {
  auto oracle = std::make_shared<QuadraticCostOracle>(c.cfg.game);
  const Flow flow = make_seeking_flow(oracle, c.lap, c.params, law);
  SystemState s{u_hat0, c.cfg.x0, c.cfg.phase0};
  return simulate(flow, pack(s), c.integrator(c.cfg.t_end));
}

void report_seeking(Context& c, const Trajectory& traj, const std::string& prefix) {
  const auto n = static_cast<Eigen::Index>(c.cfg.game.players());
  double max_x = 0.0;
  for (const auto& s : traj.states) max_x = std::max(max_x, s.y.tail(n * n).norm());
  c.note(prefix + "settling_time", settling_text(settling_time(traj, c.u_star, c.cfg.nu)));
  c.note(prefix + "final_distance", fmt17((traj.actions.back() - c.u_star).norm()));
  c.note(prefix + "max_estimator_norm", fmt17(max_x));
}

void do_check_game(Context& c) {
  const auto& game = c.cfg.game;
  const GameClassification raw = classify(game);
  c.note("players", std::to_string(game.players()));
  c.note("sense", game.sense() == Sense::Minimize ? "minimize" : "maximize");
  c.note("nash_equilibrium", fmt_vec(c.u_star));
  c.note("residual", fmt17(pseudo_gradient(game, c.u_star).norm()));
  c.note("classification", to_string(raw.kind));
  c.note("monotonicity_modulus", fmt17(raw.monotonicity_modulus));
  c.note("reversed_modulus", fmt17(raw.reversed_modulus));
  if (raw.pl_modulus) c.note("pl_modulus", fmt17(*raw.pl_modulus));
  c.note("seeking_modulus", fmt17(c.bounds.derived_kappa));
  Eigen::EigenSolver<Matrix> es(c.field.M, false);
  Vector re = es.eigenvalues().real();
  std::sort(re.data(), re.data() + re.size());
  c.note("seeking_jacobian_eigenvalues_real", fmt_vec(re));
  c.note("bound_regime", to_string(c.bounds.regime));
  c.note("k", fmt17(c.params.k));
  const Exponents ex = c.params.exponents();
  const double derived_T = c.bounds.regime == BoundRegime::Potential
                               ? fixed_time_potential(c.params.k, c.bounds.derived_kappa, ex)
                               : fixed_time_monotone(c.params.k, c.bounds.derived_kappa, ex);
  c.note("T_star_derived_kappa", fmt17(derived_T));
  if (c.cfg.kappa_override) {
    c.note("kappa_override", fmt17(*c.cfg.kappa_override));
    c.note("T_star_override_kappa", fmt17(c.bounds.report.T_star));
  }
}

void do_probe_check(Context& c) {
  const ProbeAverageResult r = probe_average_check(c.cfg.params.kappa_tilde, c.cfg.probe_points);
  c.note("common_period", r.period.str());
  c.note("quadrature_points", std::to_string(c.cfg.probe_points));
  c.note("mean_deviation", fmt17(r.mean_deviation));
  c.note("second_moment_deviation", fmt17(r.second_moment_deviation));
}

void do_boundary_layer(Context& c) {
  const std::size_t n = c.cfg.game.players();
  const auto nn = static_cast<Eigen::Index>(n);
  const Flow flow = make_boundary_layer_flow(c.field, c.lap, c.cfg.u_frozen);
  const Trajectory traj = simulate(flow, {stack_rows(c.cfg.x0), Vector()}, c.integrator(c.cfg.tau_end));
  const Matrix x_star = boundary_layer_equilibrium(c.field, c.cfg.u_frozen);
  const Vector x_star_flat = stack_rows(x_star);

  auto out = open_output(c.cfg.output_dir / "boundary_layer.csv");
  out << "# " << c.comment("boundary-layer") << '\n' << "tau";
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= n; ++j) out << ",x_" << i << '_' << j;
  out << ",dist_to_eq\n" << std::setprecision(17);
  for (std::size_t s = 0; s < traj.size(); ++s) {
    out << traj.times[s];
    for (Eigen::Index i = 0; i < nn * nn; ++i) out << ',' << traj.states[s].y(i);
    out << ',' << (traj.states[s].y - x_star_flat).norm() << '\n';
  }
  const double gap = (traj.states.back().y - x_star_flat).norm();
  const double g2 = c.field(c.cfg.u_frozen).squaredNorm();
  double row_err = 0.0;
  for (Eigen::Index i = 0; i < nn; ++i)
    row_err = std::max(row_err, std::abs(x_star.row(i).squaredNorm() - g2));
  const Vector spectrum = estimator_coupling_spectrum(c.lap);
  c.note("tau_end", fmt17(c.cfg.tau_end));
  c.note("final_distance", fmt17(gap));
  c.note("row_norm_identity_error", fmt17(row_err));
  c.note("slowest_rate", fmt17(spectrum(0)));
}

void do_reduced_like(Context& c) {
  const std::size_t n = c.cfg.game.players();
  const auto nn = static_cast<Eigen::Index>(n);
  Flow flow;
  FlowState init;
  if (c.kind == ExperimentKind::Reduced) {
    flow = make_reduced_flow(c.field, c.params);
    init = {c.cfg.u_hat0, Vector()};
  } else {
    flow = make_average_flow(c.field, c.lap, c.params);
    init = {Vector(nn + nn * nn), Vector()};
    init.y.head(nn) = c.cfg.u_hat0;
    init.y.tail(nn * nn) = stack_rows(c.cfg.x0);
  }
  const Trajectory traj = simulate(flow, init, c.integrator(c.cfg.t_end));
  const char* name = c.kind == ExperimentKind::Reduced ? "reduced" : "average";
  write_trajectory_csv(c.cfg.output_dir / "trajectory.csv", traj, n, c.u_star, c.field,
                       c.comment(name));
  c.note("settling_time", settling_text(settling_time(traj, c.u_star, c.cfg.nu)));
  c.note("final_distance", fmt17((traj.actions.back() - c.u_star).norm()));
  if (c.kind == ExperimentKind::Reduced && c.bounds.regime == BoundRegime::Monotone) {
    // A fixed step chatters around z* once |F|^alpha1 ~ k h |M|; samples
    // below that level say nothing about the continuous-time decrease.
    const Exponents ex = c.params.exponents();
    LyapunovTolerance tol;
    const double chatter = std::pow(c.params.k * c.step * c.field.M.norm(), 1.0 / ex.alpha1);
    tol.min_value = std::max(tol.min_value, 100.0 * 0.5 * chatter * chatter);
    const auto mon = lyapunov_monotone_monitor(traj, c.field, c.params.k, c.bounds.kappa, ex, tol);
    c.note("lyapunov_violations", std::to_string(mon.violations) + "/" + std::to_string(mon.checked));
  }
}

std::vector<Vector> grid_points(const ExperimentConfig& cfg) {
  const std::size_t n = cfg.game.players();
  if (cfg.grid.size() != n) throw ConfigError("reachable needs a grid");
  std::vector<Vector> pts{Vector(static_cast<Eigen::Index>(n))};
  for (std::size_t d = 0; d < n; ++d) {
    const auto& ax = cfg.grid[d];
    std::vector<Vector> next;
    for (const auto& p : pts) {
      for (std::size_t i = 0; i < ax.count; ++i) {
        Vector q = p;
        q(static_cast<Eigen::Index>(d)) =
            ax.count == 1 ? 0.5 * (ax.min + ax.max)
                          : ax.min + (ax.max - ax.min) * static_cast<double>(i) /
                                         static_cast<double>(ax.count - 1);
        next.push_back(q);
      }
    }
    pts = std::move(next);
  }
  return pts;
}

void do_reachable(Context& c) {
  const std::vector<Vector> pts = grid_points(c.cfg);
  const bool full = c.cfg.reachable_system == "full";
  auto oracle = std::make_shared<QuadraticCostOracle>(c.cfg.game);
  const IntegratorConfig ic = c.integrator(c.cfg.t_end);

  auto batch = [&](bool fixed_time) {
    Flow flow;
    if (full)
      flow = make_seeking_flow(oracle, c.lap, c.params,
                               fixed_time ? SeekingLaw::FixedTime : SeekingLaw::Gradient);
    else
      flow = fixed_time ? make_reduced_flow(c.field, c.params)
                        : make_reduced_baseline_flow(c.field, c.params.k);
    return simulate_batch(pts.size(), [&](std::size_t i) {
      FlowState init = full ? pack(SystemState{pts[i], c.cfg.x0, c.cfg.phase0})
                            : FlowState{pts[i], Vector()};
      return simulate(flow, init, ic);
    });
  };
  const auto fxt = batch(true);
  const auto base = batch(false);
  const Envelope ef = reachable_envelope(fxt, c.u_star);
  const Envelope eb = reachable_envelope(base, c.u_star);
  write_envelope_csv(c.cfg.output_dir / "envelope_fxtnes.csv", ef, c.comment("fixed-time"));
  write_envelope_csv(c.cfg.output_dir / "envelope_baseline.csv", eb, c.comment("gradient"));

  auto band_time = [&](const Envelope& e) -> std::optional<double> {
    for (std::size_t s = e.times.size(); s-- > 0;)
      if (e.dist_upper[s] > c.cfg.nu)
        return s + 1 == e.times.size() ? std::nullopt : std::optional(e.times[s + 1]);
    return e.times.front();
  };
  c.note("initial_conditions", std::to_string(pts.size()));
  c.note("system", c.cfg.reachable_system);
  c.note("fxtnes_envelope_settling_time", settling_text(band_time(ef)));
  c.note("baseline_envelope_settling_time", settling_text(band_time(eb)));
  c.note("T_star", fmt17(c.bounds.report.T_star));
}

int dispatch(Context& c) {
  switch (c.kind) {
    case ExperimentKind::CheckGame:
      do_check_game(c);
      break;
    case ExperimentKind::ProbeCheck:
      do_probe_check(c);
      break;
    case ExperimentKind::BoundaryLayer:
      check_slow_step(c);
      do_boundary_layer(c);
      break;
    case ExperimentKind::Reduced:
    case ExperimentKind::Average:
      check_slow_step(c);
      do_reduced_like(c);
      break;
    case ExperimentKind::Simulate:
    case ExperimentKind::Baseline: {
      check_full_step(c);
      const bool fxt = c.kind == ExperimentKind::Simulate;
      const Trajectory traj =
          run_seeking(c, fxt ? SeekingLaw::FixedTime : SeekingLaw::Gradient, c.cfg.u_hat0);
      write_trajectory_csv(c.cfg.output_dir / "trajectory.csv", traj, c.cfg.game.players(),
                           c.u_star, c.field, c.comment(fxt ? "fixed-time" : "gradient"));
      report_seeking(c, traj, "");
      c.note("T_star", fmt17(c.bounds.report.T_star));
      break;
    }
    case ExperimentKind::Compare: {
      check_full_step(c);
      const Trajectory fxt = run_seeking(c, SeekingLaw::FixedTime, c.cfg.u_hat0);
      const Trajectory base = run_seeking(c, SeekingLaw::Gradient, c.cfg.u_hat0);
      write_trajectory_csv(c.cfg.output_dir / "fxtnes.csv", fxt, c.cfg.game.players(), c.u_star,
                           c.field, c.comment("fixed-time"));
      write_trajectory_csv(c.cfg.output_dir / "baseline.csv", base, c.cfg.game.players(),
                           c.u_star, c.field, c.comment("gradient"));
      report_seeking(c, fxt, "fxtnes_");
      report_seeking(c, base, "baseline_");
      c.note("T_star", fmt17(c.bounds.report.T_star));
      break;
    }
    case ExperimentKind::Reachable:
      if (c.cfg.reachable_system == "full") check_full_step(c);
      else check_slow_step(c);
      do_reachable(c);
      break;
  }
  c.write_summary();
  return kExitOk;
}

}  // namespace

int run_experiment(ExperimentKind kind, const ExperimentConfig& cfg, std::ostream& log) {
  try {
    if (kind == ExperimentKind::ProbeCheck) {
      check_probe_frequencies(cfg.params.kappa_tilde);
      Context c(kind, cfg, log, seeking_field(cfg.game), Vector(), Matrix());
      return dispatch(c);
    }
    const CommGraph graph = cfg.graph();
    require_connected(graph);
    Context c(kind, cfg, log, seeking_field(cfg.game), nash_equilibrium(cfg.game),
              laplacian(graph));
    c.bounds = resolve_bounds(cfg);
    c.params.k = c.bounds.report.k;
    if (kind != ExperimentKind::CheckGame) c.params.validate();
    c.step = cfg.step.value_or(default_step(kind, cfg));
    return dispatch(c);
  } catch (const IntegrationError& e) {
    log << "error: integration aborted at t = " << e.time() << ": " << e.what() << '\n';
    return kExitIntegrator;
  } catch (const InadmissibleParameters& e) {
    log << "error: " << e.what() << '\n';
    return kExitAssumption;
  } catch (const FrequencyAssumptionViolation& e) {
    log << "error: probe frequencies: " << e.what() << '\n';
    return kExitAssumption;
  } catch (const GraphAssumptionViolation& e) {
    log << "error: " << e.what() << '\n';
    return kExitAssumption;
  } catch (const NoUniqueEquilibrium& e) {
    log << "error: " << e.what() << '\n';
    return kExitAssumption;
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int run_command(std::string_view kind_name, const fs::path& config_path,
                const std::optional<fs::path>& out_dir,
                const std::vector<std::string>& overrides, std::ostream& log) {
  try {
    const ExperimentKind kind = parse_experiment_kind(kind_name);
    ExperimentConfig cfg = load_config(config_path, overrides);
    if (out_dir) cfg.output_dir = *out_dir;
    return run_experiment(kind, cfg, log);
  } catch (const FrequencyAssumptionViolation& e) {
    log << "error: probe frequencies: " << e.what() << '\n';
    return kExitAssumption;
  } catch (const GraphAssumptionViolation& e) {
    log << "error: " << e.what() << '\n';
    return kExitAssumption;
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace fxtnes
