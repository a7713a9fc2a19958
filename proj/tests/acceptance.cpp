// Acceptance checks. One line per criterion; exit status is the number of
// failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fxtnes/analysis.hpp"
#include "fxtnes/dynamics.hpp"
#include "fxtnes/experiment.hpp"
#include "fxtnes/game.hpp"
#include "fxtnes/graph.hpp"
#include "fxtnes/integrator.hpp"
#include "fxtnes/systems.hpp"
#include "test_util.hpp"

using namespace fxtnes;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = elapsed <= budget_s;
  const bool pass = out.pass && in_time;
  if (!pass) ++failures;
  std::printf("criterion %2d: %s  %s | %s | %.2f s (budget %.0f s)%s\n", id, pass ? "PASS" : "FAIL",
              name, out.detail.c_str(), elapsed, budget_s, in_time ? "" : " over budget");
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

QuadraticGame fixture_game() { return load_game(FXTNES_FIXTURES "/three_player_quadratic.json"); }

struct SweepPoint {
  double distance = 0.0;
  std::size_t ray = 0;
  Vector z0;
};

// 10 random rays from u*, 10 log-uniform distances in [1, 1e3] on each.
std::vector<SweepPoint> sweep_points(const Vector& star) {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> expo(0.0, 3.0);
  std::vector<SweepPoint> pts;
  for (std::size_t r = 0; r < 10; ++r) {
    const Vector dir = testing::random_unit(rng, star.size());
    for (int s = 0; s < 10; ++s) {
      const double d = std::pow(10.0, expo(rng));
      pts.push_back({d, r, star + d * dir});
    }
  }
  return pts;
}

std::vector<std::optional<double>> sweep_settling(const Flow& flow, const std::vector<SweepPoint>& pts,
                                                  const Vector& star, double t_end) {
  const IntegratorConfig cfg{1e-3, t_end, 1};
  const auto batch = simulate_batch(pts.size(), [&](std::size_t i) {
    return simulate(flow, {pts[i].z0, Vector()}, cfg);
  });
  std::vector<std::optional<double>> out;
  for (const auto& t : batch) out.push_back(settling_time(t, star, 1e-3));
  return out;
}

}  // namespace

int main() {
  const auto game = fixture_game();
  const Vector star = nash_equilibrium(game);
  const AffineField field = seeking_field(game);
  const FxtnesParams params = FxtnesParams::defaults(3);
  const Exponents ex = params.exponents();
  const double kappa = seeking_modulus(game);
  const double t_derived = fixed_time_monotone(params.k, kappa, ex);
  const double t_override = fixed_time_monotone(params.k, 4.35, ex);

  criterion(1, "equilibrium reproduction", 1.0, [&] {
    const fs::path out = fs::temp_directory_path() / "fxtnes_acceptance_check_game";
    std::ostringstream log;
    const int code = run_command("check-game", FXTNES_FIXTURES "/quadratic_presets.json", out, {}, log);
    const Vector target = testing::vec({2.62, 5.73, 6.47});
    const double err = (star - target).cwiseAbs().maxCoeff();
    std::ostringstream d;
    d << "u* = [" << star.transpose() << "], max coordinate error " << err << ", exit " << code;
    return Outcome{code == kExitOk && err <= 1e-2, d.str()};
  });

  criterion(2, "modulus oracle agreement", 1.0, [&] {
    const double oracle = testing::power_iteration_min(symmetric_part(field.M));
    const double jac = classify(game).reversed_modulus;
    const double gap = std::abs(oracle - jac);
    return Outcome{gap <= 1e-8, fmt("jacobi %.15g", jac) + fmt(", power iteration %.15g", oracle) +
                                    fmt(", gap %.2e", gap) + " (4.35 is not a target)"};
  });

  const auto pts = sweep_points(star);
  std::vector<std::optional<double>> fxt_settle;

  criterion(3, "fixed-time property (reduced)", 30.0, [&] {
    fxt_settle = sweep_settling(make_reduced_flow(field, params), pts, star, 6.0);
    bool ok = true;
    double worst = 0.0, worst_small = 0.0;
    std::size_t small = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!fxt_settle[i] || *fxt_settle[i] > t_derived) ok = false;
      const double s = fxt_settle[i].value_or(INFINITY);
      worst = std::max(worst, s);
      if (pts[i].distance <= 10.0) {
        ++small;
        worst_small = std::max(worst_small, s);
        if (s > t_override) ok = false;
      }
    }
    return Outcome{ok, fmt("max settling %.4f", worst) + fmt(" <= T* %.6f", t_derived) +
                           fmt("; %.0f samples with d <= 10", static_cast<double>(small)) +
                           fmt(" max %.4f", worst_small) + fmt(" <= %.6f", t_override)};
  });

  criterion(4, "initial-condition contrast (baseline)", 30.0, [&] {
    const auto base = sweep_settling(make_reduced_baseline_flow(field, params.k), pts, star, 8.0);
    bool ok = true;
    std::size_t ray_breaks = 0, top = 0, global_inversions = 0;
    for (std::size_t r = 0; r < 10; ++r) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < pts.size(); ++i)
        if (pts[i].ray == r) idx.push_back(i);
      std::sort(idx.begin(), idx.end(),
                [&](auto a, auto b) { return pts[a].distance < pts[b].distance; });
      for (std::size_t j = 1; j < idx.size(); ++j)
        if (base[idx[j]].value_or(INFINITY) < base[idx[j - 1]].value_or(INFINITY)) ++ray_breaks;
    }
    std::vector<std::size_t> order(pts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](auto a, auto b) { return pts[a].distance < pts[b].distance; });
    for (std::size_t j = 1; j < order.size(); ++j)
      if (base[order[j]].value_or(INFINITY) < base[order[j - 1]].value_or(INFINITY)) ++global_inversions;
    double min_gap = INFINITY;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (pts[i].distance < 100.0) continue;
      ++top;
      const double gap = base[i].value_or(INFINITY) - fxt_settle[i].value_or(INFINITY);
      min_gap = std::min(min_gap, gap);
    }
    ok = ray_breaks == 0 && top > 0 && min_gap > 0.0;
    return Outcome{ok, fmt("%.0f decreases along rays", static_cast<double>(ray_breaks)) +
                           fmt("; %.0f samples with d >= 100", static_cast<double>(top)) +
                           fmt(", min(baseline - fixed-time) %.4f s", min_gap) +
                           fmt("; info: %.0f inversions when rays are pooled",
                               static_cast<double>(global_inversions))};
  });

  criterion(5, "probe averaging", 1.0, [&] {
    const std::vector<Rational> kt{Rational::make(2), Rational::make(3), Rational::make(5)};
    const auto r = probe_average_check(kt, 100000);
    return Outcome{r.mean_deviation <= 1e-6 && r.second_moment_deviation <= 1e-6,
                   fmt("mean %.2e", r.mean_deviation) + fmt(", second moment %.2e", r.second_moment_deviation)};
  });

  criterion(6, "boundary layer", 5.0, [&] {
    const Matrix l = laplacian(CommGraph::complete(3));
    const Vector u0 = Vector::Zero(3);
    const Matrix xs = boundary_layer_equilibrium(field, u0);
    const IntegratorConfig cfg{1e-3, 40.0, 1000};
    const auto traj = simulate(make_boundary_layer_flow(field, l, u0),
                               {Vector::Zero(9), Vector()}, cfg);
    const Matrix x_end = unstack_rows(traj.states.back().y, 3);
    const double dist = (x_end - xs).norm();
    const double entry = (x_end - xs).cwiseAbs().maxCoeff();
    double rows = 0.0;
    for (Eigen::Index i = 0; i < 3; ++i)
      rows = std::max(rows, std::abs(xs.row(i).squaredNorm() - field(u0).squaredNorm()));
    const double rate = estimator_coupling_spectrum(l)(0);
    return Outcome{dist <= 1e-3 && rows <= 1e-9,
                   fmt("|x(40) - x*| %.3e", dist) + " (target 1e-3)" + fmt(", max entry %.3e", entry) +
                       fmt(", row identity %.1e", rows) + fmt("; slowest rate %.4f", rate)};
  });

  criterion(7, "Lyapunov decrease", 10.0, [&] {
    const IntegratorConfig cfg{1e-5, 1.5, 10};
    const std::vector<Vector> starts{testing::vec({0, 0, 0}), testing::vec({-15, 15, -15}),
                                     testing::vec({40, -30, 10})};
    std::size_t v_mono = 0, c_mono = 0, v_pot = 0, c_pot = 0;
    for (const auto& z0 : starts) {
      const auto t = simulate(make_reduced_flow(field, params), {z0, Vector()}, cfg);
      const auto r = lyapunov_monotone_monitor(t, field, params.k, kappa, ex);
      v_mono += r.violations;
      c_mono += r.checked;
    }
    const auto pg = load_game(FXTNES_FIXTURES "/symmetric_potential.json");
    const auto pf = seeking_field(pg);
    const double pl = *classify(pf).pl_modulus;
    for (const auto& z0 : starts) {
      const auto t = simulate(make_reduced_flow(pf, params), {z0, Vector()}, cfg);
      const auto r = lyapunov_potential_monitor(t, pf, params.k, pl, ex);
      v_pot += r.violations;
      c_pot += r.checked;
    }
    return Outcome{v_mono == 0 && v_pot == 0 && c_mono > 0 && c_pot > 0,
                   fmt("monotone %.0f", static_cast<double>(v_mono)) +
                       fmt("/%.0f", static_cast<double>(c_mono)) +
                       fmt(", potential %.0f", static_cast<double>(v_pot)) +
                       fmt("/%.0f violations", static_cast<double>(c_pot))};
  });

  criterion(8, "full seeking run", 600.0, [&] {
    const Matrix l = laplacian(CommGraph::complete(3));
    auto costs = std::make_shared<QuadraticCostOracle>(game);
    const Flow flow = make_seeking_flow(costs, l, params);
    const IntegratorConfig cfg{4e-7, 6.0, 3000};
    std::vector<Monitor> mon{{"xnorm", [](double, const FlowState& s, const Vector&) {
                                return s.y.tail(9).cwiseAbs().maxCoeff();
                              }}};
    const auto traj = simulate(flow, pack(SystemState::zeros(3)), cfg, mon);
    double worst = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i)
      if (traj.times[i] >= 3.0 - 1e-12) worst = std::max(worst, (traj.actions[i] - star).norm());
    const auto& xn = traj.monitors.at("xnorm");
    const double xmax = *std::max_element(xn.begin(), xn.end());
    return Outcome{worst <= 0.5, fmt("max |u - u*| on [3, 6] %.4f", worst) + " (limit 0.5)" +
                                     fmt(", max |x_ij| %.3f", xmax) +
                                     fmt(", %.0f samples", static_cast<double>(traj.size()))};
  });

  criterion(9, "gain/time round trips", 1.0, [&] {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> logu(-2, 2), q1(2.01, 20), q2(1.01, 1.99);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double k = std::pow(10.0, logu(rng));
      const double kap = std::pow(10.0, logu(rng));
      const auto e = alphas(q1(rng), q2(rng));
      const double tp = fixed_time_potential(k, kap, e);
      const double ts = fixed_time_monotone(k, kap, e);
      worst = std::max({worst, std::abs(fixed_time_potential(gain_for_time_potential(tp, kap, e), kap, e) / tp - 1),
                        std::abs(fixed_time_monotone(gain_for_time_monotone(ts, kap, e), kap, e) / ts - 1),
                        std::abs(gain_for_time_potential(tp, kap, e) / k - 1),
                        std::abs(gain_for_time_monotone(ts, kap, e) / k - 1)});
    }
    return Outcome{worst <= 1e-12, fmt("max relative round-trip error %.2e", worst)};
  });

  criterion(10, "integrator order", 1.0, [&] {
    Flow f;
    f.rhs = [](double, const Vector& y, const Vector&, Vector& dy) { dy = -y; };
    const auto err = [&](double h) {
      const auto t = simulate(f, {Vector::Constant(1, 1.0), Vector()}, IntegratorConfig{h, 1.0, 1});
      return std::abs(t.states.back().y(0) - std::exp(-1.0));
    };
    const double ratio = err(0.1) / err(0.05);
    return Outcome{std::abs(ratio - 16.0) <= 1.0, fmt("error ratio %.4f", ratio)};
  });

  std::printf("%d criteria failed\n", failures);
  return failures;
}
