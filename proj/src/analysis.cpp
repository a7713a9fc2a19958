#include "fxtnes/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fxtnes/phase.hpp"

namespace fxtnes {

const char* to_string(BoundRegime regime) {
  return regime == BoundRegime::Potential ? "potential" : "monotone";
}

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string(what) + " must be positive");
}

void require_admissible(const Exponents& ex) {
  if (!(ex.alpha1 > 0.0 && ex.alpha1 < 1.0) || !(ex.alpha2 < 0.0))
    throw InadmissibleParameters(
        "exponents must satisfy alpha1 in (0,1) and alpha2 < 0");
}

double potential_bracket(double kappa, const Exponents& ex) {
  require_positive(kappa, "kappa");
  require_admissible(ex);
  const double g1 = std::pow(2.0, (8.0 - 3.0 * ex.alpha1) / 4.0) *
                    std::pow(kappa, (2.0 - ex.alpha1) / 2.0);
  const double g2 = std::pow(2.0, (8.0 - 3.0 * ex.alpha2) / 4.0) *
                    std::pow(kappa, (2.0 - ex.alpha2) / 2.0);
  return 1.0 / (g1 * ex.alpha1) - 1.0 / (g2 * ex.alpha2);
}

double monotone_bracket(const Exponents& ex) {
  require_admissible(ex);
  const double t1 = std::pow(2.0, -0.5 * ex.alpha1);
  const double t2 = std::pow(2.0, -0.5 * ex.alpha2);
  return t1 / ex.alpha1 - t2 / ex.alpha2;
}

}  // namespace

double fixed_time_potential(double k, double kappa, const Exponents& ex) {
  require_positive(k, "gain k");
  return 4.0 / k * potential_bracket(kappa, ex);
}

double gain_for_time_potential(double T_star, double kappa, const Exponents& ex) {
  require_positive(T_star, "prescribed time");
  return 4.0 / T_star * potential_bracket(kappa, ex);
}

double fixed_time_monotone(double k, double kappa, const Exponents& ex) {
  require_positive(k, "gain k");
  require_positive(kappa, "kappa");
  return 4.0 / (k * kappa) * monotone_bracket(ex);
}

double gain_for_time_monotone(double T_star, double kappa, const Exponents& ex) {
  require_positive(T_star, "prescribed time");
  require_positive(kappa, "kappa");
  return 4.0 / (T_star * kappa) * monotone_bracket(ex);
}

FixedTimeReport fixed_time_report(BoundRegime regime, double k, double kappa,
                                  const Exponents& ex) {
  FixedTimeReport r;
  r.regime = regime;
  r.k = k;
  r.kappa = kappa;
  r.alpha1 = ex.alpha1;
  r.alpha2 = ex.alpha2;
  r.gamma1 = std::pow(2.0, (8.0 - 3.0 * ex.alpha1) / 4.0) *
             std::pow(kappa, (2.0 - ex.alpha1) / 2.0);
  r.gamma2 = std::pow(2.0, (8.0 - 3.0 * ex.alpha2) / 4.0) *
             std::pow(kappa, (2.0 - ex.alpha2) / 2.0);
  r.theta1 = std::pow(2.0, -0.5 * ex.alpha1);
  r.theta2 = std::pow(2.0, -0.5 * ex.alpha2);
  r.T_star = regime == BoundRegime::Potential
                 ? fixed_time_potential(k, kappa, ex)
                 : fixed_time_monotone(k, kappa, ex);
  return r;
}

std::optional<double> settling_time(const Trajectory& traj, const Vector& u_star,
                                    double nu) {
  if (traj.empty()) throw std::invalid_argument("settling_time: empty trajectory");
  for (std::size_t i = traj.size(); i-- > 0;) {
    if ((traj.actions[i] - u_star).norm() > nu) {
      if (i + 1 == traj.size()) return std::nullopt;
      return traj.times[i + 1];
    }
  }
  return traj.times.front();
}

ProbeAverageResult probe_average_check(std::span<const Rational> kt,
                                       std::size_t points) {
  check_probe_frequencies(kt);
  if (points < 2) throw std::invalid_argument("need at least 2 quadrature points");
  const Rational period = common_probe_period(kt);
  const double T = period.value();
  const std::size_t n = kt.size();
  const auto nn = static_cast<Eigen::Index>(n);

  Vector mean = Vector::Zero(nn);
  Matrix second = Matrix::Zero(nn, nn);
  Vector mu(nn);
  const double h = T / static_cast<double>(points);
  for (std::size_t s = 0; s <= points; ++s) {
    const double t = static_cast<double>(s) * h;
    const double w = (s == 0 || s == points) ? 0.5 : 1.0;
    for (std::size_t i = 0; i < n; ++i)
      mu(static_cast<Eigen::Index>(i)) = std::cos(kTwoPi * kt[i].value() * t);
    mean += w * mu;
    second.noalias() += w * mu * mu.transpose();
  }
  mean *= h / T;
  second *= h / T;

  ProbeAverageResult out;
  out.period = period;
  out.mean_deviation = mean.cwiseAbs().maxCoeff();
  out.second_moment_deviation =
      (second - 0.5 * Matrix::Identity(nn, nn)).cwiseAbs().maxCoeff();
  return out;
}

double monotone_lyapunov(const AffineField& field, const Vector& z) {
  return 0.5 * field(z).squaredNorm();
}

double potential_lyapunov(const AffineField& field, const Vector& z) {
  const Vector z_star = affine_root(field);
  const double gap = potential_value(field, z) - potential_value(field, z_star);
  return 0.5 * gap * gap;
}

namespace {

template <typename ValueFn, typename BoundFn>
MonitorReport decrease_monitor(const Trajectory& traj, ValueFn value,
                               BoundFn bound, const LyapunovTolerance& tol) {
  MonitorReport report;
  report.min_ratio = INFINITY;
  if (traj.size() < 2) return report;
  double prev = value(traj.actions[0]);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const double cur = value(traj.actions[i]);
    const double dt = traj.times[i] - traj.times[i - 1];
    if (prev > tol.min_value && cur > tol.min_value) {
      const double rate = (cur - prev) / dt;
      const double required = -bound(cur);
      ++report.checked;
      report.min_ratio = std::min(report.min_ratio, rate / required);
      if (rate > required * (1.0 - tol.relative) + tol.absolute) ++report.violations;
    }
    prev = cur;
  }
  return report;
}

}  // namespace

MonitorReport lyapunov_monotone_monitor(const Trajectory& traj,
                                        const AffineField& field, double k,
                                        double kappa, const Exponents& ex,
                                        LyapunovTolerance tol) {
  const double ab1 = 2.0 - ex.alpha1;
  const double ab2 = 2.0 - ex.alpha2;
  const double c1 = std::pow(2.0, ab1 / 2.0);
  const double c2 = std::pow(2.0, ab2 / 2.0);
  return decrease_monitor(
      traj, [&](const Vector& z) { return monotone_lyapunov(field, z); },
      [&](double v) {
        return k * kappa * (c1 * std::pow(v, ab1 / 2.0) + c2 * std::pow(v, ab2 / 2.0));
      },
      tol);
}

MonitorReport lyapunov_potential_monitor(const Trajectory& traj,
                                         const AffineField& field, double k,
                                         double kappa, const Exponents& ex,
                                         LyapunovTolerance tol) {
  if (asymmetry(field.M) > kPotentialSymmetryTol)
    throw std::logic_error("lyapunov_potential_monitor: not a potential game");
  const double ab1 = 2.0 - ex.alpha1;
  const double ab2 = 2.0 - ex.alpha2;
  const double c1 = std::pow(2.0, (2.0 + 3.0 * ab1) / 4.0) * std::pow(kappa, ab1 / 2.0);
  const double c2 = std::pow(2.0, (2.0 + 3.0 * ab2) / 4.0) * std::pow(kappa, ab2 / 2.0);
  const double g1 = (2.0 + ab1) / 4.0;
  const double g2 = (2.0 + ab2) / 4.0;
  const Vector z_star = affine_root(field);
  const double p_star = potential_value(field, z_star);
  return decrease_monitor(
      traj,
      [&](const Vector& z) {
        const double gap = potential_value(field, z) - p_star;
        return 0.5 * gap * gap;
      },
      [&](double v) { return k * (c1 * std::pow(v, g1) + c2 * std::pow(v, g2)); },
      tol);
}

Envelope reachable_envelope(std::span<const Trajectory> batch,
                            const Vector& u_star) {
  if (batch.empty()) throw std::invalid_argument("reachable_envelope: empty batch");
  const auto& grid = batch.front().times;
  for (const auto& t : batch)
    if (t.times != grid)
      throw std::invalid_argument("reachable_envelope: trajectories use different time grids");

  Envelope env;
  env.times = grid;
  for (std::size_t s = 0; s < grid.size(); ++s) {
    Vector lo = batch.front().actions[s];
    Vector hi = lo;
    double dlo = INFINITY;
    double dhi = 0.0;
    for (const auto& t : batch) {
      const Vector& u = t.actions[s];
      lo = lo.cwiseMin(u);
      hi = hi.cwiseMax(u);
      const double d = (u - u_star).norm();
      dlo = std::min(dlo, d);
      dhi = std::max(dhi, d);
    }
    env.lower.push_back(std::move(lo));
    env.upper.push_back(std::move(hi));
    env.dist_lower.push_back(dlo);
    env.dist_upper.push_back(dhi);
  }
  return env;
}

}  // namespace fxtnes
