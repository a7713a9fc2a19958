#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fxtnes/dynamics.hpp"
#include "fxtnes/game.hpp"
#include "fxtnes/integrator.hpp"

namespace fxtnes {

enum class BoundRegime { Potential, Monotone };
const char* to_string(BoundRegime regime);

/// Constants behind a prescribed convergence time, for either regime.
/// gamma* are filled for the potential regime, theta* for the monotone one.
struct FixedTimeReport {
  BoundRegime regime = BoundRegime::Monotone;
  double k = 0.0;
  double kappa = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double T_star = 0.0;
};

// Potential games: gamma = 2^((8 - 3 alpha)/4) kappa^((2 - alpha)/2),
// T = (4/k) (1/(gamma1 alpha1) - 1/(gamma2 alpha2)).
double fixed_time_potential(double k, double kappa, const Exponents& ex);
double gain_for_time_potential(double T_star, double kappa, const Exponents& ex);

// Strongly monotone games: theta = 2^(-alpha/2),
// T = 4/(k kappa) (theta1/alpha1 - theta2/alpha2).
double fixed_time_monotone(double k, double kappa, const Exponents& ex);
double gain_for_time_monotone(double T_star, double kappa, const Exponents& ex);

FixedTimeReport fixed_time_report(BoundRegime regime, double k, double kappa,
                                  const Exponents& ex);

/// First recorded time after which |u(s) - u*| <= nu for every later sample
/// (backward scan). nullopt when even the final sample is outside the ball.
std::optional<double> settling_time(const Trajectory& traj, const Vector& u_star,
                                    double nu);

struct ProbeAverageResult {
  double mean_deviation = 0.0;           // max_i |mean mu_i|
  double second_moment_deviation = 0.0;  // max_ij |mean mu_i mu_j - I/2|
  Rational period;
};

/// Trapezoid quadrature of the probe moments over one common period
/// (eps2 = 1, zero initial phases). Rejects frequencies that break the
/// averaging requirements.
ProbeAverageResult probe_average_check(std::span<const Rational> kappa_tilde,
                                       std::size_t quadrature_points);

struct LyapunovTolerance {
  double relative = 0.05;
  double absolute = 1e-8;
  double min_value = 1e-10;
};

struct MonitorReport {
  std::size_t violations = 0;
  std::size_t checked = 0;
  /// Smallest observed (finite-difference rate) / (required rate). Values
  /// >= 1 mean V fell at least as fast as the bound demands.
  double min_ratio = 0.0;
};

/// V(z) = 1/2 |F(z)|^2.
double monotone_lyapunov(const AffineField& field, const Vector& z);

/// V_P(z) = 1/2 (P(z) - P(z*))^2.
double potential_lyapunov(const AffineField& field, const Vector& z);

/// Checks V' <= -k kappa (c1 V^g1 + c2 V^g2), c_i = 2^(abar_i/2),
/// g_i = abar_i/2, abar_i = 2 - alpha_i, on consecutive recorded samples.
/// The bound is evaluated at the later sample, where it is weakest.
MonitorReport lyapunov_monotone_monitor(const Trajectory& traj,
                                        const AffineField& field, double k,
                                        double kappa, const Exponents& ex,
                                        LyapunovTolerance tol = {});

/// Checks V_P' <= -k (c1 V_P^g1 + c2 V_P^g2) with
/// c_i = 2^((2 + 3 abar_i)/4) kappa^(abar_i/2), g_i = (2 + abar_i)/4.
/// Throws std::logic_error if the field is not a gradient.
MonitorReport lyapunov_potential_monitor(const Trajectory& traj,
                                         const AffineField& field, double k,
                                         double kappa, const Exponents& ex,
                                         LyapunovTolerance tol = {});

struct Envelope {
  std::vector<double> times;
  std::vector<Vector> lower;
  std::vector<Vector> upper;
  std::vector<double> dist_lower;
  std::vector<double> dist_upper;
};

/// Per-sample min/max of every action coordinate and of |u - u*| over a
/// batch that shares one time grid. Throws std::invalid_argument otherwise.
Envelope reachable_envelope(std::span<const Trajectory> batch,
                            const Vector& u_star);

}  // namespace fxtnes
