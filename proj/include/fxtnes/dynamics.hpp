#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fxtnes/game.hpp"
#include "fxtnes/linalg.hpp"

namespace fxtnes {

/// Tuning values outside their admissible range.
class InadmissibleParameters : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Probe frequencies that break the averaging requirements (positive
/// rationals, pairwise distinct, no frequency twice another).
class FrequencyAssumptionViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Exponents {
  double alpha1 = 0.0;  // in (0, 1)
  double alpha2 = 0.0;  // negative
};

/// alpha = (q - 2) / (q - 1). Requires q1 in (2, inf) and q2 in (1, 2).
Exponents alphas(double q1, double q2);

/// psi(s) = s^(-alpha1/2) + s^(-alpha2/2), with s = |z|^2 > 0.
double psi(double s, const Exponents& ex);

/// Positive rational number in lowest terms.
struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 1;

  static Rational make(std::int64_t num, std::int64_t den = 1);
  /// Accepts "p", "p/q" or a finite decimal such as "2.5".
  static Rational parse(std::string_view text);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// First n primes: distinct, and no prime is twice another.
std::vector<Rational> default_probe_frequencies(std::size_t n);

/// Throws FrequencyAssumptionViolation naming the offending pair.
void check_probe_frequencies(std::span<const Rational> kappa_tilde);

/// Smallest T with every probe cos(2*pi*kappa_i*t) periodic in T (eps2 = 1).
Rational common_probe_period(std::span<const Rational> kappa_tilde);

struct FxtnesParams {
  double k = 1.0;
  double q1 = 3.0;
  double q2 = 1.5;
  Vector a;  // dither amplitude per player
  double eps1 = 5e-2;
  double eps2 = 1e-4;
  std::vector<Rational> kappa_tilde;
  Vector rho2;  // kappa_i = kappa_tilde_i * rho2_i
  double sing_tol = 1e-9;

  /// Three-player-style presets: k = 1, a_i = 0.1, eps1 = 5e-2, eps2 = 1e-4,
  /// q = (3, 1.5), rho2 = 1, first n primes as probe frequencies.
  static FxtnesParams defaults(std::size_t players);

  std::size_t players() const { return static_cast<std::size_t>(a.size()); }
  Exponents exponents() const { return alphas(q1, q2); }
  /// 2*pi*kappa_i / (rho2_i * eps2) = 2*pi*kappa_tilde_i / eps2.
  Vector phase_rates() const;
  double max_frequency() const;
  /// Full gate: admissible exponents, k > 0, a_i in (0,1), 0 < eps2 < eps1,
  /// sing_tol >= 0, and the probe frequency requirements.
  void validate() const;
};

/// (u_hat, x, probe phases). Row i of x is player i's estimator state.
struct SystemState {
  Vector u_hat;
  Matrix x;
  Vector probe_phase;

  static SystemState zeros(std::size_t players);
};

struct StateRate {
  Vector u_hat;
  Matrix x;
};

/// u_i = u_hat_i + a_i cos(phi_i).
Vector action(const Vector& u_hat, const Vector& probe_phase, const Vector& a);

/// Component i: -k x_ii psi(|x_i|^2), and 0 when |x_i| <= sing_tol.
Vector drift_u(const Matrix& x, const FxtnesParams& params);

/// Estimator rate, eps1 division included:
///   x'_ij = ( sum_{k in N_i} (x_kj - x_ij) + [i==j] ((2/a_i) J_i(u) cos phi_i - x_ij) ) / eps1
Matrix drift_x(const Matrix& x, const Vector& u, const Vector& probe_phase,
               const CostOracle& costs, const Matrix& laplacian,
               const FxtnesParams& params);

/// Exact rotation of the probe oscillators over dt.
Vector probe_phase_advance(const Vector& phase, double dt,
                           const FxtnesParams& params);

/// Full model-free vector field with probe phases taken from `state` (they
/// are the exact phases at time t). Only cost evaluations are used.
StateRate rhs_full(double t, const SystemState& state, const CostOracle& costs,
                   const Matrix& laplacian, const FxtnesParams& params);

/// Same as rhs_full, with psi replaced by 1: u_hat'_i = -k x_ii.
StateRate rhs_baseline(double t, const SystemState& state,
                       const CostOracle& costs, const Matrix& laplacian,
                       const FxtnesParams& params);

/// z'_i = -k F_i(z) psi(|F(z)|^2), zero when |F(z)| <= sing_tol.
Vector rhs_reduced(const Vector& z, const AffineField& field,
                   const FxtnesParams& params);

/// z' = -k F(z).
Vector rhs_reduced_baseline(const Vector& z, const AffineField& field, double k);

/// Nominal average system: u' = drift_u(x), eps1 x' = -(L(x)I + B) x + B (F(u) (x) 1).
StateRate rhs_average_nominal(const Vector& u_avg, const Matrix& x_avg,
                              const AffineField& field, const Matrix& laplacian,
                              const FxtnesParams& params);

/// dx/dtau = -(L(x)I + B) x + B (F(u_frozen) (x) 1). No eps1 factor.
Matrix rhs_boundary_layer(const Matrix& x, const Vector& u_frozen,
                          const AffineField& field, const Matrix& laplacian);

/// x*_ij = F_j(u_frozen) for every row i.
Matrix boundary_layer_equilibrium(const AffineField& field,
                                  const Vector& u_frozen);

}  // namespace fxtnes
