#include "fxtnes/dynamics.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fxtnes/phase.hpp"

namespace fxtnes {

Exponents alphas(double q1, double q2) {
  if (!(q1 > 2.0) || !std::isfinite(q1)) {
    std::ostringstream msg;
    msg << "q1 = " << q1 << " is inadmissible: q1 must lie in (2, inf)";
    throw InadmissibleParameters(msg.str());
  }
  if (!(q2 > 1.0 && q2 < 2.0)) {
    std::ostringstream msg;
    msg << "q2 = " << q2 << " is inadmissible: q2 must lie in (1, 2)";
    throw InadmissibleParameters(msg.str());
  }
  return {(q1 - 2.0) / (q1 - 1.0), (q2 - 2.0) / (q2 - 1.0)};
}

double psi(double s, const Exponents& ex) {
  return std::pow(s, -0.5 * ex.alpha1) + std::pow(s, -0.5 * ex.alpha2);
}

Rational Rational::make(std::int64_t num, std::int64_t den) {
  if (num <= 0 || den <= 0)
    throw FrequencyAssumptionViolation("probe frequency " + std::to_string(num) +
                                       "/" + std::to_string(den) +
                                       " is not a positive rational");
  const auto g = std::gcd(num, den);
  return {num / g, den / g};
}

Rational Rational::parse(std::string_view text) {
  auto bad = [&] {
    return FrequencyAssumptionViolation("cannot read '" + std::string(text) +
                                        "' as a positive rational");
  };
  auto to_int = [&](std::string_view s) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) throw bad();
    return v;
  };
  if (auto slash = text.find('/'); slash != std::string_view::npos)
    return make(to_int(text.substr(0, slash)), to_int(text.substr(slash + 1)));
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    const auto frac = text.substr(dot + 1);
    if (frac.size() > 15) throw bad();
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const std::int64_t whole = dot == 0 ? 0 : to_int(text.substr(0, dot));
    const std::int64_t part = frac.empty() ? 0 : to_int(frac);
    return make(whole * den + part, den);
  }
  return make(to_int(text));
}

std::string Rational::str() const {
  return den == 1 ? std::to_string(num)
                  : std::to_string(num) + "/" + std::to_string(den);
}

std::vector<Rational> default_probe_frequencies(std::size_t n) {
  std::vector<Rational> out;
  for (std::int64_t c = 2; out.size() < n; ++c) {
    bool prime = true;
    for (std::int64_t d = 2; d * d <= c; ++d)
      if (c % d == 0) {
        prime = false;
        break;
      }
    if (prime) out.push_back({c, 1});
  }
  return out;
}

void check_probe_frequencies(std::span<const Rational> kt) {
  __extension__ typedef __int128 wide;
  for (const auto& r : kt)
    if (r.num <= 0 || r.den <= 0)
      throw FrequencyAssumptionViolation("probe frequency " + r.str() +
                                         " is not a positive rational");
  for (std::size_t i = 0; i < kt.size(); ++i) {
    for (std::size_t j = 0; j < kt.size(); ++j) {
      if (i == j) continue;
      const wide lhs = wide(kt[i].num) * kt[j].den;
      const wide rhs = wide(kt[j].num) * kt[i].den;
      const auto pair = " (players " + std::to_string(i + 1) + " and " +
                        std::to_string(j + 1) + ": " + kt[i].str() + ", " +
                        kt[j].str() + ")";
      if (lhs == rhs)
        throw FrequencyAssumptionViolation(
            "probe frequencies must be pairwise distinct" + pair);
      if (lhs == 2 * rhs)
        throw FrequencyAssumptionViolation(
            "no probe frequency may be twice another" + pair);
    }
  }
}

Rational common_probe_period(std::span<const Rational> kt) {
  if (kt.empty()) throw std::invalid_argument("no probe frequencies");
  // Player i has period den_i / num_i; lcm of reduced fractions is
  // lcm(numerators) / gcd(denominators).
  std::int64_t top = 1;
  std::int64_t bottom = 0;
  for (const auto& r : kt) {
    top = std::lcm(top, r.den);
    bottom = std::gcd(bottom, r.num);
  }
  return Rational::make(top, bottom);
}

FxtnesParams FxtnesParams::defaults(std::size_t players) {
  FxtnesParams p;
  const auto n = static_cast<Eigen::Index>(players);
  p.a = Vector::Constant(n, 0.1);
  p.rho2 = Vector::Ones(n);
  p.kappa_tilde = default_probe_frequencies(players);
  return p;
}

Vector FxtnesParams::phase_rates() const {
  Vector r(static_cast<Eigen::Index>(kappa_tilde.size()));
  for (std::size_t i = 0; i < kappa_tilde.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double kappa = kappa_tilde[i].value() * rho2(ii);
    r(ii) = kTwoPi * kappa / (rho2(ii) * eps2);
  }
  return r;
}

double FxtnesParams::max_frequency() const {
  double m = 0.0;
  for (const auto& r : kappa_tilde) m = std::max(m, r.value());
  return m;
}

void FxtnesParams::validate() const {
  (void)exponents();
  if (!(k > 0.0) || !std::isfinite(k))
    throw InadmissibleParameters("gain k must be positive");
  const auto n = players();
  if (n == 0) throw InadmissibleParameters("no dither amplitudes given");
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (!(a(i) > 0.0 && a(i) < 1.0))
      throw InadmissibleParameters("dither amplitude a_" + std::to_string(i + 1) +
                                   " must lie in (0, 1)");
  if (!(eps1 > 0.0) || !(eps2 > 0.0))
    throw InadmissibleParameters("eps1 and eps2 must be positive");
  if (!(eps2 < eps1))
    throw InadmissibleParameters("eps2 must be smaller than eps1");
  if (!(sing_tol >= 0.0)) throw InadmissibleParameters("sing_tol must be >= 0");
  if (kappa_tilde.size() != n)
    throw InadmissibleParameters("need one probe frequency per player");
  if (static_cast<std::size_t>(rho2.size()) != n)
    throw InadmissibleParameters("need one rho2 per player");
  for (Eigen::Index i = 0; i < rho2.size(); ++i)
    if (!(rho2(i) > 0.0)) throw InadmissibleParameters("rho2 must be positive");
  check_probe_frequencies(kappa_tilde);
}

SystemState SystemState::zeros(std::size_t players) {
  const auto n = static_cast<Eigen::Index>(players);
  return {Vector::Zero(n), Matrix::Zero(n, n), Vector::Zero(n)};
}

Vector action(const Vector& u_hat, const Vector& probe_phase, const Vector& a) {
  return u_hat + a.cwiseProduct(probe_phase.array().cos().matrix());
}

namespace {

// k * g * psi(|v|^2), with the continuous extension 0 at |v| <= tol.
double fixed_time_term(double g, double norm, const Exponents& ex, double k,
                       double tol) {
  if (norm <= tol) return 0.0;
  return k * g * psi(norm * norm, ex);
}

}  // namespace

Vector drift_u(const Matrix& x, const FxtnesParams& params) {
  const Exponents ex = params.exponents();
  const Eigen::Index n = x.rows();
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i)
    out(i) = -fixed_time_term(x(i, i), x.row(i).norm(), ex, params.k,
                              params.sing_tol);
  return out;
}

Matrix drift_x(const Matrix& x, const Vector& u, const Vector& probe_phase,
               const CostOracle& costs, const Matrix& laplacian,
               const FxtnesParams& params) {
  Matrix dx = -(laplacian * x);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double j = costs.cost(static_cast<std::size_t>(i), u);
    dx(i, i) += (2.0 / params.a(i)) * j * std::cos(probe_phase(i)) - x(i, i);
  }
  return dx / params.eps1;
}

Vector probe_phase_advance(const Vector& phase, double dt,
                           const FxtnesParams& params) {
  return rotate_phases(phase, params.phase_rates(), dt);
}

StateRate rhs_full(double /*t*/, const SystemState& state,
                   const CostOracle& costs, const Matrix& laplacian,
                   const FxtnesParams& params) {
  const Vector u = action(state.u_hat, state.probe_phase, params.a);
  return {drift_u(state.x, params),
          drift_x(state.x, u, state.probe_phase, costs, laplacian, params)};
}

StateRate rhs_baseline(double /*t*/, const SystemState& state,
                       const CostOracle& costs, const Matrix& laplacian,
                       const FxtnesParams& params) {
  const Vector u = action(state.u_hat, state.probe_phase, params.a);
  return {-params.k * state.x.diagonal(),
          drift_x(state.x, u, state.probe_phase, costs, laplacian, params)};
}

Vector rhs_reduced(const Vector& z, const AffineField& field,
                   const FxtnesParams& params) {
  const Vector g = field(z);
  const double norm = g.norm();
  if (norm <= params.sing_tol) return Vector::Zero(z.size());
  return -params.k * psi(norm * norm, params.exponents()) * g;
}

Vector rhs_reduced_baseline(const Vector& z, const AffineField& field, double k) {
  return -k * field(z);
}

Matrix rhs_boundary_layer(const Matrix& x, const Vector& u_frozen,
                          const AffineField& field, const Matrix& laplacian) {
  const Vector g = field(u_frozen);
  Matrix dx = -(laplacian * x);
  for (Eigen::Index i = 0; i < x.rows(); ++i) dx(i, i) += g(i) - x(i, i);
  return dx;
}

StateRate rhs_average_nominal(const Vector& u_avg, const Matrix& x_avg,
                              const AffineField& field, const Matrix& laplacian,
                              const FxtnesParams& params) {
  return {drift_u(x_avg, params),
          rhs_boundary_layer(x_avg, u_avg, field, laplacian) / params.eps1};
}

Matrix boundary_layer_equilibrium(const AffineField& field,
                                  const Vector& u_frozen) {
  const Vector g = field(u_frozen);
  return g.transpose().replicate(g.size(), 1);
}

}  // namespace fxtnes
