#include "fxtnes/systems.hpp"

#include <algorithm>
#include <cmath>

namespace fxtnes {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Reduced-flow step limits are not refined below |F| = 1; below that the
// finite-time flow chatters at a scale far under any settling radius.
constexpr double kStiffnessFloor = 1.0;
constexpr double kStabilityMargin = 1.0;

}  // namespace

Vector stack_rows(const Matrix& x) {
  const RowMajor r = x;
  return Eigen::Map<const Vector>(r.data(), r.size());
}

Matrix unstack_rows(const Vector& v, std::size_t n) {
  const auto nn = static_cast<Eigen::Index>(n);
  return Eigen::Map<const RowMajor>(v.data(), nn, nn);
}

FlowState pack(const SystemState& s) {
  const Eigen::Index n = s.u_hat.size();
  FlowState f{Vector(n + n * n), s.probe_phase};
  f.y.head(n) = s.u_hat;
  f.y.tail(n * n) = stack_rows(s.x);
  return f;
}

SystemState unpack(const FlowState& f, std::size_t players) {
  const auto n = static_cast<Eigen::Index>(players);
  return {f.y.head(n), unstack_rows(f.y.tail(n * n), players), f.phase};
}

Flow make_seeking_flow(std::shared_ptr<const CostOracle> costs,
                       const Matrix& laplacian, const FxtnesParams& params,
                       SeekingLaw law) {
  params.validate();
  const std::size_t n = costs->players();
  Flow flow;
  flow.phase_rates = params.phase_rates();
  flow.rhs = [costs, laplacian, params, law, n](double t, const Vector& y,
                                                const Vector& phase,
                                                Vector& dydt) {
    const auto nn = static_cast<Eigen::Index>(n);
    SystemState s{y.head(nn), unstack_rows(y.tail(nn * nn), n), phase};
    const StateRate r = law == SeekingLaw::FixedTime
                            ? rhs_full(t, s, *costs, laplacian, params)
                            : rhs_baseline(t, s, *costs, laplacian, params);
    dydt.head(nn) = r.u_hat;
    dydt.tail(nn * nn) = stack_rows(r.x);
  };
  flow.output = [a = params.a, n](const Vector& y, const Vector& phase) {
    return action(y.head(static_cast<Eigen::Index>(n)), phase, a);
  };
  return flow;
}

double reduced_flow_step_limit(const AffineField& field,
                               const FxtnesParams& params, const Vector& z) {
  const Exponents ex = params.exponents();
  const double s = std::max(field(z).squaredNorm(), kStiffnessFloor);
  // |d/dz (psi(|F|^2) F)| <= |M| (psi(s) + 2 s |psi'(s)|).
  const double gain = (1.0 + std::abs(ex.alpha1)) * std::pow(s, -0.5 * ex.alpha1) +
                      (1.0 + std::abs(ex.alpha2)) * std::pow(s, -0.5 * ex.alpha2);
  const double rate = params.k * field.M.norm() * gain;
  return rate > 0.0 ? kStabilityMargin / rate : INFINITY;
}

Flow make_reduced_flow(const AffineField& field, const FxtnesParams& params) {
  (void)params.exponents();
  Flow flow;
  flow.rhs = [field, params](double, const Vector& z, const Vector&,
                             Vector& dz) { dz = rhs_reduced(z, field, params); };
  flow.max_step = [field, params](const Vector& z) {
    return reduced_flow_step_limit(field, params, z);
  };
  return flow;
}

Flow make_reduced_baseline_flow(const AffineField& field, double k) {
  Flow flow;
  flow.rhs = [field, k](double, const Vector& z, const Vector&, Vector& dz) {
    dz = rhs_reduced_baseline(z, field, k);
  };
  return flow;
}

Flow make_average_flow(const AffineField& field, const Matrix& laplacian,
                       const FxtnesParams& params) {
  (void)params.exponents();
  const std::size_t n = field.dim();
  Flow flow;
  flow.rhs = [field, laplacian, params, n](double, const Vector& y,
                                           const Vector&, Vector& dydt) {
    const auto nn = static_cast<Eigen::Index>(n);
    const StateRate r = rhs_average_nominal(
        y.head(nn), unstack_rows(y.tail(nn * nn), n), field, laplacian, params);
    dydt.head(nn) = r.u_hat;
    dydt.tail(nn * nn) = stack_rows(r.x);
  };
  flow.output = [n](const Vector& y, const Vector&) -> Vector {
    return y.head(static_cast<Eigen::Index>(n));
  };
  return flow;
}

Flow make_boundary_layer_flow(const AffineField& field, const Matrix& laplacian,
                              const Vector& u_frozen) {
  const std::size_t n = field.dim();
  Flow flow;
  flow.rhs = [field, laplacian, u_frozen, n](double, const Vector& y,
                                             const Vector&, Vector& dydt) {
    dydt = stack_rows(
        rhs_boundary_layer(unstack_rows(y, n), u_frozen, field, laplacian));
  };
  return flow;
}

}  // namespace fxtnes
