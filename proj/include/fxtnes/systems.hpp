#pragma once

#include <memory>

#include "fxtnes/dynamics.hpp"
#include "fxtnes/game.hpp"
#include "fxtnes/integrator.hpp"

namespace fxtnes {

/// Update law applied to u_hat given the estimator state.
enum class SeekingLaw {
  FixedTime,  // -k x_ii psi(|x_i|^2)
  Gradient,   // -k x_ii
};

// Packing of SystemState into a flow state: y = [u_hat; x row by row].
FlowState pack(const SystemState& s);
SystemState unpack(const FlowState& f, std::size_t players);

/// Full model-free system. The flow only sees `costs`.
Flow make_seeking_flow(std::shared_ptr<const CostOracle> costs,
                       const Matrix& laplacian, const FxtnesParams& params,
                       SeekingLaw law = SeekingLaw::FixedTime);

/// Reduced fixed-time flow z' = -k psi(|F|^2) F, with a stiffness-based
/// substep limit so that very large initial conditions stay stable.
Flow make_reduced_flow(const AffineField& field, const FxtnesParams& params);

/// Reduced gradient flow z' = -k F(z).
Flow make_reduced_baseline_flow(const AffineField& field, double k);

/// Nominal average system on y = [u; x row by row]; output is u.
Flow make_average_flow(const AffineField& field, const Matrix& laplacian,
                       const FxtnesParams& params);

/// Boundary layer on y = x row by row (tau time), u frozen.
Flow make_boundary_layer_flow(const AffineField& field, const Matrix& laplacian,
                              const Vector& u_frozen);

/// Largest RK4 step that keeps the reduced fixed-time flow stable at z.
double reduced_flow_step_limit(const AffineField& field,
                               const FxtnesParams& params, const Vector& z);

/// Row-stacked view helpers.
Vector stack_rows(const Matrix& x);
Matrix unstack_rows(const Vector& v, std::size_t n);

}  // namespace fxtnes
