#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fxtnes/linalg.hpp"

namespace fxtnes {

/// Continuous state y plus probe phases that rotate at known rates and are
/// advanced in closed form rather than integrated.
struct FlowState {
  Vector y;
  Vector phase;
};

/// An ODE y' = f(t, y, phase(t)) with phase(t) = phase(0) + rates * t.
struct Flow {
  using Rhs = std::function<void(double t, const Vector& y, const Vector& phase,
                                 Vector& dydt)>;
  using Output = std::function<Vector(const Vector& y, const Vector& phase)>;
  using StepLimit = std::function<double(const Vector& y)>;

  Rhs rhs;
  /// Radians per unit time; empty for flows without probes.
  Vector phase_rates;
  /// Actions u recorded in the trajectory. Defaults to y itself.
  Output output;
  /// Optional largest stable step at y; steps longer than this are split
  /// into equal substeps.
  StepLimit max_step;
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

struct IntegratorConfig {
  double step = 1e-3;
  double t_end = 1.0;
  std::size_t record_stride = 1;

  void validate() const;
  std::size_t steps() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<FlowState> states;
  std::vector<Vector> actions;
  std::map<std::string, std::vector<double>> monitors;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
};

/// Evaluated once per recorded sample, never inside RK stages.
struct Monitor {
  std::string name;
  std::function<double(double t, const FlowState& state, const Vector& u)> fn;
};

/// Classical RK4 on y; stages see the exact phases at t, t + h/2 and t + h.
/// Throws IntegrationError if any stage value is not finite.
FlowState rk4_step(const Flow& flow, double t, const FlowState& state, double h);

/// Fixed-step RK4 from t = 0 to config.t_end. Sample times are n * step.
Trajectory simulate(const Flow& flow, const FlowState& initial,
                    const IntegratorConfig& config,
                    const std::vector<Monitor>& monitors = {});

/// Runs job(0..count-1) over a pool of worker threads (0 = hardware
/// concurrency) and returns results in index order.
std::vector<Trajectory> simulate_batch(
    std::size_t count, const std::function<Trajectory(std::size_t)>& job,
    unsigned threads = 0);

}  // namespace fxtnes
