#include "fxtnes/integrator.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "fxtnes/phase.hpp"

namespace fxtnes {

namespace {

void require_finite(const Vector& v, double t, const char* stage) {
  if (!v.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite derivative at RK4 stage " << stage << " (t = " << t
        << "); the step is too large or the state entered a singular region";
    throw IntegrationError(msg.str(), t);
  }
}

Vector advance(const Flow& flow, const Vector& phase, double dt) {
  if (flow.phase_rates.size() == 0) return phase;
  return rotate_phases(phase, flow.phase_rates, dt);
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(step > 0.0) || !std::isfinite(step))
    throw std::invalid_argument("integrator step must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end))
    throw std::invalid_argument("integrator horizon must be non-negative");
  if (record_stride == 0)
    throw std::invalid_argument("record_stride must be positive");
}

std::size_t IntegratorConfig::steps() const {
  return static_cast<std::size_t>(std::ceil(t_end / step - 1e-9));
}

FlowState rk4_step(const Flow& flow, double t, const FlowState& s, double h) {
  const Vector phase_mid = advance(flow, s.phase, 0.5 * h);
  const Vector phase_end = advance(flow, s.phase, h);
  const Eigen::Index n = s.y.size();
  Vector k1(n), k2(n), k3(n), k4(n);

  flow.rhs(t, s.y, s.phase, k1);
  require_finite(k1, t, "1");
  flow.rhs(t + 0.5 * h, s.y + 0.5 * h * k1, phase_mid, k2);
  require_finite(k2, t, "2");
  flow.rhs(t + 0.5 * h, s.y + 0.5 * h * k2, phase_mid, k3);
  require_finite(k3, t, "3");
  flow.rhs(t + h, s.y + h * k3, phase_end, k4);
  require_finite(k4, t, "4");

  FlowState out{s.y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), phase_end};
  if (!out.y.allFinite()) {
    std::ostringstream msg;
    msg << "state became non-finite at t = " << t + h;
    throw IntegrationError(msg.str(), t + h);
  }
  return out;
}

Trajectory simulate(const Flow& flow, const FlowState& initial,
                    const IntegratorConfig& config,
                    const std::vector<Monitor>& monitors) {
  config.validate();
  Trajectory traj;
  const std::size_t steps = config.steps();
  const std::size_t samples = steps / config.record_stride + 2;
  traj.times.reserve(samples);
  traj.states.reserve(samples);
  traj.actions.reserve(samples);

  auto record = [&](double t, const FlowState& s) {
    Vector u = flow.output ? flow.output(s.y, s.phase) : s.y;
    for (const auto& m : monitors) traj.monitors[m.name].push_back(m.fn(t, s, u));
    traj.times.push_back(t);
    traj.states.push_back(s);
    traj.actions.push_back(std::move(u));
  };

  FlowState state = initial;
  record(0.0, state);
  for (std::size_t n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * config.step;
    std::size_t substeps = 1;
    if (flow.max_step) {
      const double limit = flow.max_step(state.y);
      if (limit > 0.0 && limit < config.step)
        substeps = static_cast<std::size_t>(std::ceil(config.step / limit));
    }
    const double h = config.step / static_cast<double>(substeps);
    for (std::size_t s = 0; s < substeps; ++s)
      state = rk4_step(flow, t + static_cast<double>(s) * h, state, h);
    if ((n + 1) % config.record_stride == 0 || n + 1 == steps)
      record(static_cast<double>(n + 1) * config.step, state);
  }
  return traj;
}

std::vector<Trajectory> simulate_batch(
    std::size_t count, const std::function<Trajectory(std::size_t)>& job,
    unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  std::vector<Trajectory> out(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = job(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace fxtnes
