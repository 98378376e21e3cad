#pragma once

// Adaptive Dormand-Prince 5(4) integrator with continuous (dense) output.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lgp/types.hpp"

namespace lgp {

using VectorField = std::function<Vector(double t, const Vector& x)>;

/// Called after every accepted step with the new state; a returned message
/// stops the integration and is logged as an event.
using StepMonitor = std::function<std::optional<std::string>(double t, const Vector& x)>;

struct IntegratorOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double initial_step = 0.0;  // 0 selects a step automatically
  double max_step = 0.0;      // 0 means unbounded
  double min_step = 1e-14;    // relative to max(1, |t|)
  long max_steps = 10'000'000;
};

enum class IntegrationStatus { completed, stopped_by_monitor, field_error, step_underflow, max_steps };

struct IntegrationEvent {
  double t = 0.0;
  std::string message;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<Vector> x;
  IntegrationStatus status = IntegrationStatus::completed;
  std::vector<IntegrationEvent> events;
  long accepted_steps = 0;
  long rejected_steps = 0;

  [[nodiscard]] bool completed() const noexcept { return status == IntegrationStatus::completed; }
};

/// Integrates x' = f(t, x) from t0 to t1 (> t0). With `sample_times` (sorted,
/// inside [t0, t1]) the result holds the dense-output interpolant at exactly
/// those times; otherwise it holds x0 and every accepted step. Exceptions
/// derived from lgp::Error thrown by the field stop integration with an event.
[[nodiscard]] Trajectory integrate(const VectorField& f, const Vector& x0, double t0, double t1,
                                   const IntegratorOptions& options = {},
                                   const std::vector<double>* sample_times = nullptr,
                                   const StepMonitor& monitor = {});

}  // namespace lgp
