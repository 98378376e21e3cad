#include "lgp/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lgp/errors.hpp"

namespace lgp {

namespace {

constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Continuous extension of order 4.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

double error_norm(const Vector& err, const Vector& y0, const Vector& y1, double atol, double rtol) {
  const Index n = err.size();
  if (n == 0) return 0.0;
  double acc = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    const double r = err(i) / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

double initial_step(const VectorField& f, double t0, const Vector& x0, const Vector& f0,
                    double span, const IntegratorOptions& o) {
  const Index n = x0.size();
  if (n == 0) return span;
  const Vector zero = Vector::Zero(n);
  const double dnf = error_norm(f0, x0, x0, o.atol, o.rtol);
  const double dny = error_norm(x0, zero, zero, o.atol, o.rtol);
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
  h = std::min(h, span);
  const Vector x1 = x0 + h * f0;
  const Vector f1 = f(t0 + h, x1);
  const double der2 = error_norm(f1 - f0, x0, x0, o.atol, o.rtol) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 = (der12 <= 1e-15) ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  return std::min({100.0 * h, h1, span});
}

}  // namespace

Trajectory integrate(const VectorField& f, const Vector& x0, double t0, double t1,
                     const IntegratorOptions& options, const std::vector<double>* sample_times,
                     const StepMonitor& monitor) {
  if (!(t1 > t0)) throw DomainError("integration interval must have t1 > t0");
  if (!(options.rtol > 0.0) || !(options.atol > 0.0)) {
    throw ConfigError("integrator tolerances must be positive");
  }
  if (!x0.allFinite()) throw DomainError("initial state is not finite");
  if (sample_times) {
    for (std::size_t i = 0; i < sample_times->size(); ++i) {
      const double s = (*sample_times)[i];
      if (s < t0 || s > t1 || (i > 0 && !(s > (*sample_times)[i - 1]))) {
        throw ConfigError("sample times must be strictly increasing inside [t0, t1]");
      }
    }
  }

  Trajectory out;
  std::size_t next_sample = 0;
  auto emit_samples_up_to = [&](double t_new, auto&& interp) {
    if (!sample_times) return;
    while (next_sample < sample_times->size() && (*sample_times)[next_sample] <= t_new) {
      const double s = (*sample_times)[next_sample];
      out.t.push_back(s);
      out.x.push_back(interp(s));
      ++next_sample;
    }
  };
  auto stop = [&](IntegrationStatus status, double t, std::string message) {
    out.status = status;
    out.events.push_back({t, std::move(message)});
    return out;
  };

  double t = t0;
  Vector x = x0;
  Vector k1;
  try {
    k1 = f(t, x);
  } catch (const Error& e) {
    return stop(IntegrationStatus::field_error, t, e.what());
  }
  if (sample_times) {
    emit_samples_up_to(t0, [&](double) { return x0; });
  } else {
    out.t.push_back(t0);
    out.x.push_back(x0);
  }

  const double span = t1 - t0;
  const double hmax = options.max_step > 0.0 ? options.max_step : span;
  double h;
  try {
    h = options.initial_step > 0.0 ? options.initial_step : initial_step(f, t, x, k1, span, options);
  } catch (const Error& e) {
    return stop(IntegrationStatus::field_error, t, e.what());
  }
  h = std::min(h, hmax);

  long steps = 0;
  while (t < t1) {
    if (++steps > options.max_steps) {
      return stop(IntegrationStatus::max_steps, t, "maximum number of steps reached");
    }
    bool last = false;
    if (t + h >= t1 || t + 1.01 * h >= t1) {
      h = t1 - t;
      last = true;
    }
    if (h < options.min_step * std::max(1.0, std::abs(t))) {
      std::ostringstream msg;
      msg << "step size underflow (h = " << h << ")";
      return stop(IntegrationStatus::step_underflow, t, msg.str());
    }
    Vector k2, k3, k4, k5, k6, k7, x_new;
    try {
      k2 = f(t + c2 * h, x + h * (a21 * k1));
      k3 = f(t + c3 * h, x + h * (a31 * k1 + a32 * k2));
      k4 = f(t + c4 * h, x + h * (a41 * k1 + a42 * k2 + a43 * k3));
      k5 = f(t + c5 * h, x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      k6 = f(t + h, x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      x_new = x + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      k7 = f(last ? t1 : t + h, x_new);
    } catch (const Error& e) {
      return stop(IntegrationStatus::field_error, t, e.what());
    }
    const Vector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = error_norm(err, x, x_new, options.atol, options.rtol);
    if (!std::isfinite(en)) {
      ++out.rejected_steps;
      h *= 0.2;
      continue;
    }
    if (en > 1.0) {
      ++out.rejected_steps;
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
      continue;
    }

    const double t_new = last ? t1 : t + h;
    ++out.accepted_steps;
    if (monitor) {
      if (auto msg = monitor(t_new, x_new)) {
        return stop(IntegrationStatus::stopped_by_monitor, t_new, *msg);
      }
    }
    if (sample_times) {
      const Vector ydiff = x_new - x;
      const Vector bspl = h * k1 - ydiff;
      const Vector r4 = ydiff - h * k7 - bspl;
      const Vector r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      const double t_old = t;
      emit_samples_up_to(t_new, [&](double s) -> Vector {
        if (s == t_new) return x_new;
        const double th = (s - t_old) / h;
        const double th1 = 1.0 - th;
        return x + th * (ydiff + th1 * (bspl + th * (r4 + th1 * r5)));
      });
    } else {
      out.t.push_back(t_new);
      out.x.push_back(x_new);
    }
    t = t_new;
    x = std::move(x_new);
    k1 = std::move(k7);
    const double fac = (en == 0.0) ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
    h = std::min(h * fac, hmax);
  }
  return out;
}

}  // namespace lgp
