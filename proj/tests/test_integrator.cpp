#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lgp/errors.hpp"
#include "lgp/integrator.hpp"

namespace lgp {
namespace {

TEST(Integrator, ZeroFieldIsConstant) {
  const Vector x0 = (Vector(3) << 1.0, -2.0, 0.5).finished();
  const Trajectory tr = integrate([](double, const Vector& x) { return Vector(Vector::Zero(x.size())); },
                                  x0, 0.0, 5.0);
  ASSERT_TRUE(tr.completed());
  for (const Vector& x : tr.x) EXPECT_EQ(x, x0);
}

TEST(Integrator, ExponentialDecay) {
  IntegratorOptions opt;
  opt.rtol = 1e-10;
  opt.atol = 1e-12;
  const Trajectory tr = integrate([](double, const Vector& x) { return Vector(-x); },
                                  Vector::Ones(1), 0.0, 1.0, opt);
  ASSERT_TRUE(tr.completed());
  EXPECT_DOUBLE_EQ(tr.t.back(), 1.0);
  EXPECT_NEAR(tr.x.back()(0), std::exp(-1.0), 1e-8);
}

TEST(Integrator, HarmonicOscillatorEnergyOverHundredPeriods) {
  IntegratorOptions opt;
  opt.rtol = 1e-8;
  opt.atol = 1e-10;
  const auto f = [](double, const Vector& x) { return Vector((Vector(2) << x(1), -x(0)).finished()); };
  const Trajectory tr =
      integrate(f, (Vector(2) << 1.0, 0.0).finished(), 0.0, 200.0 * std::numbers::pi, opt);
  ASSERT_TRUE(tr.completed());
  double drift = 0.0;
  for (const Vector& x : tr.x) drift = std::max(drift, std::abs(0.5 * x.squaredNorm() - 0.5));
  EXPECT_LE(drift / 0.5, 1e-6);
}

TEST(Integrator, HarmonicOscillatorMatchesReferenceRk45) {
  // scipy.integrate.solve_ivp(method="RK45", rtol=1e-8, atol=1e-10) on the
  // same problem reports a maximum relative energy error of 1.5811910707e-6
  // with 7786 output points.
  IntegratorOptions opt;
  opt.rtol = 1e-8;
  opt.atol = 1e-10;
  const auto f = [](double, const Vector& x) { return Vector((Vector(2) << x(1), -x(0)).finished()); };
  const Trajectory tr =
      integrate(f, (Vector(2) << 1.0, 0.0).finished(), 0.0, 200.0 * std::numbers::pi, opt);
  double drift = 0.0;
  for (const Vector& x : tr.x) drift = std::max(drift, std::abs(0.5 * x.squaredNorm() - 0.5));
  EXPECT_NEAR(drift / 0.5, 1.5811910707e-6, 0.02 * 1.5811910707e-6);
  EXPECT_NEAR(static_cast<double>(tr.t.size()), 7786.0, 0.02 * 7786.0);
}

TEST(Integrator, DenseOutputAtSampleTimes) {
  IntegratorOptions opt;
  opt.rtol = 1e-10;
  opt.atol = 1e-12;
  std::vector<double> samples;
  for (int i = 0; i <= 20; ++i) samples.push_back(0.1 * i);
  const auto f = [](double t, const Vector&) { return Vector::Constant(1, std::cos(t)).eval(); };
  const Trajectory tr = integrate(f, Vector::Zero(1), 0.0, 2.0, opt, &samples);
  ASSERT_EQ(tr.t.size(), samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    EXPECT_EQ(tr.t[i], samples[i]);
    EXPECT_NEAR(tr.x[i](0), std::sin(samples[i]), 1e-9);
  }
}

TEST(Integrator, MonitorStopsAndFieldErrorsAreLogged) {
  const auto f = [](double, const Vector& x) { return Vector(x); };
  const StepMonitor stop = [](double, const Vector& x) -> std::optional<std::string> {
    if (x(0) > 2.0) return "too large";
    return std::nullopt;
  };
  const Trajectory a = integrate(f, Vector::Ones(1), 0.0, 5.0, {}, nullptr, stop);
  EXPECT_EQ(a.status, IntegrationStatus::stopped_by_monitor);
  ASSERT_FALSE(a.events.empty());
  EXPECT_EQ(a.events.back().message, "too large");
  EXPECT_LT(a.t.back(), 5.0);

  const auto bad = [](double t, const Vector& x) -> Vector {
    if (t > 0.5) throw NumericalError("field undefined");
    return x;
  };
  const Trajectory b = integrate(bad, Vector::Ones(1), 0.0, 1.0);
  EXPECT_EQ(b.status, IntegrationStatus::field_error);
  EXPECT_FALSE(b.events.empty());
  EXPECT_LE(b.t.back(), 0.5 + 1e-12);
}

TEST(Integrator, InvalidArguments) {
  const auto f = [](double, const Vector& x) { return Vector(x); };
  EXPECT_THROW((void)integrate(f, Vector::Ones(1), 1.0, 1.0), DomainError);
  IntegratorOptions opt;
  opt.rtol = 0.0;
  EXPECT_THROW((void)integrate(f, Vector::Ones(1), 0.0, 1.0, opt), ConfigError);
  const std::vector<double> unsorted{0.5, 0.2};
  EXPECT_THROW((void)integrate(f, Vector::Ones(1), 0.0, 1.0, {}, &unsorted), ConfigError);
}

TEST(Integrator, BitIdenticalReruns) {
  const auto f = [](double t, const Vector& x) {
    return Vector((Vector(2) << x(1), -std::sin(x(0)) + 0.1 * std::cos(t)).finished());
  };
  const Trajectory a = integrate(f, (Vector(2) << 1.0, 0.0).finished(), 0.0, 20.0);
  const Trajectory b = integrate(f, (Vector(2) << 1.0, 0.0).finished(), 0.0, 20.0);
  ASSERT_EQ(a.t.size(), b.t.size());
  for (std::size_t i = 0; i < a.t.size(); ++i) {
    EXPECT_EQ(a.t[i], b.t[i]);
    EXPECT_EQ(a.x[i], b.x[i]);
  }
  for (std::size_t i = 1; i < a.t.size(); ++i) EXPECT_GT(a.t[i], a.t[i - 1]);
}

}  // namespace
}  // namespace lgp
