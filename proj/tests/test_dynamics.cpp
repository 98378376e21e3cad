#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "lgp/errors.hpp"
#include "support/benchmark_model.hpp"
#include "support/fd.hpp"

namespace lgp {
namespace {

using test::rel_error;

double lambda_min(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

/// Model trained on diverse velocities/accelerations, whose inertia estimate
/// is positive definite over the test region.
const TrainedModel& informed_model() {
  static const TrainedModel m = [] {
    std::mt19937_64 gen(61);
    const PlantParams plant;
    Matrix sf(2, 2);
    sf << 1.0, 0.5, 0.0, 1.0;
    const LagrangianKernel lk{CholeskyKernelSpec(1, sf, Matrix::Identity(2, 2) / 4.0),
                              CholeskyKernelSpec::zero(0, 2),
                              make_kernel(KernelConfig{}).gravity};
    return train(test::diverse_dataset(gen, 40, plant), make_two_link_prior(plant.erroneous()), lk);
  }();
  return m;
}

TEST(Plant, InertiaAtOriginAndEquilibrium) {
  const PlantParams p;
  const Matrix M = plant_inertia(p, Vector::Zero(2));
  EXPECT_EQ(M, (Matrix(2, 2) << 5.0, 2.0, 2.0, 1.0).finished());
  EXPECT_EQ(plant_potential(p, Vector::Zero(2)), 0.0);
  EXPECT_EQ(plant_potential_gradient(p, Vector::Zero(2)).cwiseAbs().maxCoeff(), 0.0);
  const PlantTruth t = plant_truth(p, Vector::Zero(2), Vector::Zero(2));
  EXPECT_EQ(t.V, 0.0);
  EXPECT_EQ(t.C.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Plant, SkewSymmetryAndDerivatives) {
  const PlantParams p;
  std::mt19937_64 gen(62);
  for (int t = 0; t < 100; ++t) {
    const Vector q = test::uniform_vector(gen, 2, -3, 3);
    const Vector v = test::uniform_vector(gen, 2, -3, 3);
    const PlantTruth tr = plant_truth(p, q, v);
    const Matrix Mdot = plant_inertia_partial(p, q, 0) * v(0) + plant_inertia_partial(p, q, 1) * v(1);
    const Matrix N = Mdot - 2.0 * tr.C;
    EXPECT_LE((N + N.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    const auto V = [&](const Vector& x) { return plant_potential(p, x); };
    EXPECT_LT(rel_error(tr.g, test::fd_gradient(V, q)), 1e-6);
    for (Index m = 0; m < 2; ++m) {
      const double h = 1e-6;
      Vector qp = q, qm = q;
      qp(m) += h;
      qm(m) -= h;
      const Matrix fd = (plant_inertia(p, qp) - plant_inertia(p, qm)) / (2 * h);
      EXPECT_LE((plant_inertia_partial(p, q, m) - fd).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(Plant, TorqueIsEulerLagrangeOfTrueLagrangian) {
  const PlantParams p;
  std::mt19937_64 gen(63);
  const double h = 1e-4;
  const auto L = [&](const Vector& q, const Vector& v) {
    return 0.5 * v.dot(plant_inertia(p, q) * v) - plant_potential(p, q);
  };
  for (int t = 0; t < 50; ++t) {
    const Vector q = test::uniform_vector(gen, 2, -2, 2);
    const Vector v = test::uniform_vector(gen, 2, -2, 2);
    const Vector a = test::uniform_vector(gen, 2, -2, 2);
    Vector fd(2);
    for (Index k = 0; k < 2; ++k) {
      const auto dL = [&](const Vector& qq, const Vector& vv) {
        Vector vp = vv, vm = vv;
        vp(k) += h;
        vm(k) -= h;
        return (L(qq, vp) - L(qq, vm)) / (2 * h);
      };
      const auto along = [&](double s) { return dL(q + s * v + 0.5 * s * s * a, v + s * a); };
      Vector qp = q, qm = q;
      qp(k) += h;
      qm(k) -= h;
      fd(k) = (along(h) - along(-h)) / (2 * h) - (L(qp, v) - L(qm, v)) / (2 * h);
    }
    EXPECT_LT(rel_error(plant_torque(p, q, v, a), fd), 1e-6);
  }
}

TEST(Plant, FreeMotionConservesEnergy) {
  const PlantParams p;
  IntegratorOptions opt;
  opt.rtol = 1e-10;
  opt.atol = 1e-12;
  const Vector x0 = (Vector(4) << 1.0, -0.5, 0.0, 0.3).finished();
  const SimResult r = simulate_plant(p, [](double, const Vector&) { return Vector(Vector::Zero(2)); },
                                     x0, 10.0, sample_grid(0.0, 10.0, 0.01), opt);
  ASSERT_EQ(r.status, IntegrationStatus::completed);
  const double e0 = r.energy_true.front();
  double drift = 0.0;
  for (double e : r.energy_true) drift = std::max(drift, std::abs(e - e0) / std::abs(e0));
  EXPECT_LE(drift, 1e-8);
}

TEST(Plant, ParameterValidationAndPriors) {
  PlantParams p;
  p.m1 = -1.0;
  EXPECT_THROW(p.validate(), ConfigError);
  const PlantParams e = PlantParams{}.erroneous();
  EXPECT_DOUBLE_EQ(e.m1, 0.5);
  EXPECT_DOUBLE_EQ(e.l2, 1.5);
  const PriorModel prior = make_two_link_prior(e);
  const PriorModel rebuilt = make_prior(prior.id(), prior.params(), 2);
  const Vector q = (Vector(2) << 0.3, -0.8).finished();
  EXPECT_EQ(prior.inertia(q), rebuilt.inertia(q));
  EXPECT_EQ(prior.potential(q), plant_potential(e, q));
  EXPECT_THROW((void)make_prior("nope", {}, 2), ConfigError);
  EXPECT_EQ(make_prior("zero", {}, 2).inertia(q).cwiseAbs().maxCoeff(), 0.0);
}

TEST(LearnedDynamics, OriginIsFixedPoint) {
  const TrainedModel& m = informed_model();
  ASSERT_GT(lambda_min(m.predict_matrix(1, Vector::Zero(2))), 0.0);
  const Vector f = lgp_vector_field(m, Vector::Zero(4), Vector::Zero(2));
  EXPECT_LE(f.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(LearnedDynamics, InverseConsistencyWithTorque) {
  const TrainedModel& m = informed_model();
  std::mt19937_64 gen(64);
  for (int t = 0; t < 50; ++t) {
    const Vector q = test::uniform_vector(gen, 2, -1, 1);
    const Vector v = test::uniform_vector(gen, 2, -1, 1);
    const Vector a = test::uniform_vector(gen, 2, -2, 2);
    ASSERT_GT(lambda_min(m.predict_matrix(1, q)), 0.0);
    Vector x(4);
    x << q, v;
    const Vector f = lgp_vector_field(m, x, m.predict_torque(q, v, a));
    EXPECT_EQ(f.head(2), v);
    EXPECT_LT(rel_error(Vector(f.tail(2)), a), 1e-10);
  }
}

TEST(LearnedDynamics, FreeFlowIsLossless) {
  const TrainedModel& m = informed_model();
  std::mt19937_64 gen(65);
  for (int t = 0; t < 30; ++t) {
    Vector x(4);
    x << test::uniform_vector(gen, 2, -1, 1), test::uniform_vector(gen, 2, -1, 1);
    const Vector f = lgp_vector_field(m, x, Vector::Zero(2));
    const double h = 1e-6;
    const Vector xp = x + h * f, xm = x - h * f;
    const double dE = (m.predict_energy(xp.head(2), xp.tail(2)) -
                       m.predict_energy(xm.head(2), xm.tail(2))) / (2 * h);
    EXPECT_LE(std::abs(dE), 1e-6 * std::max(1.0, std::abs(m.predict_energy(x.head(2), x.tail(2)))));
  }
}

TEST(LearnedDynamics, NonPositiveInertiaLeavesDomain) {
  const TrainedModel m = train(TrainingDataset::empty(2), PriorModel::zero(2),
                               make_kernel(KernelConfig{}));
  try {
    (void)lgp_vector_field(m, Vector::Zero(4), Vector::Zero(2));
    FAIL() << "expected a domain exit";
  } catch (const DomainExitError& e) {
    EXPECT_LE(e.lambda_min(), 0.0);
    EXPECT_EQ(e.q().size(), 2);
  }
  const SimResult r = simulate_lgp_free(m, PlantParams{}, Vector::Zero(4), 1.0, sample_grid(0, 1, 0.1));
  EXPECT_NE(r.status, IntegrationStatus::completed);
  EXPECT_FALSE(r.events.empty());
}

TEST(LearnedDynamics, EnergyExperimentOnInformedModel) {
  const TrainedModel& m = informed_model();
  EnergyConfig cfg;
  cfg.amplitudes = {0.0, 0.1, 0.5};
  cfg.t_end = 5.0;
  const std::vector<EnergyRun> runs = run_energy_experiment(m, cfg);
  ASSERT_EQ(runs.size(), 3u);
  for (const EnergyRun& r : runs) {
    ASSERT_EQ(r.sim.status, IntegrationStatus::completed) << r.amplitude;
    EXPECT_LE(r.internal_drift, 1e-6) << r.amplitude;
  }
  for (const Vector& x : runs[0].sim.x) EXPECT_LE(x.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Controllers, PdLaw) {
  const PdGains g = PdGains::uniform(10.0, 10.0, 2);
  Reference ref{Vector::Zero(2), Vector::Zero(2), Vector::Zero(2)};
  Vector x = Vector::Zero(4);
  EXPECT_EQ(pd_controller(g, x, ref), Vector(Vector::Zero(2)));
  x(0) = 0.1;
  const Vector tau = pd_controller(g, x, ref);
  EXPECT_NEAR(tau(0), -1.0, 1e-15);
  EXPECT_EQ(tau(1), 0.0);
}

TEST(Controllers, SinusoidalReferenceDerivatives) {
  const ReferenceFn ref = sinusoidal_reference(std::numbers::pi / 2, 2);
  const double t = 0.7, h = 1e-6;
  const Reference r = ref(t);
  EXPECT_NEAR(r.q(1), std::numbers::pi / 2 * std::sin(t), 1e-15);
  EXPECT_LT(rel_error(r.qdot, Vector((ref(t + h).q - ref(t - h).q) / (2 * h))), 1e-8);
  EXPECT_LT(rel_error(r.qddot, Vector((ref(t + h).qdot - ref(t - h).qdot) / (2 * h))), 1e-8);
}

TEST(Controllers, PerfectModelTracksExactly) {
  const PlantParams p;
  const ReferenceFn ref = sinusoidal_reference(std::numbers::pi / 2, 2);
  const PdGains g = PdGains::uniform(10.0, 10.0, 2);
  const Controller c = [&](double t, const Vector& x) {
    const PlantTruth tr = plant_truth(p, x.head(2), x.tail(2));
    return feedforward_pd_controller(tr.M, tr.C, tr.g, g, x, ref(t));
  };
  Vector x0(4);
  x0 << ref(0).q, ref(0).qdot;
  IntegratorOptions opt;
  opt.rtol = 1e-10;
  opt.atol = 1e-12;
  const SimResult r = simulate_plant(p, c, x0, 10.0, sample_grid(0.0, 10.0, 0.05), opt);
  ASSERT_EQ(r.status, IntegrationStatus::completed);
  const TrackingMetrics tm = tracking_metrics(r, ref);
  EXPECT_LE(tm.max_position, 1e-6);
  EXPECT_LE(tm.max_velocity, 1e-6);
}

TEST(Controllers, ZeroReferenceFromEquilibrium) {
  TrackingConfig cfg;
  cfg.amplitude = 0.0;
  cfg.t_end = 3.0;
  const TrackingResult r = run_tracking_experiment(informed_model(), cfg);
  EXPECT_EQ(r.pd_metrics.max_position, 0.0);
  EXPECT_LE(r.lgp_metrics.max_position, 1e-6);
}

TEST(Controllers, SampleGrid) {
  const std::vector<double> g = sample_grid(0.0, 1.0, 0.25);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_THROW((void)sample_grid(0.0, 1.0, 0.0), ConfigError);
}

}  // namespace
}  // namespace lgp
