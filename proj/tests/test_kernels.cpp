#include <gtest/gtest.h>

#include <array>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "lgp/errors.hpp"
#include "lgp/kernels.hpp"
#include "support/benchmark_model.hpp"
#include "support/fd.hpp"

namespace lgp {
namespace {

using test::fd_gradient;
using test::fd_jacobian;
using test::rel_error;

MetricKernel sample_metric_kernel() {
  Matrix lam(2, 2);
  lam << 0.8, 0.2, 0.2, 0.4;
  return MetricKernel(2.5, lam);
}

TEST(MetricKernel, ValueAtCoincidenceIsVariance) {
  const MetricKernel k = sample_metric_kernel();
  EXPECT_DOUBLE_EQ(k.eval(Vector::Zero(2)), 2.5);
  Vector q(2), p(2);
  q << 0.3, -0.7;
  p << -1.1, 0.4;
  EXPECT_DOUBLE_EQ(k.eval(q, p), k.eval(p, q));
}

TEST(MetricKernel, GradientAndHessianMatchFiniteDifferences) {
  const MetricKernel k = sample_metric_kernel();
  std::mt19937_64 gen(11);
  for (int t = 0; t < 100; ++t) {
    const Vector d = test::uniform_vector(gen, 2, -2.0, 2.0);
    const auto f = [&](const Vector& x) { return k.eval(x); };
    EXPECT_LT(rel_error(k.gradient(d), fd_gradient(f, d)), 1e-5);
    const auto g = [&](const Vector& x) { return Vector(k.gradient(x)); };
    EXPECT_LT(rel_error(k.hessian(d), fd_jacobian(g, d)), 1e-5);
    EXPECT_EQ(k.cross_hessian(d), Matrix(-k.hessian(d)));
  }
}

TEST(MetricKernel, MixedDerivativesMatchLowerOrderDifferences) {
  const MetricKernel k = sample_metric_kernel();
  std::mt19937_64 gen(12);
  const double h = 1e-6;
  for (int t = 0; t < 100; ++t) {
    const Vector d = test::uniform_vector(gen, 2, -2.0, 2.0);
    // order 3: q0 q1 differentiated in q, q0 in q'
    std::array<int, 2> qi{0, 1};
    std::array<int, 1> pi{0};
    std::array<int, 1> qi2{0};
    std::array<int, 1> pi2{1};
    std::array<int, 1> pj{0};
    const auto third = k.derivative(d, qi, pi);
    Vector dp = d, dm = d;
    dp(0) += h;
    dm(0) -= h;
    // d/dq'_0 = -d/dd_0 on a function of d = q - q'
    const double fd3 =
        -(k.derivative(dp, qi, {}) - k.derivative(dm, qi, {})) / (2.0 * h);
    EXPECT_LT(rel_error(third, fd3), 1e-5);
    // order 4: add q'_1
    std::array<int, 2> pi4{0, 1};
    const double fourth = k.derivative(d, qi, pi4);
    Vector ep = d, em = d;
    ep(1) += h;
    em(1) -= h;
    const double fd4 = -(k.derivative(ep, qi, pi) - k.derivative(em, qi, pi)) / (2.0 * h);
    EXPECT_LT(rel_error(fourth, fd4), 1e-5);
    std::array<int, 2> swapped{1, 0};
    EXPECT_NEAR(k.derivative(d, swapped, pi), third, 1e-14 * std::abs(third) + 1e-300);
    EXPECT_NEAR(k.derivative(d, qi2, pi2), -k.hessian(d)(0, 1), 1e-15);
    EXPECT_NEAR(k.derivative(d, qi2, pj), -k.hessian(d)(0, 0), 1e-15);
  }
}

TEST(MetricKernel, RejectsInvalidMetrics) {
  Matrix indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(MetricKernel(1.0, indefinite), ConfigError);
  Matrix asym(2, 2);
  asym << 1.0, 0.1, 0.0, 1.0;
  EXPECT_THROW(MetricKernel(1.0, asym), ConfigError);
  EXPECT_THROW(MetricKernel(-1.0, Matrix::Identity(2, 2)), ConfigError);
  const MetricKernel k(1.0, Matrix::Identity(2, 2));
  std::array<int, 5> too_many{0, 0, 0, 0, 0};
  EXPECT_THROW((void)k.derivative(Vector::Zero(2), too_many, {}), UnsupportedOperation);
}

TEST(CholeskyKernel, ThetaEqualsWeightTimesGramAndFactorProduct) {
  std::mt19937_64 gen(13);
  const LagrangianKernel lk = test::rich_kernel(gen);
  const CholeskyKernelSpec& s = lk.kinetic;
  for (int t = 0; t < 50; ++t) {
    const Vector q = test::uniform_vector(gen, 2, -1.0, 1.0);
    const Vector p = test::uniform_vector(gen, 2, -1.0, 1.0);
    const Matrix th = s.theta(q, p);
    EXPECT_LT(rel_error(th, s.weight(q - p) * s.gram()), 1e-14);
    Matrix R(2, 2);
    for (Index n = 0; n < 2; ++n)
      for (Index m = 0; m < 2; ++m) R(n, m) = s.factor_entry(n, m, q, p);
    EXPECT_LT(rel_error(th, R.transpose() * R), 1e-14);
    EXPECT_EQ(R(1, 0), 0.0);
  }
  EXPECT_LT(rel_error(s.theta(Vector::Zero(2), Vector::Zero(2)), s.gram()), 1e-15);
}

TEST(CholeskyKernel, PhiIsDirectionalDerivativeOfTheta) {
  std::mt19937_64 gen(14);
  const LagrangianKernel lk = test::rich_kernel(gen);
  for (const CholeskyKernelSpec* s : {&lk.kinetic, &lk.elastic}) {
    for (int t = 0; t < 100; ++t) {
      const Vector qi = test::uniform_vector(gen, 2, -1.0, 1.0);
      const Vector q = test::uniform_vector(gen, 2, -1.0, 1.0);
      const Vector dx = test::uniform_vector(gen, 2, -1.0, 1.0);
      const double h = 1e-6;
      const Matrix fd = (s->theta(qi + h * dx, q) - s->theta(qi - h * dx, q)) / (2.0 * h);
      EXPECT_LT(rel_error(s->phi(qi, dx, q), fd), 1e-5);
    }
  }
}

TEST(CholeskyKernel, KappaIsQuarticInRegressor) {
  std::mt19937_64 gen(15);
  const LagrangianKernel lk = test::rich_kernel(gen);
  const Vector q = test::uniform_vector(gen, 2, -1.0, 1.0);
  const Vector p = test::uniform_vector(gen, 2, -1.0, 1.0);
  const Vector v = test::uniform_vector(gen, 2, -1.0, 1.0);
  const Vector w = test::uniform_vector(gen, 2, -1.0, 1.0);
  const double k1 = lk.kinetic.kappa(q, v, p, w);
  EXPECT_NEAR(lk.kinetic.kappa(q, 2.0 * v, p, w), 4.0 * k1, 1e-14 * std::abs(k1) + 1e-300);
  EXPECT_EQ(lk.kinetic.kappa(q, Vector::Zero(2), p, w), 0.0);
  // elastic: regressor is q itself, so it vanishes at the origin
  EXPECT_EQ(lk.elastic.kappa(q, v, Vector::Zero(2), w), 0.0);
  const Vector xv = v.cwiseProduct(w);
  EXPECT_NEAR(k1, 0.25 * xv.dot(lk.kinetic.theta(q, p) * xv), 1e-15);
}

TEST(CholeskyKernel, GramOfKappaIsPositiveSemidefinite) {
  std::mt19937_64 gen(16);
  const LagrangianKernel lk = test::rich_kernel(gen);
  std::vector<std::pair<Vector, Vector>> xs;
  for (int i = 0; i < 50; ++i)
    xs.emplace_back(test::uniform_vector(gen, 2, -1.0, 1.0), test::uniform_vector(gen, 2, -2.0, 2.0));
  for (const CholeskyKernelSpec* s : {&lk.kinetic, &lk.elastic}) {
    Matrix K(50, 50);
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j < 50; ++j)
        K(i, j) = s->kappa(xs[i].first, xs[i].second, xs[j].first, xs[j].second);
    EXPECT_LT((K - K.transpose()).cwiseAbs().maxCoeff(), 1e-14 * K.cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(K, Eigen::EigenvaluesOnly);
    EXPECT_GE(eig.eigenvalues()(0), -1e-8 * eig.eigenvalues().maxCoeff());
  }
}

TEST(CholeskyKernel, RadialSpectrumIsOrderedAndOrthonormal) {
  std::mt19937_64 gen(17);
  const LagrangianKernel lk = test::rich_kernel(gen);
  const CholeskyKernelSpec& s = lk.kinetic;
  const Vector& ev = s.radial_eigenvalues();
  EXPECT_GE(ev(0), ev(1));
  const Matrix& V = s.radial_eigenvectors();
  EXPECT_LT(rel_error(Matrix(V.transpose() * V), Matrix::Identity(2, 2)), 1e-14);
  EXPECT_LT(rel_error(Matrix(V * ev.asDiagonal() * V.transpose()), s.gram()), 1e-14);
}

TEST(CholeskyKernel, ZeroSpecAndValidation) {
  const CholeskyKernelSpec z = CholeskyKernelSpec::zero(1, 2);
  EXPECT_TRUE(z.is_zero());
  EXPECT_EQ(z.theta(Vector::Ones(2), Vector::Zero(2)).cwiseAbs().maxCoeff(), 0.0);
  Matrix lower(2, 2);
  lower << 1.0, 0.0, 0.5, 1.0;
  EXPECT_THROW(CholeskyKernelSpec(1, lower, Matrix::Identity(2, 2)), ConfigError);
  Matrix zero_diag(2, 2);
  zero_diag << 1.0, 0.5, 0.0, 0.0;
  EXPECT_THROW(CholeskyKernelSpec(1, zero_diag, Matrix::Identity(2, 2)), ConfigError);
  EXPECT_THROW(CholeskyKernelSpec(2, Matrix::Identity(2, 2), Matrix::Identity(2, 2)), ConfigError);
}

}  // namespace
}  // namespace lgp
