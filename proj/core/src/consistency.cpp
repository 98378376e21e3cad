#include "lgp/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/SVD>

#include "lgp/errors.hpp"
#include "lgp/rng.hpp"

namespace lgp {

namespace {

double smallest_eigenvalue(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

// Upsilon(p) * det diag(rho_desc o p_asc) for p > 0, or +inf when Upsilon is
// unbounded (one of the N-1 largest eigenvalues of A diag(p) vanishes).
double normalized_determinant(const Matrix& A, const Vector& rho_desc, const Vector& p) {
  const Index n = p.size();
  const Vector root = p.cwiseSqrt();
  const Matrix scaled = root.asDiagonal() * A * root.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (scaled + scaled.transpose()),
                                            Eigen::EigenvaluesOnly);
  const Vector lam = eig.eigenvalues().reverse();
  double denom = 1.0;
  for (Index j = 0; j + 1 < n; ++j) {
    if (!(lam(j) > 0.0)) return std::numeric_limits<double>::infinity();
    denom *= lam(j);
  }
  Vector p_asc = p;
  std::sort(p_asc.data(), p_asc.data() + n);
  double det = 1.0;
  for (Index j = 0; j < n; ++j) det *= rho_desc(j) * p_asc(j);
  return det / denom;
}

}  // namespace

Vector beta_vector(const TrainedModel& model, int k, const Vector& q,
                   BetaDiagnostics* diagnostics) {
  if (k != 0 && k != 1) throw DomainError("differential-operational index must be 0 or 1");
  require_finite(q, "q");
  const CholeskyKernelSpec& s = (k == 1) ? model.kernel().kinetic : model.kernel().elastic;
  const TrainingDataset& data = model.dataset();
  const Index d = data.size();
  const Matrix& A = s.gram();
  const Matrix& lam = s.metric();
  const Vector& rho = s.radial_eigenvalues();
  const double sign = (k == 0) ? 1.0 : -1.0;

  Vector beta(d);
  if (diagnostics) {
    diagnostics->positive_branch.assign(static_cast<std::size_t>(d), false);
    diagnostics->clamped = 0;
  }
  for (Index i = 0; i < d; ++i) {
    const DifferentialInput x = data.input(i);
    const Vector dx = model.delta_x_point(i);
    const Vector dp = q - x.q;
    const double proj = sign * dp.dot(lam * dx);
    const Vector& qk = (k == 1) ? x.qdot : x.q;

    Matrix nbar;
    double angle = 0.0;
    Vector p_low;
    Vector p_high;
    if (k == 1) {
      angle = dp.dot(lam * x.qdot);
      nbar = dx * x.qddot.transpose() + 2.0 * angle * dx * x.qdot.transpose() +
             proj * x.qdot * x.qdot.transpose();
      p_low = dx.cwiseProduct(x.qdot);
      p_high = dx.cwiseProduct(x.qddot);
    } else {
      nbar = dx * x.q.transpose() + proj * x.q * x.q.transpose();
      p_low = dx.cwiseProduct(x.q);
      p_high = p_low;
    }
    const double exact = smallest_eigenvalue(A.cwiseProduct(0.5 * (nbar + nbar.transpose())));

    const bool positive = !s.is_zero() && (p_low.array() > 0.0).all() &&
                          (p_high.array() > 0.0).all();
    double value = exact;
    if (positive) {
      const double head = normalized_determinant(A, rho, p_high);
      double drift_term = 0.0;
      bool finite = std::isfinite(head);
      if (k == 1) {
        if (angle >= 0.0) {
          const double t = normalized_determinant(A, rho, p_low);
          finite = finite && std::isfinite(t);
          drift_term = 2.0 * angle * t;
        } else {
          drift_term = 2.0 * angle * rho(0) * p_low.maxCoeff();
        }
      }
      double proj_term = 0.0;
      const Vector qk2 = qk.cwiseAbs2();
      if (proj >= 0.0) {
        const double t = normalized_determinant(A, rho, qk2);
        finite = finite && std::isfinite(t);
        proj_term = proj * t;
      } else {
        proj_term = proj * rho(0) * qk2.maxCoeff();
      }
      if (finite) {
        const double composite = head + drift_term + proj_term;
        if (composite > exact) {
          if (diagnostics) ++diagnostics->clamped;
        } else {
          value = composite;
        }
      }
    }
    if (diagnostics) diagnostics->positive_branch[static_cast<std::size_t>(i)] = positive;
    beta(i) = value;
  }
  return beta;
}

EigBoundReport eig_lower_bound_unchecked(const TrainedModel& model, int k, const Vector& q) {
  const CholeskyKernelSpec& s = (k == 1) ? model.kernel().kinetic : model.kernel().elastic;
  const TrainingDataset& data = model.dataset();
  const Index d = data.size();
  const Index n = model.dim();

  EigBoundReport r;
  r.q = q;
  r.k = k;
  BetaDiagnostics diag;
  r.beta = beta_vector(model, k, q, &diag);
  r.clamped = diag.clamped;

  const Matrix& lam = s.metric();
  const Eigen::Map<const Vector> vec_lambda(lam.data(), n * n);
  r.distance_matrix.resize(n * n, d);
  r.weights.resize(d);
  for (Index j = 0; j < d; ++j) {
    const Vector dj = q - data.Q.row(j).transpose();
    Eigen::Map<Matrix> col(r.distance_matrix.col(j).data(), n, n);
    col = dj * dj.transpose();
    r.weights(j) = std::exp(-vec_lambda.dot(r.distance_matrix.col(j)));
  }
  const Matrix prior = (k == 1) ? model.prior().inertia(q) : model.prior().stiffness(q);
  r.prior_lambda_min = smallest_eigenvalue(prior);
  r.bound = r.prior_lambda_min + r.weights.dot(r.beta);
  r.actual_lambda_min = smallest_eigenvalue(model.predict_matrix(k, q));
  r.satisfied = r.bound <= r.actual_lambda_min + 1e-10;
  return r;
}

EigBoundReport eig_lower_bound(const TrainedModel& model, int k, const Vector& q) {
  EigBoundReport r = eig_lower_bound_unchecked(model, k, q);
  if (!r.satisfied) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "eigenvalue lower bound " << r.bound << " exceeds lambda_min " << r.actual_lambda_min
        << " at q = [" << q.transpose() << "]";
    throw TheoremViolation(msg.str());
  }
  return r;
}

TrainingDataset resample_measurements(const TrainingDataset& truth, std::uint64_t seed,
                                      std::uint64_t index) {
  TrainingDataset noisy = truth;
  const Index n = truth.dim();
  std::mt19937_64 gen = make_generator(seed, RngStream::mc_sample, index);
  for (Index i = 0; i < truth.size(); ++i) {
    const auto si = static_cast<std::size_t>(i);
    const Vector omega = sample_gaussian(gen, truth.sigma_omega[si]);
    const Vector alpha = sample_gaussian(gen, truth.sigma_alpha[si]);
    const Vector eps = sample_gaussian(gen, truth.sigma_eps[si]);
    noisy.Xdot.row(i).head(n) += omega.transpose();
    noisy.Xdot.row(i).tail(n) += alpha.transpose();
    noisy.Y.row(i) += eps.transpose();
  }
  return noisy;
}

PdProbabilityResult pd_probability_mc(const TrainingDataset& truth, const PriorModel& prior,
                                      const LagrangianKernel& kernel,
                                      const PdProbabilityConfig& config) {
  if (config.n_samples < 1) throw ConfigError("pd-probability needs at least one sample");
  if (config.k != 0 && config.k != 1) throw ConfigError("k must be 0 or 1");
  require_finite(config.q, "q");
  PdProbabilityResult out;
  for (int s = 0; s < config.n_samples; ++s) {
    const TrainingDataset sample =
        resample_measurements(truth, config.seed, static_cast<std::uint64_t>(s));
    try {
      const TrainedModel model = train(sample, prior, kernel, config.noise_compensation);
      const Matrix H = model.predict_matrix(config.k, config.q);
      ++out.used;
      if (smallest_eigenvalue(H) > 0.0) ++out.positive;
    } catch (const NumericalError&) {
      ++out.discarded;
    } catch (const InternalConsistencyError&) {
      ++out.discarded;
    }
  }
  if (out.used > 0) {
    const double p = static_cast<double>(out.positive) / out.used;
    out.estimate = p;
    out.standard_error = std::sqrt(p * (1.0 - p) / out.used);
  }
  return out;
}

QuadraticFormReport check_quadratic_form(const TrainedModel& model, int points,
                                         std::uint64_t seed, double q_range) {
  const Index n = model.dim();
  std::mt19937_64 gen = make_generator(seed, RngStream::diagnostics, 0);
  std::uniform_real_distribution<double> uq(-q_range, q_range);
  std::uniform_real_distribution<double> ua(-3.0, 3.0);
  std::normal_distribution<double> z;
  QuadraticFormReport rep;
  rep.points = points;
  for (int p = 0; p < points; ++p) {
    Vector q(n), qd(n);
    for (Index j = 0; j < n; ++j) q(j) = uq(gen);
    for (Index j = 0; j < n; ++j) qd(j) = z(gen);
    const double a = ua(gen);
    const Eigen::JacobiSVD<Matrix> svd(model.predict_matrix(1, q));
    const double norm = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    const double s1 = std::max(0.5 * qd.squaredNorm() * norm, std::numeric_limits<double>::min());
    const double sa = a * a * s1;
    const double t = model.predict_kinetic(q, qd);
    const double td = model.predict_kinetic_direct(q, qd);
    const Vector aqd = a * qd;
    rep.max_scaling_error =
        std::max(rep.max_scaling_error, std::abs(model.predict_kinetic(q, aqd) - a * a * t) / sa);
    rep.max_direct_scaling_error = std::max(
        rep.max_direct_scaling_error, std::abs(model.predict_kinetic_direct(q, aqd) - a * a * td) / sa);
    rep.max_path_error = std::max(rep.max_path_error, std::abs(td - t) / s1);
  }
  return rep;
}

EquilibriumReport verify_equilibrium(const TrainedModel& model, double tol_abs,
                                     double tol_grad) {
  const Index n = model.dim();
  const Vector origin = Vector::Zero(n);
  auto check = [](double value, double tol) { return EquilibriumCheck{value, tol, value <= tol}; };
  EquilibriumReport r;
  r.potential = check(std::abs(model.predict_potential(origin)), tol_abs);
  r.potential_gradient = check(model.predict_potential_gradient(origin).norm(), tol_grad);
  r.lagrangian = check(std::abs(model.predict_lagrangian(origin, origin)), tol_abs);
  r.lagrangian_gradient = check(model.predict_lagrangian_gradient(origin, origin).norm(), tol_grad);
  return r;
}

}  // namespace lgp
