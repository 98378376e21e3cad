#include "lgp/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lgp/errors.hpp"
#include "lgp/log.hpp"

namespace lgp {

DifferentialInput TrainingDataset::input(Index i) const {
  const Index n = dim();
  return {Q.row(i).transpose(), Xdot.row(i).head(n).transpose(),
          Xdot.row(i).tail(n).transpose()};
}

Vector TrainingDataset::stacked_outputs() const {
  const Index n = dim();
  Vector y(size() * n);
  for (Index i = 0; i < size(); ++i) y.segment(i * n, n) = Y.row(i).transpose();
  return y;
}

namespace {

void check_covariances(const std::vector<Matrix>& covs, Index d, Index n, const char* what) {
  if (static_cast<Index>(covs.size()) != d) {
    throw ConfigError(std::string(what) + ": expected one covariance per training point");
  }
  for (const Matrix& S : covs) {
    if (S.rows() != n || S.cols() != n || !S.allFinite()) {
      throw ConfigError(std::string(what) + ": covariance must be a finite N x N matrix");
    }
    const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
    if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw ConfigError(std::string(what) + ": covariance is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
      throw ConfigError(std::string(what) + ": covariance is not positive semidefinite");
    }
  }
}

}  // namespace

void TrainingDataset::validate() const {
  const Index d = size();
  const Index n = dim();
  if (n <= 0) throw ConfigError("dataset dimension must be positive");
  if (Xdot.rows() != d || Xdot.cols() != 2 * n || Y.rows() != d || Y.cols() != n) {
    throw ConfigError("dataset matrices have inconsistent shapes");
  }
  if (!Q.allFinite() || !Xdot.allFinite() || !Y.allFinite()) {
    throw ConfigError("dataset contains non-finite entries");
  }
  check_covariances(sigma_omega, d, n, "sigma_omega");
  check_covariances(sigma_alpha, d, n, "sigma_alpha");
  check_covariances(sigma_eps, d, n, "sigma_eps");
}

TrainingDataset TrainingDataset::empty(Index dim) {
  TrainingDataset data;
  data.Q.resize(0, dim);
  data.Xdot.resize(0, 2 * dim);
  data.Y.resize(0, dim);
  return data;
}

namespace {

// Symmetrizes; negative eigenvalues close to zero are clipped, larger ones are
// an error. A PSD input comes back untouched.
Matrix symmetrize_psd(const Matrix& S) {
  Matrix sym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const Vector& lam = eig.eigenvalues();
  const double lmin = lam.minCoeff();
  if (lmin >= 0.0) return sym;
  const double scale = std::max(lam.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if (lmin < -1e-6 * scale) {
    std::ostringstream msg;
    msg << "compensated noise covariance is indefinite (lambda_min = " << lmin << ")";
    throw InternalConsistencyError(msg.str());
  }
  if (lmin < -1e-10 * scale) {
    std::ostringstream msg;
    msg << "clipping negative eigenvalue " << lmin << " of a compensated noise covariance";
    warn(msg.str());
  }
  return eig.eigenvectors() * lam.cwiseMax(0.0).asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Matrix heteroscedastic_noise(Index i, const TrainingDataset& data, const PriorModel& prior,
                             const CholeskyKernelSpec& spec_T) {
  const DifferentialInput x = data.input(i);
  const Matrix& s_alpha = data.sigma_alpha[static_cast<std::size_t>(i)];
  const Matrix& s_omega = data.sigma_omega[static_cast<std::size_t>(i)];
  const Matrix& s_eps = data.sigma_eps[static_cast<std::size_t>(i)];

  const Matrix M0 = prior.inertia(x.q);
  const Matrix C0 = prior.inertia_velocity_jacobian(x.q, x.qdot);
  Matrix total = M0 * s_alpha * M0.transpose() + C0 * s_omega * C0.transpose();
  if (!spec_T.is_zero()) {
    const Matrix& A = spec_T.gram();
    Matrix cross = s_alpha.cwiseProduct(A);
    cross.diagonal().setZero();
    total += cross;
    total.diagonal() += A * s_alpha.diagonal();
    const Vector a_v2 = A * x.qdot.cwiseAbs2();
    const double metric_weight = spec_T.metric().diagonal().dot(s_omega.diagonal());
    total.diagonal() += metric_weight * a_v2;
  }
  total += s_eps;
  return symmetrize_psd(total);
}

PriorEnergyVariances prior_energy_variances(const LagrangianKernel& kernel, const Vector& q,
                                            const Vector& qdot) {
  PriorEnergyVariances out;
  out.kinetic = kernel.kinetic.is_zero() ? 0.0 : kernel.kinetic.kappa(q, qdot, q, qdot);
  out.potential = potential_value(kernel, q, q);
  return out;
}

JointGram assemble_joint(const TrainingDataset& data, const PriorModel& prior,
                         const LagrangianKernel& kernel, bool noise_compensation) {
  data.validate();
  const Index d = data.size();
  const Index n = kernel.dim();
  if (data.dim() != n || prior.dim() != n) {
    throw ConfigError("dataset, prior and kernel dimensions differ");
  }
  JointGram joint;
  joint.K0 = equilibrium_gram(kernel);
  {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(joint.K0, Eigen::EigenvaluesOnly);
    const double lmax = eig.eigenvalues().maxCoeff();
    const double lmin = eig.eigenvalues().minCoeff();
    if (!(lmax > 0.0) || !(lmin > 1e-14 * lmax)) {
      throw ConfigError("equilibrium covariance K0 is numerically singular");
    }
  }
  joint.Ky.resize(d * n, d * n);
  joint.Ky0.resize(d * n, n + 1);
  joint.my.resize(d * n);

  std::vector<DifferentialInput> inputs;
  inputs.reserve(static_cast<std::size_t>(d));
  for (Index i = 0; i < d; ++i) inputs.push_back(data.input(i));

  for (Index i = 0; i < d; ++i) {
    const DifferentialInput& xi = inputs[static_cast<std::size_t>(i)];
    joint.my.segment(i * n, n) = prior.torque(xi.q, xi.qdot, xi.qddot);
    joint.Ky0.middleRows(i * n, n) = torque_equilibrium_block(kernel, xi.q);
    for (Index j = i; j < d; ++j) {
      const Matrix block = torque_kernel_block(kernel, xi, inputs[static_cast<std::size_t>(j)]);
      joint.Ky.block(i * n, j * n, n, n) = block;
      if (j != i) joint.Ky.block(j * n, i * n, n, n) = block.transpose();
    }
    const Matrix diag_block = joint.Ky.block(i * n, i * n, n, n);
    Matrix noise = noise_compensation
                       ? heteroscedastic_noise(i, data, prior, kernel.kinetic)
                       : data.sigma_eps[static_cast<std::size_t>(i)];
    joint.Ky.block(i * n, i * n, n, n) = 0.5 * (diag_block + diag_block.transpose()) + noise;
  }
  return joint;
}

SchurSolution solve_schur(const JointGram& joint, const Vector& delta_y,
                          const ConditionOptions& options) {
  const Matrix& K0 = options.k0_override ? *options.k0_override : joint.K0;
  const Index n = joint.Ky.rows();
  SchurSolution out;
  Eigen::LLT<Matrix> llt0(K0);
  if (llt0.info() != Eigen::Success) {
    throw ConfigError("equilibrium covariance K0 is not positive definite");
  }
  if (n == 0) {
    out.delta_x.resize(0);
    out.w = Vector::Zero(K0.rows());
    return out;
  }
  if (delta_y.size() != n) throw DomainError("innovation has the wrong length");

  // Schur complement and its factorization in extended precision; K_D is
  // routinely conditioned beyond 1e13 at small torque noise.
  using MatrixL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  const MatrixL K0l = K0.cast<long double>();
  const MatrixL Ky0l = joint.Ky0.cast<long double>();
  Eigen::LLT<MatrixL> llt0l(K0l);
  if (llt0l.info() != Eigen::Success) {
    throw ConfigError("equilibrium covariance K0 is not positive definite");
  }
  MatrixL KDl = joint.Ky.cast<long double>() - Ky0l * llt0l.solve(MatrixL(Ky0l.transpose()));
  KDl = (0.5L * (KDl + KDl.transpose())).eval();
  const Matrix KD = KDl.cast<double>();
  const long double base = KDl.trace() / static_cast<long double>(n);
  if (!std::isfinite(static_cast<double>(base)) || base <= 0.0L) {
    throw IllConditionedError("Schur complement has non-positive trace", INFINITY);
  }
  const VectorL yl = delta_y.cast<long double>();
  const long double dy_norm = yl.norm();
  // plain factorization first, then 1e-10 .. 1e-4 relative
  std::vector<long double> levels = {0.0L};
  for (long double rel = 1e-10L; rel <= 1e-4L * (1.0L + 1e-9L); rel *= 10.0L) levels.push_back(rel);
  for (long double rel : levels) {
    const long double lambda = rel * base;
    MatrixL Kj = KDl;
    Kj.diagonal().array() += lambda;
    Eigen::LLT<MatrixL> llt(Kj);
    if (llt.info() != Eigen::Success) continue;
    const VectorL diag = llt.matrixLLT().diagonal();
    if ((diag.array() <= 0.0L).any() || !diag.allFinite()) continue;
    VectorL x = llt.solve(yl);
    long double residual = 0.0L;
    int steps = 0;
    for (;; ++steps) {
      const VectorL r = yl - Kj * x;
      residual = (dy_norm > 0.0L) ? r.norm() / dy_norm : r.norm();
      if (!std::isfinite(static_cast<double>(residual))) break;
      if (residual <= options.residual_tolerance || steps >= 8) break;
      x += llt.solve(r);
    }
    if (!(residual <= options.residual_tolerance)) continue;
    out.delta_x = x.cast<double>();
    out.w = llt0l.solve(VectorL(Ky0l.transpose() * x)).cast<double>();
    out.info.jitter = static_cast<double>(lambda);
    out.info.log_det = static_cast<double>(2.0L * diag.array().log().sum());
    out.info.quadratic = static_cast<double>(yl.dot(x));
    out.info.residual = static_cast<double>(residual);
    out.info.refinement_steps = steps;
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(KD, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  const double cond = (lmin > 0.0) ? lmax / lmin : INFINITY;
  std::ostringstream msg;
  msg << "K_D could not be factorized to the requested accuracy (condition estimate " << cond
      << ")";
  throw IllConditionedError(msg.str(), cond);
}

double gaussian_log_likelihood(const ConditioningInfo& info, Index n) {
  return -0.5 * info.quadratic - 0.5 * info.log_det -
         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

// ---------------------------------------------------------------------------

TrainedModel::TrainedModel(TrainingDataset data, PriorModel prior, LagrangianKernel kernel,
                           Vector delta_y, Vector delta_x, Vector w, ConditioningInfo info)
    : data_(std::move(data)),
      prior_(std::move(prior)),
      kernel_(std::move(kernel)),
      delta_y_(std::move(delta_y)),
      delta_x_(std::move(delta_x)),
      w_(std::move(w)),
      info_(info) {
  const Index n = kernel_.dim();
  if (delta_x_.size() != data_.size() * n || delta_y_.size() != delta_x_.size() ||
      w_.size() != n + 1) {
    throw ConfigError("trained model state has inconsistent sizes");
  }
}

double TrainedModel::log_likelihood() const {
  return gaussian_log_likelihood(info_, delta_y_.size());
}

Vector TrainedModel::delta_x_point(Index i) const {
  const Index n = dim();
  return delta_x_.segment(i * n, n);
}

const CholeskyKernelSpec& TrainedModel::spec(int k) const {
  if (k == 1) return kernel_.kinetic;
  if (k == 0) return kernel_.elastic;
  throw DomainError("differential-operational index must be 0 or 1");
}

Matrix TrainedModel::basis_matrix(int k, Index i, const Vector& q) const {
  const CholeskyKernelSpec& s = spec(k);
  const DifferentialInput x = data_.input(i);
  const Vector dx = delta_x_point(i);
  const Vector dp = q - x.q;
  const Matrix& lam = s.metric();
  const double sign = (k == 0) ? 1.0 : -1.0;
  const double proj = sign * dp.dot(lam * dx);
  Matrix nbar;
  if (k == 1) {
    const double angle = dp.dot(lam * x.qdot);
    nbar = dx * x.qddot.transpose() + 2.0 * angle * dx * x.qdot.transpose() +
           proj * x.qdot * x.qdot.transpose();
  } else {
    nbar = dx * x.q.transpose() + proj * x.q * x.q.transpose();
  }
  return nbar.cwiseProduct(s.theta(x.q, q));
}

Matrix TrainedModel::basis_matrix_general(int k, Index i, const Vector& q) const {
  const CholeskyKernelSpec& s = spec(k);
  const DifferentialInput x = data_.input(i);
  const Vector dx = delta_x_point(i);
  const Matrix theta = s.theta(x.q, q);
  const Matrix phi_dx = s.phi(x.q, dx, q);
  if (k == 1) {
    // d/dtau [dx qdot_i^T o Theta(q_i(tau), q)] with dq_i/dtau = qdot_i.
    const Matrix dtheta = s.phi(x.q, x.qdot, q);
    return (dx * x.qddot.transpose()).cwiseProduct(theta) +
           (dx * x.qdot.transpose()).cwiseProduct(dtheta) -
           0.5 * (x.qdot * x.qdot.transpose()).cwiseProduct(phi_dx);
  }
  return (dx * x.q.transpose()).cwiseProduct(theta) +
         0.5 * (x.q * x.q.transpose()).cwiseProduct(phi_dx);
}

Matrix TrainedModel::predict_matrix(int k, const Vector& q) const {
  require_finite(q, "q");
  const CholeskyKernelSpec& s = spec(k);
  Matrix H = (k == 1) ? prior_.inertia(q) : prior_.stiffness(q);
  if (!s.is_zero()) {
    const Matrix& A = s.gram();
    const Matrix& lam = s.metric();
    for (Index i = 0; i < data_.size(); ++i) {
      const DifferentialInput x = data_.input(i);
      const Vector dx = delta_x_point(i);
      const Vector d = x.q - q;
      const double e = s.weight(d);
      if (e == 0.0) continue;
      const double proj = d.dot(lam * dx);
      Matrix B;
      if (k == 1) {
        const double drift = d.dot(lam * x.qdot);
        const Matrix dv = dx * x.qdot.transpose();
        B = 0.5 * (dx * x.qddot.transpose() + x.qddot * dx.transpose()) -
            drift * (dv + dv.transpose()) + proj * x.qdot * x.qdot.transpose();
      } else {
        const Matrix dp = dx * x.q.transpose();
        B = 0.5 * (dp + dp.transpose()) - proj * x.q * x.q.transpose();
      }
      H += e * A.cwiseProduct(B);
    }
  }
  return 0.5 * (H + H.transpose());
}

Matrix TrainedModel::predict_matrix_partial(int k, const Vector& q, Index m) const {
  require_finite(q, "q");
  const CholeskyKernelSpec& s = spec(k);
  if (m < 0 || m >= dim()) throw DomainError("partial derivative index out of range");
  Matrix H = (k == 1) ? prior_.inertia_partial(q, m) : prior_.stiffness_partial(q, m);
  if (!s.is_zero()) {
    const Matrix& A = s.gram();
    const Matrix& lam = s.metric();
    for (Index i = 0; i < data_.size(); ++i) {
      const DifferentialInput x = data_.input(i);
      const Vector dx = delta_x_point(i);
      const Vector d = x.q - q;
      const double e = s.weight(d);
      if (e == 0.0) continue;
      const Vector ld = lam * d;
      const Vector ldx = lam * dx;
      const double proj = d.dot(ldx);
      Matrix B;
      Matrix dB;
      if (k == 1) {
        const Vector lv = lam * x.qdot;
        const double drift = d.dot(lv);
        Matrix dv = dx * x.qdot.transpose();
        dv = (dv + dv.transpose()).eval();
        const Matrix vv = x.qdot * x.qdot.transpose();
        B = 0.5 * (dx * x.qddot.transpose() + x.qddot * dx.transpose()) - drift * dv + proj * vv;
        dB = lv(m) * dv - ldx(m) * vv;
      } else {
        const Matrix dp = dx * x.q.transpose();
        const Matrix pp = x.q * x.q.transpose();
        B = 0.5 * (dp + dp.transpose()) - proj * pp;
        dB = ldx(m) * pp;
      }
      H += e * A.cwiseProduct(2.0 * ld(m) * B + dB);
    }
  }
  return 0.5 * (H + H.transpose());
}

double TrainedModel::predict_kinetic(const Vector& q, const Vector& qdot) const {
  require_finite(qdot, "qdot");
  return 0.5 * qdot.dot(predict_matrix(1, q) * qdot);
}

double TrainedModel::predict_kinetic_direct(const Vector& q, const Vector& qdot) const {
  require_finite(q, "q");
  require_finite(qdot, "qdot");
  double t = prior_.kinetic(q, qdot);
  for (Index i = 0; i < data_.size(); ++i) {
    t += delta_x_point(i).dot(lagrangian_apply_kinetic(kernel_.kinetic, data_.input(i), q, qdot));
  }
  return t;
}

double TrainedModel::predict_elastic(const Vector& q) const {
  return 0.5 * q.dot(predict_matrix(0, q) * q);
}

double TrainedModel::predict_potential(const Vector& q) const {
  require_finite(q, "q");
  const Index n = dim();
  const Vector origin = Vector::Zero(n);
  double v = prior_.potential(q);
  for (Index i = 0; i < data_.size(); ++i) {
    v += delta_x_point(i).dot(potential_grad_first(kernel_, data_.Q.row(i).transpose(), q));
  }
  v -= potential_value(kernel_, origin, q) * w_(0);
  v -= potential_grad_first(kernel_, origin, q).dot(w_.tail(n));
  return v;
}

Vector TrainedModel::predict_potential_gradient(const Vector& q) const {
  require_finite(q, "q");
  const Index n = dim();
  const Vector origin = Vector::Zero(n);
  Vector g = prior_.potential_gradient(q);
  for (Index i = 0; i < data_.size(); ++i) {
    g.noalias() += potential_cross_hessian(kernel_, data_.Q.row(i).transpose(), q).transpose() *
                   delta_x_point(i);
  }
  g -= potential_grad_second(kernel_, origin, q) * w_(0);
  g.noalias() -= potential_cross_hessian(kernel_, origin, q).transpose() * w_.tail(n);
  return g;
}

Matrix TrainedModel::predict_coriolis(const Vector& q, const Vector& qdot) const {
  require_finite(qdot, "qdot");
  std::vector<Matrix> partials;
  partials.reserve(static_cast<std::size_t>(dim()));
  for (Index m = 0; m < dim(); ++m) partials.push_back(predict_matrix_partial(1, q, m));
  return christoffel_coriolis(partials, qdot);
}

Vector TrainedModel::predict_torque(const Vector& q, const Vector& qdot,
                                    const Vector& qddot) const {
  require_finite(qddot, "qddot");
  return predict_matrix(1, q) * qddot + predict_coriolis(q, qdot) * qdot +
         predict_potential_gradient(q);
}

double TrainedModel::predict_energy(const Vector& q, const Vector& qdot) const {
  return predict_kinetic(q, qdot) + predict_potential(q);
}

double TrainedModel::predict_lagrangian(const Vector& q, const Vector& qdot) const {
  return predict_kinetic(q, qdot) - predict_potential(q);
}

Vector TrainedModel::predict_lagrangian_gradient(const Vector& q, const Vector& qdot) const {
  const Index n = dim();
  Vector grad(2 * n);
  for (Index m = 0; m < n; ++m) {
    grad(m) = 0.5 * qdot.dot(predict_matrix_partial(1, q, m) * qdot);
  }
  grad.head(n) -= predict_potential_gradient(q);
  grad.tail(n) = predict_matrix(1, q) * qdot;
  return grad;
}

TrainedModel condition(const JointGram& joint, const TrainingDataset& data,
                       const PriorModel& prior, const LagrangianKernel& kernel,
                       const ConditionOptions& options) {
  Vector delta_y = data.stacked_outputs() - joint.my;
  SchurSolution sol = solve_schur(joint, delta_y, options);
  return {data, prior, kernel, std::move(delta_y), std::move(sol.delta_x), std::move(sol.w),
          sol.info};
}

TrainedModel train(const TrainingDataset& data, const PriorModel& prior,
                   const LagrangianKernel& kernel, bool noise_compensation,
                   const ConditionOptions& options) {
  return condition(assemble_joint(data, prior, kernel, noise_compensation), data, prior, kernel,
                   options);
}

}  // namespace lgp
