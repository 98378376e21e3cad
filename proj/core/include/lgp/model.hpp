#pragma once

// Joint torque/energy Gram assembly, exact conditioning on the equilibrium
// constraint gamma_0 = [V(0), grad V(0)] = 0, and the posterior mean
// estimators derived from it.

#include <optional>
#include <vector>

#include "lgp/kernels.hpp"
#include "lgp/operators.hpp"
#include "lgp/priors.hpp"

namespace lgp {

struct TrainingDataset {
  Matrix Q;     // D x N positions
  Matrix Xdot;  // D x 2N measured [qdot, qddot]
  Matrix Y;     // D x N torques
  std::vector<Matrix> sigma_omega;  // velocity-noise covariances
  std::vector<Matrix> sigma_alpha;  // acceleration-noise covariances
  std::vector<Matrix> sigma_eps;    // torque-noise covariances

  [[nodiscard]] Index size() const noexcept { return Q.rows(); }
  [[nodiscard]] Index dim() const noexcept { return Q.cols(); }
  [[nodiscard]] DifferentialInput input(Index i) const;
  /// Y stacked point by point into a DN-vector.
  [[nodiscard]] Vector stacked_outputs() const;
  /// Throws ConfigError on inconsistent shapes, non-finite entries or
  /// non-symmetric / indefinite noise covariances.
  void validate() const;

  static TrainingDataset empty(Index dim);
};

/// Effective torque noise of point i with velocity/acceleration noise
/// propagated through the prior and the kinetic kernel.
[[nodiscard]] Matrix heteroscedastic_noise(Index i, const TrainingDataset& data,
                                           const PriorModel& prior,
                                           const CholeskyKernelSpec& spec_T);

struct JointGram {
  Matrix Ky;   // DN x DN
  Matrix Ky0;  // DN x (N+1)
  Matrix K0;   // (N+1) x (N+1)
  Vector my;   // DN
};

struct PriorEnergyVariances {
  double kinetic = 0.0;
  double potential = 0.0;
};

/// Prior variances of T(q, qdot) and V(q); unused by the mean estimators.
[[nodiscard]] PriorEnergyVariances prior_energy_variances(const LagrangianKernel& kernel,
                                                          const Vector& q, const Vector& qdot);

[[nodiscard]] JointGram assemble_joint(const TrainingDataset& data, const PriorModel& prior,
                                       const LagrangianKernel& kernel,
                                       bool noise_compensation = true);

struct ConditionOptions {
  /// Replaces K0 during conditioning. Diagnostic only: breaks the
  /// equilibrium guarantee on purpose.
  std::optional<Matrix> k0_override;
  double residual_tolerance = 1e-10;
};

struct ConditioningInfo {
  double jitter = 0.0;
  double log_det = 0.0;
  double quadratic = 0.0;  // delta_y^T K_D^-1 delta_y
  double residual = 0.0;   // ||K_D dx - dy|| / ||dy||
  int refinement_steps = 0;
};

/// Solution of K_D x = rhs with the jitter schedule applied.
struct SchurSolution {
  Vector delta_x;
  Vector w;  // K0^-1 Ky0^T delta_x
  ConditioningInfo info;
};

/// Forms K_D = Ky - Ky0 K0^-1 Ky0^T and solves K_D dx = dy. Throws
/// ConfigError for a singular K0 and IllConditionedError when no jitter level
/// yields a factorization meeting the residual tolerance.
[[nodiscard]] SchurSolution solve_schur(const JointGram& joint, const Vector& delta_y,
                                        const ConditionOptions& options = {});

/// log N(dy; 0, K_D) from a finished solve.
[[nodiscard]] double gaussian_log_likelihood(const ConditioningInfo& info, Index n);

class TrainedModel {
 public:
  TrainedModel(TrainingDataset data, PriorModel prior, LagrangianKernel kernel, Vector delta_y,
               Vector delta_x, Vector w, ConditioningInfo info);

  [[nodiscard]] Index dim() const noexcept { return kernel_.dim(); }
  [[nodiscard]] const TrainingDataset& dataset() const noexcept { return data_; }
  [[nodiscard]] const PriorModel& prior() const noexcept { return prior_; }
  [[nodiscard]] const LagrangianKernel& kernel() const noexcept { return kernel_; }
  [[nodiscard]] const Vector& delta_y() const noexcept { return delta_y_; }
  [[nodiscard]] const Vector& delta_x() const noexcept { return delta_x_; }
  [[nodiscard]] const Vector& equilibrium_weights() const noexcept { return w_; }
  [[nodiscard]] const ConditioningInfo& conditioning() const noexcept { return info_; }
  [[nodiscard]] double log_likelihood() const;
  [[nodiscard]] Vector delta_x_point(Index i) const;

  /// N_ki(q) = Nbar_ki o Theta_k(|d_i|), metric-class closed form.
  [[nodiscard]] Matrix basis_matrix(int k, Index i, const Vector& q) const;
  /// N_ki(q) from the operator definition, built from theta() and phi().
  [[nodiscard]] Matrix basis_matrix_general(int k, Index i, const Vector& q) const;

  /// H_k(q): k = 1 is the inertia estimate, k = 0 the stiffness estimate.
  [[nodiscard]] Matrix predict_matrix(int k, const Vector& q) const;
  /// dH_k/dq_m.
  [[nodiscard]] Matrix predict_matrix_partial(int k, const Vector& q, Index m) const;

  [[nodiscard]] double predict_kinetic(const Vector& q, const Vector& qdot) const;
  /// m_T + sum_i l_1i^T dx_i without the quadratic-form rewrite.
  [[nodiscard]] double predict_kinetic_direct(const Vector& q, const Vector& qdot) const;
  [[nodiscard]] double predict_elastic(const Vector& q) const;
  [[nodiscard]] double predict_potential(const Vector& q) const;
  [[nodiscard]] Vector predict_potential_gradient(const Vector& q) const;
  [[nodiscard]] Matrix predict_coriolis(const Vector& q, const Vector& qdot) const;
  [[nodiscard]] Vector predict_torque(const Vector& q, const Vector& qdot,
                                      const Vector& qddot) const;
  [[nodiscard]] double predict_energy(const Vector& q, const Vector& qdot) const;
  [[nodiscard]] double predict_lagrangian(const Vector& q, const Vector& qdot) const;
  /// [grad_q L, grad_qdot L].
  [[nodiscard]] Vector predict_lagrangian_gradient(const Vector& q, const Vector& qdot) const;

 private:
  [[nodiscard]] const CholeskyKernelSpec& spec(int k) const;

  TrainingDataset data_;
  PriorModel prior_;
  LagrangianKernel kernel_;
  Vector delta_y_;
  Vector delta_x_;
  Vector w_;
  ConditioningInfo info_;
};

[[nodiscard]] TrainedModel condition(const JointGram& joint, const TrainingDataset& data,
                                     const PriorModel& prior, const LagrangianKernel& kernel,
                                     const ConditionOptions& options = {});

/// assemble_joint followed by condition.
[[nodiscard]] TrainedModel train(const TrainingDataset& data, const PriorModel& prior,
                                 const LagrangianKernel& kernel, bool noise_compensation = true,
                                 const ConditionOptions& options = {});

}  // namespace lgp
