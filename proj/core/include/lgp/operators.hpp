#pragma once

// Images of the scalar kernels under the Lagrangian operator
//   L_{q,qdot}(qdot, qddot) = (grad_qdot^T qddot + grad_q^T qdot) grad_qdot - grad_q,
// i.e. the cross-covariances between torques and energies, and the torque
// Gram blocks K_tau = L_q L_q'^T k_L. The time derivative is expanded with the
// chain rule using the data point's own (qdot, qddot).

#include "lgp/kernels.hpp"

namespace lgp {

struct DifferentialInput {
  Vector q;
  Vector qdot;
  Vector qddot;
};

/// L applied to kappa_1 in its first argument: Cov(tau(at), T(q_test, qdot_test)).
[[nodiscard]] Vector lagrangian_apply_kinetic(const CholeskyKernelSpec& spec_T,
                                              const DifferentialInput& at, const Vector& q_test,
                                              const Vector& qdot_test);

/// grad_{q_i} k_G(q_i, q_test): Cov(tau_i, G(q_test)).
[[nodiscard]] Vector lagrangian_apply_potential(const MetricKernel& kernel, const Vector& q_i,
                                                const Vector& q_test);
/// grad_{q_i} kappa_0(q_i, q_test): Cov(tau_i, U(q_test)).
[[nodiscard]] Vector lagrangian_apply_potential(const CholeskyKernelSpec& spec_U,
                                                const Vector& q_i, const Vector& q_test);

/// Potential-kernel helpers for k(p, u); "first" differentiates p, "second" u.
[[nodiscard]] double potential_value(const LagrangianKernel& kernel, const Vector& p,
                                     const Vector& u);
[[nodiscard]] Vector potential_grad_first(const LagrangianKernel& kernel, const Vector& p,
                                          const Vector& u);
[[nodiscard]] Vector potential_grad_second(const LagrangianKernel& kernel, const Vector& p,
                                           const Vector& u);
/// grad_p grad_u^T k_V(p, u) with k_V = k_G + kappa_0.
[[nodiscard]] Matrix potential_cross_hessian(const LagrangianKernel& kernel, const Vector& p,
                                             const Vector& u);

[[nodiscard]] Matrix elastic_cross_hessian(const CholeskyKernelSpec& spec_U, const Vector& p,
                                           const Vector& u);
[[nodiscard]] Vector elastic_grad_second(const CholeskyKernelSpec& spec_U, const Vector& p,
                                         const Vector& u);

/// L_i L_j^T kappa_1: kinetic contribution to the (i, j) torque block.
[[nodiscard]] Matrix kinetic_torque_block(const CholeskyKernelSpec& spec_T,
                                          const DifferentialInput& at_i,
                                          const DifferentialInput& at_j);

/// Full (i, j) block of K_tau for k_L = kappa_1 + kappa_0 + k_G.
[[nodiscard]] Matrix torque_kernel_block(const LagrangianKernel& kernel,
                                         const DifferentialInput& at_i,
                                         const DifferentialInput& at_j);

/// Cov(tau(at), gamma_0) with gamma_0 = [V(0), grad V(0)]: an N x (N+1) block.
[[nodiscard]] Matrix torque_equilibrium_block(const LagrangianKernel& kernel, const Vector& q);

/// Cov(gamma_0, gamma_0), (N+1) x (N+1).
[[nodiscard]] Matrix equilibrium_gram(const LagrangianKernel& kernel);

}  // namespace lgp
