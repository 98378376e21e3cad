#pragma once

// A-priori energy model: inertia M0(q), stiffness S0(q) and gravitational
// potential mG(q), together with the mechanics derived from them.

#include <functional>
#include <string>
#include <vector>

#include "lgp/types.hpp"

namespace lgp {

/// C_ij = 1/2 sum_m (dM_ij/dq_m + dM_im/dq_j - dM_mj/dq_i) qdot_m, given the
/// partial derivatives dM/dq_m for m = 0..N-1.
[[nodiscard]] Matrix christoffel_coriolis(const std::vector<Matrix>& inertia_partials,
                                          const Vector& qdot);

struct PriorFunctions {
  std::function<Matrix(const Vector&)> inertia;
  std::function<Matrix(const Vector&, Index)> inertia_partial;
  /// Empty callables mean S0 = 0.
  std::function<Matrix(const Vector&)> stiffness;
  std::function<Matrix(const Vector&, Index)> stiffness_partial;
  std::function<double(const Vector&)> gravity;
  std::function<Vector(const Vector&)> gravity_gradient;
};

class PriorModel {
 public:
  /// `id` and `params` identify the prior for serialization. Throws
  /// ConfigError when mG(0) != 0, grad mG(0) != 0 or M0(0) is not symmetric.
  PriorModel(Index dim, std::string id, std::vector<double> params, PriorFunctions functions);

  /// M0 = 0, S0 = 0, mG = 0.
  static PriorModel zero(Index dim);

  [[nodiscard]] Index dim() const noexcept { return dim_; }
  [[nodiscard]] const std::string& id() const noexcept { return id_; }
  [[nodiscard]] const std::vector<double>& params() const noexcept { return params_; }

  [[nodiscard]] Matrix inertia(const Vector& q) const;
  [[nodiscard]] Matrix inertia_partial(const Vector& q, Index m) const;
  [[nodiscard]] std::vector<Matrix> inertia_partials(const Vector& q) const;
  [[nodiscard]] Matrix stiffness(const Vector& q) const;
  [[nodiscard]] Matrix stiffness_partial(const Vector& q, Index m) const;
  [[nodiscard]] bool has_stiffness() const noexcept { return static_cast<bool>(fn_.stiffness); }

  [[nodiscard]] double gravity(const Vector& q) const;
  [[nodiscard]] Vector gravity_gradient(const Vector& q) const;

  /// m_T = 1/2 qdot^T M0 qdot.
  [[nodiscard]] double kinetic(const Vector& q, const Vector& qdot) const;
  /// m_U = 1/2 q^T S0 q.
  [[nodiscard]] double elastic(const Vector& q) const;
  /// m_V = m_G + m_U.
  [[nodiscard]] double potential(const Vector& q) const;
  [[nodiscard]] Vector potential_gradient(const Vector& q) const;

  [[nodiscard]] Matrix coriolis(const Vector& q, const Vector& qdot) const;
  /// C0 = d(M0(q) qdot)/dq, column m holds dM0/dq_m qdot.
  [[nodiscard]] Matrix inertia_velocity_jacobian(const Vector& q, const Vector& qdot) const;
  /// M0 qddot + C qdot + grad m_V.
  [[nodiscard]] Vector torque(const Vector& q, const Vector& qdot, const Vector& qddot) const;

 private:
  Index dim_;
  std::string id_;
  std::vector<double> params_;
  PriorFunctions fn_;
};

}  // namespace lgp
