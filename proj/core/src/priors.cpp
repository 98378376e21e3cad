#include "lgp/priors.hpp"

#include <cmath>
#include <utility>

#include "lgp/errors.hpp"

namespace lgp {

Matrix christoffel_coriolis(const std::vector<Matrix>& dM, const Vector& qdot) {
  const Index n = qdot.size();
  Matrix C = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      double c = 0.0;
      for (Index m = 0; m < n; ++m) {
        c += (dM[m](i, j) + dM[j](i, m) - dM[i](m, j)) * qdot(m);
      }
      C(i, j) = 0.5 * c;
    }
  }
  return C;
}

PriorModel::PriorModel(Index dim, std::string id, std::vector<double> params,
                       PriorFunctions functions)
    : dim_(dim), id_(std::move(id)), params_(std::move(params)), fn_(std::move(functions)) {
  if (dim_ <= 0) throw ConfigError("prior dimension must be positive");
  if (!fn_.inertia || !fn_.inertia_partial || !fn_.gravity || !fn_.gravity_gradient) {
    throw ConfigError("prior needs inertia, its partials, gravity and its gradient");
  }
  if (static_cast<bool>(fn_.stiffness) != static_cast<bool>(fn_.stiffness_partial)) {
    throw ConfigError("prior stiffness and its partials must be given together");
  }
  const Vector origin = Vector::Zero(dim_);
  const double g0 = fn_.gravity(origin);
  const Vector dg0 = fn_.gravity_gradient(origin);
  if (!std::isfinite(g0) || std::abs(g0) > 1e-12) {
    throw ConfigError("gravitational prior must vanish at the origin");
  }
  if (dg0.size() != dim_ || !dg0.allFinite() || dg0.cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError("gravitational prior must be stationary at the origin");
  }
  const Matrix m0 = fn_.inertia(origin);
  if (m0.rows() != dim_ || m0.cols() != dim_ || !m0.allFinite()) {
    throw ConfigError("prior inertia has wrong shape or non-finite entries");
  }
  const double scale = std::max(1.0, m0.cwiseAbs().maxCoeff());
  if ((m0 - m0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ConfigError("prior inertia is not symmetric");
  }
  if (fn_.stiffness) {
    const Matrix s0 = fn_.stiffness(origin);
    if (s0.rows() != dim_ || s0.cols() != dim_ ||
        (s0 - s0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, s0.cwiseAbs().maxCoeff())) {
      throw ConfigError("prior stiffness is not a symmetric N x N matrix");
    }
  }
}

PriorModel PriorModel::zero(Index dim) {
  PriorFunctions fn;
  fn.inertia = [dim](const Vector&) -> Matrix { return Matrix::Zero(dim, dim); };
  fn.inertia_partial = [dim](const Vector&, Index) -> Matrix { return Matrix::Zero(dim, dim); };
  fn.gravity = [](const Vector&) { return 0.0; };
  fn.gravity_gradient = [dim](const Vector&) -> Vector { return Vector::Zero(dim); };
  return {dim, "zero", {}, std::move(fn)};
}

Matrix PriorModel::inertia(const Vector& q) const { return fn_.inertia(q); }

Matrix PriorModel::inertia_partial(const Vector& q, Index m) const {
  return fn_.inertia_partial(q, m);
}

std::vector<Matrix> PriorModel::inertia_partials(const Vector& q) const {
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(dim_));
  for (Index m = 0; m < dim_; ++m) out.push_back(fn_.inertia_partial(q, m));
  return out;
}

Matrix PriorModel::stiffness(const Vector& q) const {
  return fn_.stiffness ? fn_.stiffness(q) : Matrix::Zero(dim_, dim_);
}

Matrix PriorModel::stiffness_partial(const Vector& q, Index m) const {
  return fn_.stiffness_partial ? fn_.stiffness_partial(q, m) : Matrix::Zero(dim_, dim_);
}

double PriorModel::gravity(const Vector& q) const { return fn_.gravity(q); }

Vector PriorModel::gravity_gradient(const Vector& q) const { return fn_.gravity_gradient(q); }

double PriorModel::kinetic(const Vector& q, const Vector& qdot) const {
  return 0.5 * qdot.dot(inertia(q) * qdot);
}

double PriorModel::elastic(const Vector& q) const {
  if (!fn_.stiffness) return 0.0;
  return 0.5 * q.dot(fn_.stiffness(q) * q);
}

double PriorModel::potential(const Vector& q) const { return gravity(q) + elastic(q); }

Vector PriorModel::potential_gradient(const Vector& q) const {
  Vector g = gravity_gradient(q);
  if (fn_.stiffness) {
    g += fn_.stiffness(q) * q;
    for (Index m = 0; m < dim_; ++m) g(m) += 0.5 * q.dot(fn_.stiffness_partial(q, m) * q);
  }
  return g;
}

Matrix PriorModel::coriolis(const Vector& q, const Vector& qdot) const {
  return christoffel_coriolis(inertia_partials(q), qdot);
}

Matrix PriorModel::inertia_velocity_jacobian(const Vector& q, const Vector& qdot) const {
  Matrix J(dim_, dim_);
  for (Index m = 0; m < dim_; ++m) J.col(m) = fn_.inertia_partial(q, m) * qdot;
  return J;
}

Vector PriorModel::torque(const Vector& q, const Vector& qdot, const Vector& qddot) const {
  return inertia(q) * qddot + coriolis(q, qdot) * qdot + potential_gradient(q);
}

}  // namespace lgp
