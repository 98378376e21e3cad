#pragma once

// Metric (squared-exponential) kernels, the Cholesky matrix kernel Theta_k
// and the quadratic energy functional kappa_k built on top of it.

#include <span>

#include "lgp/types.hpp"

namespace lgp {

/// sigma^2 * exp(-1/2 d^T Lambda d) with d = q - q'.
///
/// The metric is held through its Cholesky factor, so every instance is SPD by
/// construction. Derivatives are taken with respect to components of q and q'
/// (d/dq' = -d/dd).
class MetricKernel {
 public:
  MetricKernel(double sigma2, const Matrix& metric);

  [[nodiscard]] Index dim() const noexcept { return metric_.rows(); }
  [[nodiscard]] double sigma2() const noexcept { return sigma2_; }
  [[nodiscard]] const Matrix& metric() const noexcept { return metric_; }
  /// Lower-triangular L with metric = L L^T.
  [[nodiscard]] const Matrix& metric_factor() const noexcept { return factor_; }

  /// d^T Lambda d.
  [[nodiscard]] double squared_distance(const Vector& d) const;

  [[nodiscard]] double eval(const Vector& d) const;
  [[nodiscard]] double eval(const Vector& q, const Vector& q_prime) const { return eval(q - q_prime); }

  /// d/dq k.
  [[nodiscard]] Vector gradient(const Vector& d) const;
  /// d^2/(dq dq^T) k.
  [[nodiscard]] Matrix hessian(const Vector& d) const;
  /// d^2/(dq dq'^T) k = -hessian(d).
  [[nodiscard]] Matrix cross_hessian(const Vector& d) const;

  /// Mixed partial derivative of total order <= 4. `q_indices` lists the
  /// components of q differentiated, `q_prime_indices` those of q'.
  [[nodiscard]] double derivative(const Vector& d, std::span<const int> q_indices,
                                  std::span<const int> q_prime_indices) const;

  [[nodiscard]] MetricKernel with_sigma2(double sigma2) const;

 private:
  double sigma2_;
  Matrix metric_;
  Matrix factor_;
};

/// Cholesky matrix kernel Theta_k(q, q') = R_k^T R_k whose upper-triangular
/// factor has entries r_knm = sigma_knm exp(-1/2 d^T Lambda_k d); all entries
/// share one metric, hence Theta_k = exp(-d^T Lambda_k d) Sigma_f^T Sigma_f.
///
/// k = 0 builds the elastic kernel (regressor q), k = 1 the kinetic kernel
/// (regressor qdot). A zero hypervariance is allowed and switches the
/// component off.
class CholeskyKernelSpec {
 public:
  CholeskyKernelSpec(int k, const Matrix& hyper_variance, const Matrix& metric);

  static CholeskyKernelSpec zero(int k, Index dim);

  [[nodiscard]] int k() const noexcept { return k_; }
  [[nodiscard]] Index dim() const noexcept { return hyper_variance_.rows(); }
  [[nodiscard]] const Matrix& hyper_variance() const noexcept { return hyper_variance_; }
  /// Sigma_f^T Sigma_f.
  [[nodiscard]] const Matrix& gram() const noexcept { return gram_; }
  [[nodiscard]] const Matrix& metric() const noexcept { return metric_.metric(); }
  [[nodiscard]] const Matrix& metric_factor() const noexcept { return metric_.metric_factor(); }
  [[nodiscard]] bool is_zero() const noexcept { return zero_; }

  /// Decreasingly ordered eigenvalues of Sigma_f^T Sigma_f.
  [[nodiscard]] const Vector& radial_eigenvalues() const noexcept { return radial_; }
  /// Orthonormal eigenvectors matching radial_eigenvalues().
  [[nodiscard]] const Matrix& radial_eigenvectors() const noexcept { return radial_vectors_; }

  /// exp(-d^T Lambda_k d), the common factor of every Theta_k entry.
  [[nodiscard]] double weight(const Vector& d) const;

  /// Single Cholesky-factor entry r_knm(q, q') (zero below the diagonal).
  [[nodiscard]] double factor_entry(Index n, Index m, const Vector& q, const Vector& q_prime) const;

  [[nodiscard]] Matrix theta(const Vector& q, const Vector& q_prime) const;

  /// Directional derivative of Theta_k(q_i, q) in its first argument along
  /// delta_x.
  [[nodiscard]] Matrix phi(const Vector& q_i, const Vector& delta_x, const Vector& q) const;

  /// 1/4 (x o x')^T Theta_k(q, q') (x o x') with x = q for k = 0 and x = qdot
  /// for k = 1. The velocity arguments are ignored for k = 0.
  [[nodiscard]] double kappa(const Vector& q, const Vector& qdot, const Vector& q_prime,
                             const Vector& qdot_prime) const;

  [[nodiscard]] CholeskyKernelSpec with_hyper_variance(const Matrix& hyper_variance) const;

 private:
  int k_;
  Matrix hyper_variance_;
  Matrix gram_;
  MetricKernel metric_;
  bool zero_;
  Vector radial_;
  Matrix radial_vectors_;
};

/// Composite Lagrangian kernel k_L = kappa_1 + kappa_0 + k_G.
struct LagrangianKernel {
  CholeskyKernelSpec kinetic;
  CholeskyKernelSpec elastic;
  MetricKernel gravity;

  [[nodiscard]] Index dim() const noexcept { return gravity.dim(); }
};

void require_finite(const Vector& v, const char* what);

}  // namespace lgp
