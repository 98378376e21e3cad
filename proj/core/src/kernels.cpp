#include "lgp/kernels.hpp"

#include <array>
#include <cmath>
#include <string>

#include "lgp/errors.hpp"

namespace lgp {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw DomainError(std::string("non-finite input: ") + what);
  }
}

namespace {

void require_dim(const Vector& v, Index n, const char* what) {
  if (v.size() != n) {
    throw DomainError(std::string("dimension mismatch: ") + what + " has size " +
                      std::to_string(v.size()) + ", expected " + std::to_string(n));
  }
}

Matrix factor_spd(const Matrix& metric) {
  if (metric.rows() == 0 || metric.rows() != metric.cols()) {
    throw ConfigError("metric must be a non-empty square matrix");
  }
  if (!metric.allFinite()) {
    throw ConfigError("metric has non-finite entries");
  }
  const double scale = std::max(1.0, metric.cwiseAbs().maxCoeff());
  if ((metric - metric.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ConfigError("metric is not symmetric");
  }
  const Matrix sym = 0.5 * (metric + metric.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
    throw ConfigError("metric is not positive definite");
  }
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() != Eigen::Success) {
    throw ConfigError("metric is not positive definite");
  }
  return llt.matrixL();
}

}  // namespace

MetricKernel::MetricKernel(double sigma2, const Matrix& metric)
    : sigma2_(sigma2), factor_(factor_spd(metric)) {
  if (!std::isfinite(sigma2) || sigma2 < 0.0) {
    throw ConfigError("metric kernel variance must be finite and non-negative");
  }
  metric_ = factor_ * factor_.transpose();
}

double MetricKernel::squared_distance(const Vector& d) const {
  require_dim(d, dim(), "d");
  require_finite(d, "d");
  return (factor_.transpose() * d).squaredNorm();
}

double MetricKernel::eval(const Vector& d) const {
  return sigma2_ * std::exp(-0.5 * squared_distance(d));
}

Vector MetricKernel::gradient(const Vector& d) const {
  const double f = eval(d);
  return -f * (metric_ * d);
}

Matrix MetricKernel::hessian(const Vector& d) const {
  const double f = eval(d);
  const Vector g = metric_ * d;
  return f * (g * g.transpose() - metric_);
}

Matrix MetricKernel::cross_hessian(const Vector& d) const { return -hessian(d); }

double MetricKernel::derivative(const Vector& d, std::span<const int> q_indices,
                                std::span<const int> q_prime_indices) const {
  const std::size_t order = q_indices.size() + q_prime_indices.size();
  if (order > 4) {
    throw UnsupportedOperation("metric kernel derivatives are implemented up to total order 4");
  }
  std::array<int, 4> idx{};
  std::size_t pos = 0;
  for (int i : q_indices) idx[pos++] = i;
  for (int i : q_prime_indices) idx[pos++] = i;
  for (std::size_t i = 0; i < order; ++i) {
    if (idx[i] < 0 || idx[i] >= dim()) {
      throw DomainError("derivative index out of range");
    }
  }
  const double sign = (q_prime_indices.size() % 2 == 0) ? 1.0 : -1.0;
  const double f = eval(d);
  const Vector g = metric_ * d;
  const Matrix& L = metric_;
  const auto a = idx[0], b = idx[1], c = idx[2], e = idx[3];
  double poly = 0.0;
  switch (order) {
    case 0:
      poly = 1.0;
      break;
    case 1:
      poly = -g(a);
      break;
    case 2:
      poly = g(a) * g(b) - L(a, b);
      break;
    case 3:
      poly = -g(a) * g(b) * g(c) + L(a, b) * g(c) + L(a, c) * g(b) + L(b, c) * g(a);
      break;
    case 4:
      poly = g(a) * g(b) * g(c) * g(e) -
             (L(a, b) * g(c) * g(e) + L(a, c) * g(b) * g(e) + L(b, c) * g(a) * g(e) +
              L(a, e) * g(b) * g(c) + L(b, e) * g(a) * g(c) + L(c, e) * g(a) * g(b)) +
             L(a, b) * L(c, e) + L(a, c) * L(b, e) + L(a, e) * L(b, c);
      break;
    default:
      break;
  }
  return sign * poly * f;
}

MetricKernel MetricKernel::with_sigma2(double sigma2) const {
  MetricKernel copy = *this;
  if (!std::isfinite(sigma2) || sigma2 < 0.0) {
    throw ConfigError("metric kernel variance must be finite and non-negative");
  }
  copy.sigma2_ = sigma2;
  return copy;
}

// ---------------------------------------------------------------------------

CholeskyKernelSpec::CholeskyKernelSpec(int k, const Matrix& hyper_variance, const Matrix& metric)
    : k_(k), hyper_variance_(hyper_variance), metric_(1.0, metric), zero_(false) {
  if (k != 0 && k != 1) {
    throw ConfigError("differential-operational index must be 0 or 1");
  }
  const Index n = hyper_variance.rows();
  if (n != hyper_variance.cols() || n != metric.rows()) {
    throw ConfigError("hypervariance must be square and match the metric dimension");
  }
  if (!hyper_variance.allFinite()) {
    throw ConfigError("hypervariance has non-finite entries");
  }
  for (Index r = 1; r < n; ++r) {
    for (Index c = 0; c < r; ++c) {
      if (hyper_variance(r, c) != 0.0) {
        throw ConfigError("hypervariance must be upper-triangular");
      }
    }
  }
  zero_ = (hyper_variance.array() == 0.0).all();
  if (!zero_ && (hyper_variance.diagonal().array() <= 0.0).any()) {
    throw ConfigError("hypervariance needs a strictly positive diagonal (or must be zero)");
  }
  const Matrix g = hyper_variance_.transpose() * hyper_variance_;
  gram_ = 0.5 * (g + g.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram_);
  radial_ = eig.eigenvalues().reverse();
  radial_vectors_ = eig.eigenvectors().rowwise().reverse();
}

CholeskyKernelSpec CholeskyKernelSpec::zero(int k, Index dim) {
  return {k, Matrix::Zero(dim, dim), Matrix::Identity(dim, dim)};
}

double CholeskyKernelSpec::weight(const Vector& d) const {
  return std::exp(-metric_.squared_distance(d));
}

double CholeskyKernelSpec::factor_entry(Index n, Index m, const Vector& q,
                                        const Vector& q_prime) const {
  if (n > m) return 0.0;
  return hyper_variance_(n, m) * std::exp(-0.5 * metric_.squared_distance(q - q_prime));
}

Matrix CholeskyKernelSpec::theta(const Vector& q, const Vector& q_prime) const {
  return weight(q - q_prime) * gram_;
}

Matrix CholeskyKernelSpec::phi(const Vector& q_i, const Vector& delta_x, const Vector& q) const {
  require_dim(delta_x, dim(), "delta_x");
  require_finite(delta_x, "delta_x");
  const Vector d = q_i - q;
  const double w = weight(d);
  const double proj = d.dot(metric() * delta_x);
  return (-2.0 * proj * w) * gram_;
}

double CholeskyKernelSpec::kappa(const Vector& q, const Vector& qdot, const Vector& q_prime,
                                 const Vector& qdot_prime) const {
  const Vector& x = (k_ == 0) ? q : qdot;
  const Vector& xp = (k_ == 0) ? q_prime : qdot_prime;
  require_dim(x, dim(), "regressor");
  require_dim(xp, dim(), "regressor");
  require_finite(x, "regressor");
  require_finite(xp, "regressor");
  const Vector u = x.cwiseProduct(xp);
  return 0.25 * weight(q - q_prime) * u.dot(gram_ * u);
}

CholeskyKernelSpec CholeskyKernelSpec::with_hyper_variance(const Matrix& hyper_variance) const {
  return {k_, hyper_variance, metric()};
}

}  // namespace lgp
