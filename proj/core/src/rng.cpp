#include "lgp/rng.hpp"

#include <cmath>

namespace lgp {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, RngStream stream, std::uint64_t index) noexcept {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  return splitmix64(h ^ index);
}

std::mt19937_64 make_generator(std::uint64_t base, RngStream stream, std::uint64_t index) {
  return std::mt19937_64(derive_seed(base, stream, index));
}

Vector sample_gaussian(std::mt19937_64& gen, const Matrix& cov) {
  const Index n = cov.rows();
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(n);
  for (Index i = 0; i < n; ++i) z(i) = normal(gen);
  const bool diagonal = (cov - Matrix(cov.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
  if (diagonal) {
    Vector out(n);
    for (Index i = 0; i < n; ++i) out(i) = std::sqrt(std::max(cov(i, i), 0.0)) * z(i);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (cov + cov.transpose()));
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.cwiseProduct(z);
}

}  // namespace lgp
