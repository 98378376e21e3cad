#pragma once

// Checks of the physical guarantees of a trained model: the deterministic
// lower bound on the smallest eigenvalue of H_k(q), a Monte Carlo estimate of
// Pr{H_k(q) > 0}, and the equilibrium / stationarity conditions at the origin.

#include <cstdint>
#include <vector>

#include "lgp/model.hpp"

namespace lgp {

struct BetaDiagnostics {
  /// 1 where all product vectors p_i^(n) are strictly positive.
  std::vector<bool> positive_branch;
  /// Positive-branch components whose mu + nu exceeded lambda_N(A o sym Nbar_i)
  /// and were replaced by the latter.
  int clamped = 0;
};

/// beta_k at q, one component per training point.
[[nodiscard]] Vector beta_vector(const TrainedModel& model, int k, const Vector& q,
                                 BetaDiagnostics* diagnostics = nullptr);

struct EigBoundReport {
  Vector q;
  int k = 1;
  double bound = 0.0;
  double actual_lambda_min = 0.0;
  double prior_lambda_min = 0.0;
  Vector beta;
  /// exp(-vec(Lambda_k)^T D(q)), one weight per training point.
  Vector weights;
  /// N^2 x D, column j is d_j (x) d_j with d_j = q - q_j.
  Matrix distance_matrix;
  int clamped = 0;
  bool satisfied = false;
};

/// Throws TheoremViolation when bound > actual_lambda_min + 1e-10.
[[nodiscard]] EigBoundReport eig_lower_bound(const TrainedModel& model, int k, const Vector& q);

/// Same computation without throwing; used by scans that report violations.
[[nodiscard]] EigBoundReport eig_lower_bound_unchecked(const TrainedModel& model, int k,
                                                       const Vector& q);

struct PdProbabilityConfig {
  int k = 1;
  Vector q;
  int n_samples = 200;
  std::uint64_t seed = 0;
  bool noise_compensation = true;
};

struct PdProbabilityResult {
  double estimate = 0.0;
  double standard_error = 0.0;
  int positive = 0;
  int used = 0;
  int discarded = 0;
};

/// Redraws the measurement noise of every training point around `truth`
/// (noise-free inputs and torques, with the noise covariances to sample
/// from), re-conditions with fixed hyperparameters and counts how often
/// lambda_min(H_k(q)) > 0. Samples whose conditioning fails are discarded.
[[nodiscard]] PdProbabilityResult pd_probability_mc(const TrainingDataset& truth,
                                                    const PriorModel& prior,
                                                    const LagrangianKernel& kernel,
                                                    const PdProbabilityConfig& config);

/// One noisy draw of the dataset; stream index selects the per-sample seed.
[[nodiscard]] TrainingDataset resample_measurements(const TrainingDataset& truth,
                                                    std::uint64_t seed, std::uint64_t index);

struct QuadraticFormReport {
  int points = 0;
  /// max |T(q, a qdot) - a^2 T(q, qdot)| / s over the quadratic-form path and
  /// the direct path, s = a^2 |qdot|^2 ||H_1(q)||_2 / 2.
  double max_scaling_error = 0.0;
  double max_direct_scaling_error = 0.0;
  /// max |T_direct - T_quadratic| / s at a = 1.
  double max_path_error = 0.0;
};

/// Random q in [-q_range, q_range]^N, qdot ~ N(0, I), a ~ U[-3, 3].
[[nodiscard]] QuadraticFormReport check_quadratic_form(const TrainedModel& model, int points,
                                                       std::uint64_t seed,
                                                       double q_range = 1.5707963267948966);

struct EquilibriumCheck {
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct EquilibriumReport {
  EquilibriumCheck potential;            // |V(0)|
  EquilibriumCheck potential_gradient;   // ||grad V(0)||
  EquilibriumCheck lagrangian;           // |L(0, 0)|
  EquilibriumCheck lagrangian_gradient;  // ||grad_{q,qdot} L(0, 0)||
  [[nodiscard]] bool pass() const noexcept {
    return potential.pass && potential_gradient.pass && lagrangian.pass &&
           lagrangian_gradient.pass;
  }
};

[[nodiscard]] EquilibriumReport verify_equilibrium(const TrainedModel& model,
                                                   double tol_abs = 1e-8,
                                                   double tol_grad = 1e-6);

}  // namespace lgp
