#pragma once

// Conditional log marginal likelihood log N(dy; 0, K_D) and a multistart
// Nelder-Mead search over (log-transformed) kernel hyperparameters.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lgp/model.hpp"

namespace lgp {

enum class Transform { log, identity };

struct HyperParameter {
  std::string name;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  Transform transform = Transform::log;
};

/// Ordered hyperparameters. Recognised names: "sigma_G2" (gravity variance),
/// "sigma_f_T_nm" and "sigma_f_U_nm" (1-based upper-triangular entries of the
/// kinetic / elastic hypervariance).
class HyperParameterVector {
 public:
  HyperParameterVector() = default;
  explicit HyperParameterVector(std::vector<HyperParameter> entries);

  /// sigma_G2 and every upper-triangular kinetic entry, optionally followed
  /// by the elastic ones, with the default bounds.
  static HyperParameterVector from_kernel(const LagrangianKernel& kernel,
                                          bool include_elastic = false);

  [[nodiscard]] const std::vector<HyperParameter>& entries() const noexcept { return entries_; }
  [[nodiscard]] Index size() const noexcept { return static_cast<Index>(entries_.size()); }
  [[nodiscard]] Vector values() const;
  [[nodiscard]] Vector encode() const;
  [[nodiscard]] Vector encoded_lower() const;
  [[nodiscard]] Vector encoded_upper() const;
  /// Inverse of encode(); values are clamped into their bounds.
  [[nodiscard]] HyperParameterVector decode(const Vector& z) const;
  [[nodiscard]] HyperParameterVector with_values(const Vector& values) const;
  /// Copies the values into the matching kernel fields.
  [[nodiscard]] LagrangianKernel apply(const LagrangianKernel& base) const;
  void validate() const;

 private:
  std::vector<HyperParameter> entries_;
};

inline constexpr double kSigmaG2Lower = 1e-4;
inline constexpr double kSigmaG2Upper = 1e4;
inline constexpr double kSigmaFLower = 1e-3;
inline constexpr double kSigmaFUpper = 1e3;

/// Returns -inf when K0 or K_D cannot be factorized.
[[nodiscard]] double log_marginal_likelihood(const TrainingDataset& data, const PriorModel& prior,
                                             const LagrangianKernel& kernel,
                                             bool noise_compensation = true);

/// log N(dy; 0, K) through a Cholesky factorization; -inf if K is not SPD.
[[nodiscard]] double gaussian_log_density(const Matrix& K, const Vector& dy);

struct NelderMeadOptions {
  int max_iterations = 400;
  double tolerance = 1e-6;
  double initial_step = 0.5;
};

struct NelderMeadResult {
  Vector x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Best value after each iteration.
  std::vector<double> best_values;
  std::vector<Vector> best_points;
};

/// Maximizes f inside the box [lower, upper] (points are clamped).
[[nodiscard]] NelderMeadResult nelder_mead_maximize(const std::function<double(const Vector&)>& f,
                                                    const Vector& x0, const Vector& lower,
                                                    const Vector& upper,
                                                    const NelderMeadOptions& options = {});

struct OptimizerConfig {
  int restarts = 8;
  int max_iterations = 400;
  double tolerance = 1e-6;
  double initial_step = 0.5;
  std::uint64_t seed = 0;
  bool noise_compensation = true;
};

struct TraceRow {
  int restart = 0;
  int iteration = 0;
  double value = 0.0;       // best value of this restart so far
  double best_value = 0.0;  // best value over all restarts so far
  Vector parameters;        // parameters attaining `value`
};

struct OptimizationResult {
  HyperParameterVector best;
  double best_value = 0.0;
  double init_value = 0.0;
  int best_restart = -1;  // -1: init itself was never improved on
  int failed_restarts = 0;
  std::vector<TraceRow> trace;
};

/// Run 0 starts from init, runs 1..restarts from shifted Halton points in the
/// encoded box. Ties keep the lowest restart index; the result is never worse
/// than init. Throws OptimizationFailed if no evaluation is finite.
[[nodiscard]] OptimizationResult optimize_objective(
    const std::function<double(const HyperParameterVector&)>& objective,
    const HyperParameterVector& init, const OptimizerConfig& config);

[[nodiscard]] OptimizationResult optimize(const TrainingDataset& data, const PriorModel& prior,
                                          const LagrangianKernel& base,
                                          const HyperParameterVector& init,
                                          const OptimizerConfig& config);

/// Element j of the Halton point `index` in base prime(j).
[[nodiscard]] double halton(std::uint64_t index, int dimension);

}  // namespace lgp
