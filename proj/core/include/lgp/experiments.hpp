#pragma once

// Two-link benchmark: training-data generation, default kernel, and the
// tracking, free-energy and eigenmanifold experiments.

#include <cstdint>
#include <numbers>
#include <vector>

#include "lgp/dynamics.hpp"
#include "lgp/hyperopt.hpp"

namespace lgp {

struct DataConfig {
  PlantParams plant;
  double grid_lower = -1.0;
  double grid_upper = 1.0;
  int grid_count = 5;  // per joint
  /// Velocity of joint n is (-1)^n for n = 1, 2.
  Vector qdot = (Vector(2) << -1.0, 1.0).finished();
  Vector qddot = (Vector(2) << 1.0, 1.0).finished();
  double sigma_eps = 0.1;                          // N m
  double sigma_alpha = std::numbers::pi / 180.0;   // rad / s^2
  double sigma_omega = 0.0;                        // rad / s
  std::uint64_t seed = 0;

  void validate() const;
};

/// Noise-free measurements with the configured noise covariances attached.
[[nodiscard]] TrainingDataset generate_clean_data(const DataConfig& config);
/// generate_clean_data plus one seeded noise draw.
[[nodiscard]] TrainingDataset generate_training_data(const DataConfig& config);

struct KernelConfig {
  double sigma_G2 = 10.0;
  Matrix sigma_f_T = (Matrix(2, 2) << 1.0, 1.0, 0.0, 1.0).finished();
  Matrix sigma_f_U = Matrix::Zero(2, 2);
  double sigma_d_T = 100.0;  // kinetic length scale, Lambda_1 = I / sigma_d_T^2
  double sigma_d_U = 1.0;
  Vector sigma_d_G = (Vector(2) << 1.6, 2.7).finished();  // Lambda_G = diag(sigma_d_G)^-2
};

[[nodiscard]] LagrangianKernel make_kernel(const KernelConfig& config);

struct TrackingConfig {
  PlantParams plant;
  double amplitude = std::numbers::pi / 2.0;
  double t_end = 10.0;
  double sample_dt = 0.01;
  double kp = 10.0;
  double kd = 10.0;
  IntegratorOptions integrator;
};

struct TrackingMetrics {
  double rms_position = 0.0;
  double max_position = 0.0;
  double rms_velocity = 0.0;
  double max_velocity = 0.0;
};

struct TrackingResult {
  SimResult pd;
  SimResult lgp;
  TrackingMetrics pd_metrics;
  TrackingMetrics lgp_metrics;
};

[[nodiscard]] TrackingMetrics tracking_metrics(const SimResult& sim, const ReferenceFn& ref);

/// Closed loop of the true plant from rest at the origin under the PD law and
/// under the model-augmented PD law.
[[nodiscard]] TrackingResult run_tracking_experiment(const TrainedModel& model,
                                                     const TrackingConfig& config);

struct EnergyConfig {
  PlantParams plant;
  std::vector<double> amplitudes = {0.1, 0.5, 1.0};
  double t_end = 10.0;
  double sample_dt = 0.01;
  IntegratorOptions integrator;
};

struct EnergyRun {
  double amplitude = 0.0;
  SimResult sim;
  /// max_t |E_hat(t) - E_hat(0)| / max(1, |E_hat(0)|).
  double internal_drift = 0.0;
  /// (E_hat(x) - E(x)) / E(x) at the sample with the largest magnitude.
  double max_relative_error = 0.0;
};

[[nodiscard]] std::vector<EnergyRun> run_energy_experiment(const TrainedModel& model,
                                                           const EnergyConfig& config);

struct ScanConfig {
  double lower = -std::numbers::pi / 2.0;
  double upper = std::numbers::pi / 2.0;
  int count = 41;
};

struct EigScanRow {
  double q1 = 0.0;
  double q2 = 0.0;
  double lam_max = 0.0;
  double lam_min = 0.0;
  double rel_err_max_pct = 0.0;
  double rel_err_min_pct = 0.0;
  double prior_rel_err_max_pct = 0.0;
  double prior_rel_err_min_pct = 0.0;
};

struct EigScanReport {
  std::vector<EigScanRow> rows;
  double mean_rel_err_max_pct = 0.0;
  double mean_rel_err_min_pct = 0.0;
  double prior_mean_rel_err_max_pct = 0.0;
  double prior_mean_rel_err_min_pct = 0.0;
};

[[nodiscard]] std::vector<double> linspace(double lower, double upper, int count);

[[nodiscard]] EigScanReport run_eigenmanifold_scan(const TrainedModel& model,
                                                   const PlantParams& plant,
                                                   const ScanConfig& config);

}  // namespace lgp
