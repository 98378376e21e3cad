#include "lgp/experiments.hpp"

#include <cmath>

#include "lgp/errors.hpp"
#include "lgp/rng.hpp"

namespace lgp {

void DataConfig::validate() const {
  plant.validate();
  if (grid_count < 1) throw ConfigError("grid count must be at least 1");
  if (!(grid_upper >= grid_lower)) throw ConfigError("grid bounds are reversed");
  if (qdot.size() != 2 || qddot.size() != 2) throw ConfigError("qdot and qddot need 2 entries");
  if (!(sigma_eps >= 0.0) || !(sigma_alpha >= 0.0) || !(sigma_omega >= 0.0)) {
    throw ConfigError("noise standard deviations must be non-negative");
  }
}

std::vector<double> linspace(double lower, double upper, int count) {
  if (count < 1) throw ConfigError("linspace needs at least one point");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = 0.5 * (lower + upper);
    return out;
  }
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] =
        (i == count - 1) ? upper : lower + (upper - lower) * i / static_cast<double>(count - 1);
  }
  return out;
}

TrainingDataset generate_clean_data(const DataConfig& config) {
  config.validate();
  const std::vector<double> grid = linspace(config.grid_lower, config.grid_upper, config.grid_count);
  const Index d = static_cast<Index>(grid.size() * grid.size());
  TrainingDataset data;
  data.Q.resize(d, 2);
  data.Xdot.resize(d, 4);
  data.Y.resize(d, 2);
  const Matrix eye = Matrix::Identity(2, 2);
  Index i = 0;
  for (double a : grid) {
    for (double b : grid) {
      const Vector q = (Vector(2) << a, b).finished();
      data.Q.row(i) = q.transpose();
      data.Xdot.row(i).head(2) = config.qdot.transpose();
      data.Xdot.row(i).tail(2) = config.qddot.transpose();
      data.Y.row(i) = plant_torque(config.plant, q, config.qdot, config.qddot).transpose();
      data.sigma_omega.push_back(config.sigma_omega * config.sigma_omega * eye);
      data.sigma_alpha.push_back(config.sigma_alpha * config.sigma_alpha * eye);
      data.sigma_eps.push_back(config.sigma_eps * config.sigma_eps * eye);
      ++i;
    }
  }
  return data;
}

TrainingDataset generate_training_data(const DataConfig& config) {
  TrainingDataset data = generate_clean_data(config);
  for (Index i = 0; i < data.size(); ++i) {
    const auto si = static_cast<std::size_t>(i);
    std::mt19937_64 gen = make_generator(config.seed, RngStream::data_noise, si);
    const Vector omega = sample_gaussian(gen, data.sigma_omega[si]);
    const Vector alpha = sample_gaussian(gen, data.sigma_alpha[si]);
    const Vector eps = sample_gaussian(gen, data.sigma_eps[si]);
    data.Xdot.row(i).head(2) += omega.transpose();
    data.Xdot.row(i).tail(2) += alpha.transpose();
    data.Y.row(i) += eps.transpose();
  }
  return data;
}

LagrangianKernel make_kernel(const KernelConfig& c) {
  const Index n = c.sigma_d_G.size();
  if (c.sigma_f_T.rows() != n || c.sigma_f_U.rows() != n) {
    throw ConfigError("kernel configuration dimensions differ");
  }
  if (!(c.sigma_d_T > 0.0) || !(c.sigma_d_U > 0.0) || !(c.sigma_d_G.array() > 0.0).all()) {
    throw ConfigError("kernel length scales must be positive");
  }
  const Matrix eye = Matrix::Identity(n, n);
  const Matrix lam_t = eye / (c.sigma_d_T * c.sigma_d_T);
  const Matrix lam_u = eye / (c.sigma_d_U * c.sigma_d_U);
  const Matrix lam_g = c.sigma_d_G.cwiseAbs2().cwiseInverse().asDiagonal();
  return {CholeskyKernelSpec(1, c.sigma_f_T, lam_t), CholeskyKernelSpec(0, c.sigma_f_U, lam_u),
          MetricKernel(c.sigma_G2, lam_g)};
}

TrackingMetrics tracking_metrics(const SimResult& sim, const ReferenceFn& ref) {
  TrackingMetrics m;
  if (sim.t.empty()) return m;
  double sp = 0.0;
  double sv = 0.0;
  for (std::size_t i = 0; i < sim.t.size(); ++i) {
    const Reference r = ref(sim.t[i]);
    const Index n = r.q.size();
    const double ep = (sim.x[i].head(n) - r.q).norm();
    const double ev = (sim.x[i].tail(n) - r.qdot).norm();
    sp += ep * ep;
    sv += ev * ev;
    m.max_position = std::max(m.max_position, ep);
    m.max_velocity = std::max(m.max_velocity, ev);
  }
  const auto count = static_cast<double>(sim.t.size());
  m.rms_position = std::sqrt(sp / count);
  m.rms_velocity = std::sqrt(sv / count);
  return m;
}

TrackingResult run_tracking_experiment(const TrainedModel& model, const TrackingConfig& config) {
  if (model.dim() != 2) throw ConfigError("tracking experiment needs the two-link model");
  const ReferenceFn ref = sinusoidal_reference(config.amplitude, 2);
  const PdGains gains = PdGains::uniform(config.kp, config.kd, 2);
  const std::vector<double> samples = sample_grid(0.0, config.t_end, config.sample_dt);
  const Vector x0 = Vector::Zero(4);

  const Controller pd = [&](double t, const Vector& x) { return pd_controller(gains, x, ref(t)); };
  const Controller lgp = [&](double t, const Vector& x) {
    return lgp_pd_controller(model, gains, x, ref(t));
  };
  TrackingResult r;
  r.pd = simulate_plant(config.plant, pd, x0, config.t_end, samples, config.integrator);
  r.lgp = simulate_plant(config.plant, lgp, x0, config.t_end, samples, config.integrator, &model);
  r.pd_metrics = tracking_metrics(r.pd, ref);
  r.lgp_metrics = tracking_metrics(r.lgp, ref);
  return r;
}

std::vector<EnergyRun> run_energy_experiment(const TrainedModel& model,
                                             const EnergyConfig& config) {
  const Index n = model.dim();
  const std::vector<double> samples = sample_grid(0.0, config.t_end, config.sample_dt);
  std::vector<EnergyRun> runs;
  for (double a : config.amplitudes) {
    EnergyRun run;
    run.amplitude = a;
    Vector x0 = Vector::Zero(2 * n);
    x0.head(n).setConstant(a);
    run.sim = simulate_lgp_free(model, config.plant, x0, config.t_end, samples, config.integrator);
    const double e0 = run.sim.energy_hat.empty() ? 0.0 : run.sim.energy_hat.front();
    const double scale = std::max(1.0, std::abs(e0));
    for (std::size_t i = 0; i < run.sim.t.size(); ++i) {
      run.internal_drift = std::max(run.internal_drift, std::abs(run.sim.energy_hat[i] - e0) / scale);
      if (i < run.sim.energy_true.size()) {
        const double et = run.sim.energy_true[i];
        if (std::abs(et) > 1e-12) {
          const double rel = (run.sim.energy_hat[i] - et) / et;
          if (std::abs(rel) > std::abs(run.max_relative_error)) run.max_relative_error = rel;
        }
      }
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

EigScanReport run_eigenmanifold_scan(const TrainedModel& model, const PlantParams& plant,
                                     const ScanConfig& config) {
  if (model.dim() != 2) throw ConfigError("eigenmanifold scan needs the two-link model");
  const std::vector<double> grid = linspace(config.lower, config.upper, config.count);
  EigScanReport rep;
  auto eig = [](const Matrix& M) {
    Eigen::SelfAdjointEigenSolver<Matrix> s(M, Eigen::EigenvaluesOnly);
    return s.eigenvalues();
  };
  for (double a : grid) {
    for (double b : grid) {
      const Vector q = (Vector(2) << a, b).finished();
      const Vector est = eig(model.predict_matrix(1, q));
      const Vector truth = eig(plant_inertia(plant, q));
      const Vector prior = eig(model.prior().inertia(q));
      EigScanRow row;
      row.q1 = a;
      row.q2 = b;
      row.lam_max = est(1);
      row.lam_min = est(0);
      row.rel_err_max_pct = 100.0 * std::abs(est(1) - truth(1)) / truth(1);
      row.rel_err_min_pct = 100.0 * std::abs(est(0) - truth(0)) / truth(0);
      row.prior_rel_err_max_pct = 100.0 * std::abs(prior(1) - truth(1)) / truth(1);
      row.prior_rel_err_min_pct = 100.0 * std::abs(prior(0) - truth(0)) / truth(0);
      rep.mean_rel_err_max_pct += row.rel_err_max_pct;
      rep.mean_rel_err_min_pct += row.rel_err_min_pct;
      rep.prior_mean_rel_err_max_pct += row.prior_rel_err_max_pct;
      rep.prior_mean_rel_err_min_pct += row.prior_rel_err_min_pct;
      rep.rows.push_back(row);
    }
  }
  const auto count = static_cast<double>(rep.rows.size());
  rep.mean_rel_err_max_pct /= count;
  rep.mean_rel_err_min_pct /= count;
  rep.prior_mean_rel_err_max_pct /= count;
  rep.prior_mean_rel_err_min_pct /= count;
  return rep;
}

}  // namespace lgp
