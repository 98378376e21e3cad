#include "lgp/dynamics.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "lgp/errors.hpp"

namespace lgp {

namespace {

void require_two_link(const Vector& q) {
  if (q.size() != 2) throw DomainError("the two-link plant needs N = 2");
  require_finite(q, "q");
}

double min_eigenvalue(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

}  // namespace

void PlantParams::validate() const {
  if (!(m1 > 0.0) || !(m2 > 0.0) || !(l1 > 0.0) || !(l2 > 0.0)) {
    throw ConfigError("plant masses and lengths must be positive");
  }
  if (!std::isfinite(g) || !std::isfinite(delta1) || !std::isfinite(delta2)) {
    throw ConfigError("plant parameters must be finite");
  }
  if (!(delta1 > -1.0) || !(delta2 > -1.0)) {
    throw ConfigError("prior error factors must exceed -1");
  }
}

PlantParams PlantParams::erroneous() const {
  PlantParams p = *this;
  p.m1 = (1.0 + delta1) * m1;
  p.l1 = (1.0 + delta1) * l1;
  p.m2 = (1.0 + delta2) * m2;
  p.l2 = (1.0 + delta2) * l2;
  p.delta1 = 0.0;
  p.delta2 = 0.0;
  return p;
}

Matrix plant_inertia(const PlantParams& p, const Vector& q) {
  require_two_link(q);
  const double c2 = std::cos(q(1));
  const double l2sq = p.m2 * p.l2 * p.l2;
  const double cross = p.m2 * p.l1 * p.l2 * c2;
  Matrix M(2, 2);
  M(0, 0) = (p.m1 + p.m2) * p.l1 * p.l1 + l2sq + 2.0 * cross;
  M(0, 1) = l2sq + cross;
  M(1, 0) = M(0, 1);
  M(1, 1) = l2sq;
  return M;
}

Matrix plant_inertia_partial(const PlantParams& p, const Vector& q, Index m) {
  require_two_link(q);
  Matrix dM = Matrix::Zero(2, 2);
  if (m == 1) {
    const double s = -p.m2 * p.l1 * p.l2 * std::sin(q(1));
    dM(0, 0) = 2.0 * s;
    dM(0, 1) = s;
    dM(1, 0) = s;
  } else if (m != 0) {
    throw DomainError("partial derivative index out of range");
  }
  return dM;
}

double plant_potential(const PlantParams& p, const Vector& q) {
  require_two_link(q);
  return (p.m1 + p.m2) * p.g * p.l1 * (1.0 - std::cos(q(0))) +
         p.m2 * p.g * p.l2 * (1.0 - std::cos(q(0) + q(1)));
}

Vector plant_potential_gradient(const PlantParams& p, const Vector& q) {
  require_two_link(q);
  const double s12 = p.m2 * p.g * p.l2 * std::sin(q(0) + q(1));
  Vector g(2);
  g(0) = (p.m1 + p.m2) * p.g * p.l1 * std::sin(q(0)) + s12;
  g(1) = s12;
  return g;
}

PlantTruth plant_truth(const PlantParams& p, const Vector& q, const Vector& qdot) {
  require_two_link(qdot);
  PlantTruth t;
  t.M = plant_inertia(p, q);
  t.C = christoffel_coriolis({plant_inertia_partial(p, q, 0), plant_inertia_partial(p, q, 1)},
                             qdot);
  t.g = plant_potential_gradient(p, q);
  t.V = plant_potential(p, q);
  return t;
}

Vector plant_torque(const PlantParams& p, const Vector& q, const Vector& qdot,
                    const Vector& qddot) {
  const PlantTruth t = plant_truth(p, q, qdot);
  return t.M * qddot + t.C * qdot + t.g;
}

double plant_energy(const PlantParams& p, const Vector& q, const Vector& qdot) {
  return 0.5 * qdot.dot(plant_inertia(p, q) * qdot) + plant_potential(p, q);
}

PriorModel make_two_link_prior(const PlantParams& params) {
  params.validate();
  PriorFunctions fn;
  fn.inertia = [params](const Vector& q) { return plant_inertia(params, q); };
  fn.inertia_partial = [params](const Vector& q, Index m) {
    return plant_inertia_partial(params, q, m);
  };
  fn.gravity = [params](const Vector& q) { return plant_potential(params, q); };
  fn.gravity_gradient = [params](const Vector& q) { return plant_potential_gradient(params, q); };
  return {2, "two_link", {params.m1, params.m2, params.l1, params.l2, params.g}, std::move(fn)};
}

PriorModel make_prior(const std::string& id, const std::vector<double>& params, Index dim) {
  if (id == "zero") {
    if (!params.empty()) throw ConfigError("the zero prior takes no parameters");
    return PriorModel::zero(dim);
  }
  if (id == "two_link") {
    if (params.size() != 5 || dim != 2) {
      throw ConfigError("two_link prior needs N = 2 and parameters [m1, m2, l1, l2, g]");
    }
    PlantParams p;
    p.m1 = params[0];
    p.m2 = params[1];
    p.l1 = params[2];
    p.l2 = params[3];
    p.g = params[4];
    p.delta1 = 0.0;
    p.delta2 = 0.0;
    return make_two_link_prior(p);
  }
  throw ConfigError("unknown prior identifier: " + id);
}

Vector lgp_vector_field(const TrainedModel& model, const Vector& x, const Vector& u) {
  const Index n = model.dim();
  if (x.size() != 2 * n || u.size() != n) throw DomainError("state or input has the wrong size");
  const Vector q = x.head(n);
  const Vector qd = x.tail(n);
  const Matrix M = model.predict_matrix(1, q);
  Eigen::LLT<Matrix> llt(M);
  if (llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "inertia estimate is not positive definite at q = [" << q.transpose() << "]";
    throw DomainExitError(msg.str(), q, min_eigenvalue(M));
  }
  Vector out(2 * n);
  out.head(n) = qd;
  out.tail(n) = llt.solve(u - model.predict_coriolis(q, qd) * qd -
                          model.predict_potential_gradient(q));
  return out;
}

Vector plant_vector_field(const PlantParams& p, const Vector& x, const Vector& u) {
  if (x.size() != 4 || u.size() != 2) throw DomainError("state or input has the wrong size");
  const Vector q = x.head(2);
  const Vector qd = x.tail(2);
  const PlantTruth t = plant_truth(p, q, qd);
  Vector out(4);
  out.head(2) = qd;
  out.tail(2) = t.M.llt().solve(u - t.C * qd - t.g);
  return out;
}

ReferenceFn sinusoidal_reference(double amplitude, Index dim) {
  return [amplitude, dim](double t) {
    const Vector ones = Vector::Ones(dim);
    return Reference{amplitude * std::sin(t) * ones, amplitude * std::cos(t) * ones,
                     -amplitude * std::sin(t) * ones};
  };
}

PdGains PdGains::uniform(double kp, double kd, Index dim) {
  return {kp * Matrix::Identity(dim, dim), kd * Matrix::Identity(dim, dim)};
}

Vector pd_controller(const PdGains& gains, const Vector& x, const Reference& ref) {
  const Index n = ref.q.size();
  return -gains.Kp * (x.head(n) - ref.q) - gains.Kd * (x.tail(n) - ref.qdot);
}

Vector feedforward_pd_controller(const Matrix& M, const Matrix& C, const Vector& g,
                                 const PdGains& gains, const Vector& x, const Reference& ref) {
  return M * ref.qddot + C * ref.qdot + g + pd_controller(gains, x, ref);
}

Vector lgp_pd_controller(const TrainedModel& model, const PdGains& gains, const Vector& x,
                         const Reference& ref) {
  const Index n = model.dim();
  const Vector q = x.head(n);
  const Vector qd = x.tail(n);
  return feedforward_pd_controller(model.predict_matrix(1, q), model.predict_coriolis(q, qd),
                                   model.predict_potential_gradient(q), gains, x, ref);
}

std::vector<double> sample_grid(double t0, double t1, double dt) {
  if (!(dt > 0.0) || !(t1 > t0)) throw ConfigError("sample grid needs dt > 0 and t1 > t0");
  const auto count = static_cast<long>(std::floor((t1 - t0) / dt + 1e-9));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count) + 2);
  for (long i = 0; i <= count; ++i) out.push_back(t0 + static_cast<double>(i) * dt);
  if (t1 - out.back() > 1e-9 * dt) out.push_back(t1);
  else out.back() = t1;
  return out;
}

SimResult simulate_plant(const PlantParams& plant, const Controller& controller, const Vector& x0,
                         double t1, const std::vector<double>& samples,
                         const IntegratorOptions& options, const TrainedModel* model) {
  plant.validate();
  const VectorField field = [&](double t, const Vector& x) {
    return plant_vector_field(plant, x, controller(t, x));
  };
  const Trajectory traj = integrate(field, x0, samples.front(), t1, options, &samples);
  SimResult r;
  r.t = traj.t;
  r.x = traj.x;
  r.events = traj.events;
  r.status = traj.status;
  r.accepted_steps = traj.accepted_steps;
  r.rejected_steps = traj.rejected_steps;
  for (std::size_t i = 0; i < r.t.size(); ++i) {
    const Vector& x = r.x[i];
    r.torque.push_back(controller(r.t[i], x));
    r.energy_true.push_back(plant_energy(plant, x.head(2), x.tail(2)));
    if (model) r.energy_hat.push_back(model->predict_energy(x.head(2), x.tail(2)));
  }
  return r;
}

SimResult simulate_lgp_free(const TrainedModel& model, const PlantParams& plant, const Vector& x0,
                            double t1, const std::vector<double>& samples,
                            const IntegratorOptions& options) {
  const Index n = model.dim();
  const Vector u = Vector::Zero(n);
  const VectorField field = [&](double, const Vector& x) { return lgp_vector_field(model, x, u); };
  const StepMonitor monitor = [&](double, const Vector& x) -> std::optional<std::string> {
    const Vector q = x.head(n);
    const Vector qd = x.tail(n);
    const double lmin = min_eigenvalue(model.predict_matrix(1, q));
    if (!(lmin > 0.0)) return std::string("inertia estimate lost positive definiteness");
    const double v = model.predict_potential(q);
    if (v + 0.5 * lmin * qd.squaredNorm() < -1e-8) {
      return std::string("energy estimate became negative (storage function invalid)");
    }
    return std::nullopt;
  };
  const Trajectory traj = integrate(field, x0, samples.front(), t1, options, &samples, monitor);
  SimResult r;
  r.t = traj.t;
  r.x = traj.x;
  r.events = traj.events;
  r.status = traj.status;
  r.accepted_steps = traj.accepted_steps;
  r.rejected_steps = traj.rejected_steps;
  for (std::size_t i = 0; i < r.t.size(); ++i) {
    const Vector& x = r.x[i];
    r.torque.push_back(u);
    r.energy_hat.push_back(model.predict_energy(x.head(n), x.tail(n)));
    if (n == 2) r.energy_true.push_back(plant_energy(plant, x.head(2), x.tail(2)));
  }
  return r;
}

}  // namespace lgp
