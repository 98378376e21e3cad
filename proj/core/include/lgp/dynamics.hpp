#pragma once

// Two-link point-mass plant, the learned Euler-Lagrange dynamics, tracking
// controllers and closed-loop / free simulation.

#include <functional>
#include <string>
#include <vector>

#include "lgp/integrator.hpp"
#include "lgp/model.hpp"

namespace lgp {

/// Planar two-link arm with point masses at the link tips and gravity along
/// +x, so the hanging configuration q = 0 is the stable equilibrium.
struct PlantParams {
  double m1 = 1.0;
  double m2 = 1.0;
  double l1 = 1.0;
  double l2 = 1.0;
  double g = 10.0;
  /// Relative errors of the prior parameters: m_n' = (1 + delta_n) m_n.
  double delta1 = -0.5;
  double delta2 = 0.5;

  void validate() const;
  /// Parameters with masses and lengths scaled by (1 + delta_n).
  [[nodiscard]] PlantParams erroneous() const;
};

struct PlantTruth {
  Matrix M;
  Matrix C;
  Vector g;
  double V = 0.0;
};

[[nodiscard]] Matrix plant_inertia(const PlantParams& p, const Vector& q);
[[nodiscard]] Matrix plant_inertia_partial(const PlantParams& p, const Vector& q, Index m);
[[nodiscard]] double plant_potential(const PlantParams& p, const Vector& q);
[[nodiscard]] Vector plant_potential_gradient(const PlantParams& p, const Vector& q);
[[nodiscard]] PlantTruth plant_truth(const PlantParams& p, const Vector& q, const Vector& qdot);
[[nodiscard]] Vector plant_torque(const PlantParams& p, const Vector& q, const Vector& qdot,
                                  const Vector& qddot);
[[nodiscard]] double plant_energy(const PlantParams& p, const Vector& q, const Vector& qdot);

/// Prior with the same functional form as the plant, built from `params`
/// as given (pass PlantParams::erroneous() for the perturbed prior).
[[nodiscard]] PriorModel make_two_link_prior(const PlantParams& params);

/// Rebuilds a prior from its serialized identifier: "zero" or "two_link"
/// with parameters [m1, m2, l1, l2, g].
[[nodiscard]] PriorModel make_prior(const std::string& id, const std::vector<double>& params,
                                    Index dim);

/// [x2; M^-1 (u - C x2 - g)] of the learned model. Throws DomainExitError when
/// the inertia estimate is not positive definite.
[[nodiscard]] Vector lgp_vector_field(const TrainedModel& model, const Vector& x, const Vector& u);
[[nodiscard]] Vector plant_vector_field(const PlantParams& p, const Vector& x, const Vector& u);

struct Reference {
  Vector q;
  Vector qdot;
  Vector qddot;
};
using ReferenceFn = std::function<Reference(double)>;

/// q_d(t) = amplitude * sin(t) * 1.
[[nodiscard]] ReferenceFn sinusoidal_reference(double amplitude, Index dim);

struct PdGains {
  Matrix Kp;
  Matrix Kd;
  static PdGains uniform(double kp, double kd, Index dim);
};

/// -Kp e - Kd edot with e = q - q_d.
[[nodiscard]] Vector pd_controller(const PdGains& gains, const Vector& x, const Reference& ref);
/// M qddot_d + C qdot_d + g - Kp e - Kd edot with the model's estimates.
[[nodiscard]] Vector lgp_pd_controller(const TrainedModel& model, const PdGains& gains,
                                       const Vector& x, const Reference& ref);
/// Same feedforward law with explicit matrices (e.g. the true plant).
[[nodiscard]] Vector feedforward_pd_controller(const Matrix& M, const Matrix& C, const Vector& g,
                                               const PdGains& gains, const Vector& x,
                                               const Reference& ref);

using Controller = std::function<Vector(double t, const Vector& x)>;

struct SimResult {
  std::vector<double> t;
  std::vector<Vector> x;
  std::vector<double> energy_hat;   // empty when no model is attached
  std::vector<double> energy_true;
  std::vector<Vector> torque;
  std::vector<IntegrationEvent> events;
  IntegrationStatus status = IntegrationStatus::completed;
  long accepted_steps = 0;
  long rejected_steps = 0;
};

/// Uniform sample grid t0, t0 + dt, ..., t1 (t1 included).
[[nodiscard]] std::vector<double> sample_grid(double t0, double t1, double dt);

/// True plant under `controller`. `model` (optional) adds energy estimates.
[[nodiscard]] SimResult simulate_plant(const PlantParams& plant, const Controller& controller,
                                       const Vector& x0, double t1,
                                       const std::vector<double>& samples,
                                       const IntegratorOptions& options = {},
                                       const TrainedModel* model = nullptr);

/// Unforced learned dynamics. Stops with an event when the state leaves the
/// domain (inertia estimate not PD, or energy estimate negative).
[[nodiscard]] SimResult simulate_lgp_free(const TrainedModel& model, const PlantParams& plant,
                                          const Vector& x0, double t1,
                                          const std::vector<double>& samples,
                                          const IntegratorOptions& options = {});

}  // namespace lgp
