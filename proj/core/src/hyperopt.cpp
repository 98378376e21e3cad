#include "lgp/hyperopt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <utility>

#include "lgp/errors.hpp"
#include "lgp/rng.hpp"

namespace lgp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double to_encoded(double v, Transform t) { return t == Transform::log ? std::log(v) : v; }
double from_encoded(double z, Transform t) { return t == Transform::log ? std::exp(z) : z; }

struct EntryTarget {
  char which = 'G';  // 'G', 'T' or 'U'
  Index n = 0;
  Index m = 0;
};

EntryTarget parse_name(const std::string& name, Index dim) {
  if (name == "sigma_G2") return {};
  const std::string t_prefix = "sigma_f_T_";
  const std::string u_prefix = "sigma_f_U_";
  char which = 0;
  std::string rest;
  if (name.rfind(t_prefix, 0) == 0) {
    which = 'T';
    rest = name.substr(t_prefix.size());
  } else if (name.rfind(u_prefix, 0) == 0) {
    which = 'U';
    rest = name.substr(u_prefix.size());
  }
  if (which == 0 || rest.size() != 2 || !std::isdigit(static_cast<unsigned char>(rest[0])) ||
      !std::isdigit(static_cast<unsigned char>(rest[1]))) {
    throw ConfigError("unknown hyperparameter name: " + name);
  }
  const Index n = rest[0] - '1';
  const Index m = rest[1] - '1';
  if (n < 0 || m < n || m >= dim) {
    throw ConfigError("hyperparameter " + name + " is not an upper-triangular entry");
  }
  return {which, n, m};
}

}  // namespace

HyperParameterVector::HyperParameterVector(std::vector<HyperParameter> entries)
    : entries_(std::move(entries)) {
  validate();
}

HyperParameterVector HyperParameterVector::from_kernel(const LagrangianKernel& kernel,
                                                       bool include_elastic) {
  std::vector<HyperParameter> e;
  e.push_back({"sigma_G2", kernel.gravity.sigma2(), kSigmaG2Lower, kSigmaG2Upper, Transform::log});
  auto add = [&e](const CholeskyKernelSpec& spec, const char* tag) {
    const Index n = spec.dim();
    for (Index r = 0; r < n; ++r) {
      for (Index c = r; c < n; ++c) {
        std::string name = std::string("sigma_f_") + tag + "_" + std::to_string(r + 1) +
                           std::to_string(c + 1);
        e.push_back({name, spec.hyper_variance()(r, c), kSigmaFLower, kSigmaFUpper,
                     Transform::log});
      }
    }
  };
  add(kernel.kinetic, "T");
  if (include_elastic) add(kernel.elastic, "U");
  return HyperParameterVector(std::move(e));
}

void HyperParameterVector::validate() const {
  for (const HyperParameter& h : entries_) {
    if (!(h.lower <= h.upper) || !std::isfinite(h.lower) || !std::isfinite(h.upper)) {
      throw ConfigError("hyperparameter " + h.name + " has invalid bounds");
    }
    if (h.transform == Transform::log && !(h.lower > 0.0)) {
      throw ConfigError("log-transformed hyperparameter " + h.name + " needs a positive bound");
    }
    if (!(h.value >= h.lower && h.value <= h.upper)) {
      throw ConfigError("hyperparameter " + h.name + " is outside its bounds");
    }
  }
}

Vector HyperParameterVector::values() const {
  Vector v(size());
  for (Index i = 0; i < size(); ++i) v(i) = entries_[static_cast<std::size_t>(i)].value;
  return v;
}

Vector HyperParameterVector::encode() const {
  Vector z(size());
  for (Index i = 0; i < size(); ++i) {
    const HyperParameter& h = entries_[static_cast<std::size_t>(i)];
    z(i) = to_encoded(h.value, h.transform);
  }
  return z;
}

Vector HyperParameterVector::encoded_lower() const {
  Vector z(size());
  for (Index i = 0; i < size(); ++i) {
    const HyperParameter& h = entries_[static_cast<std::size_t>(i)];
    z(i) = to_encoded(h.lower, h.transform);
  }
  return z;
}

Vector HyperParameterVector::encoded_upper() const {
  Vector z(size());
  for (Index i = 0; i < size(); ++i) {
    const HyperParameter& h = entries_[static_cast<std::size_t>(i)];
    z(i) = to_encoded(h.upper, h.transform);
  }
  return z;
}

HyperParameterVector HyperParameterVector::decode(const Vector& z) const {
  if (z.size() != size()) throw DomainError("encoded hyperparameter vector has the wrong size");
  HyperParameterVector out = *this;
  for (Index i = 0; i < size(); ++i) {
    HyperParameter& h = out.entries_[static_cast<std::size_t>(i)];
    h.value = std::clamp(from_encoded(z(i), h.transform), h.lower, h.upper);
  }
  return out;
}

HyperParameterVector HyperParameterVector::with_values(const Vector& values) const {
  if (values.size() != size()) throw DomainError("hyperparameter vector has the wrong size");
  HyperParameterVector out = *this;
  for (Index i = 0; i < size(); ++i) out.entries_[static_cast<std::size_t>(i)].value = values(i);
  out.validate();
  return out;
}

LagrangianKernel HyperParameterVector::apply(const LagrangianKernel& base) const {
  const Index n = base.dim();
  double sigma_g2 = base.gravity.sigma2();
  Matrix sf_t = base.kinetic.hyper_variance();
  Matrix sf_u = base.elastic.hyper_variance();
  for (const HyperParameter& h : entries_) {
    const EntryTarget t = parse_name(h.name, n);
    if (t.which == 'G') {
      sigma_g2 = h.value;
    } else if (t.which == 'T') {
      sf_t(t.n, t.m) = h.value;
    } else {
      sf_u(t.n, t.m) = h.value;
    }
  }
  return {base.kinetic.with_hyper_variance(sf_t), base.elastic.with_hyper_variance(sf_u),
          base.gravity.with_sigma2(sigma_g2)};
}

// ---------------------------------------------------------------------------

double log_marginal_likelihood(const TrainingDataset& data, const PriorModel& prior,
                               const LagrangianKernel& kernel, bool noise_compensation) {
  data.validate();
  try {
    const JointGram joint = assemble_joint(data, prior, kernel, noise_compensation);
    const Vector dy = data.stacked_outputs() - joint.my;
    const SchurSolution sol = solve_schur(joint, dy);
    const double ll = gaussian_log_likelihood(sol.info, dy.size());
    return std::isfinite(ll) ? ll : kNegInf;
  } catch (const NumericalError&) {
    return kNegInf;
  } catch (const InternalConsistencyError&) {
    return kNegInf;
  } catch (const ConfigError&) {
    // Degenerate equilibrium block or hypervariance at the bounds.
    return kNegInf;
  }
}

double gaussian_log_density(const Matrix& K, const Vector& dy) {
  Eigen::LLT<Matrix> llt(K);
  if (llt.info() != Eigen::Success) return kNegInf;
  const Vector diag = llt.matrixLLT().diagonal();
  if ((diag.array() <= 0.0).any()) return kNegInf;
  const double quad = dy.dot(llt.solve(dy));
  return -0.5 * quad - diag.array().log().sum() -
         0.5 * static_cast<double>(dy.size()) * std::log(2.0 * std::numbers::pi);
}

NelderMeadResult nelder_mead_maximize(const std::function<double(const Vector&)>& f,
                                      const Vector& x0, const Vector& lower, const Vector& upper,
                                      const NelderMeadOptions& options) {
  const Index d = x0.size();
  auto clamp = [&](Vector x) {
    for (Index i = 0; i < d; ++i) x(i) = std::clamp(x(i), lower(i), upper(i));
    return x;
  };
  auto eval = [&](const Vector& x) {
    const double v = f(x);
    return std::isnan(v) ? kNegInf : v;
  };

  NelderMeadResult out;
  const Vector start = clamp(x0);
  std::vector<Vector> pts;
  std::vector<double> vals;
  pts.push_back(start);
  vals.push_back(eval(start));
  if (options.max_iterations <= 0 || d == 0) {
    out.x = start;
    out.value = vals[0];
    out.converged = (d == 0);
    return out;
  }
  for (Index i = 0; i < d; ++i) {
    Vector p = start;
    p(i) += options.initial_step;
    if (p(i) > upper(i)) p(i) = start(i) - options.initial_step;
    p = clamp(p);
    pts.push_back(p);
    vals.push_back(eval(p));
  }

  std::vector<std::size_t> order(pts.size());
  auto sort_simplex = [&]() {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });
    std::vector<Vector> p2;
    std::vector<double> v2;
    for (std::size_t i : order) {
      p2.push_back(pts[i]);
      v2.push_back(vals[i]);
    }
    pts = std::move(p2);
    vals = std::move(v2);
  };

  sort_simplex();
  const auto n = static_cast<std::size_t>(d);
  for (int it = 0; it < options.max_iterations; ++it) {
    double diameter = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      diameter = std::max(diameter, (pts[i] - pts[0]).lpNorm<Eigen::Infinity>());
    }
    if (diameter < options.tolerance) {
      out.converged = true;
      break;
    }
    Vector centroid = Vector::Zero(d);
    for (std::size_t i = 0; i < n; ++i) centroid += pts[i];
    centroid /= static_cast<double>(n);

    const Vector xr = clamp(centroid + (centroid - pts[n]));
    const double fr = eval(xr);
    if (fr > vals[0]) {
      const Vector xe = clamp(centroid + 2.0 * (centroid - pts[n]));
      const double fe = eval(xe);
      if (fe > fr) {
        pts[n] = xe;
        vals[n] = fe;
      } else {
        pts[n] = xr;
        vals[n] = fr;
      }
    } else if (fr > vals[n - 1]) {
      pts[n] = xr;
      vals[n] = fr;
    } else {
      const bool outside = fr > vals[n];
      const Vector xc = outside ? clamp(centroid + 0.5 * (xr - centroid))
                                : clamp(centroid + 0.5 * (pts[n] - centroid));
      const double fc = eval(xc);
      if (fc > (outside ? fr : vals[n])) {
        pts[n] = xc;
        vals[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          pts[i] = clamp(pts[0] + 0.5 * (pts[i] - pts[0]));
          vals[i] = eval(pts[i]);
        }
      }
    }
    sort_simplex();
    ++out.iterations;
    out.best_values.push_back(vals[0]);
    out.best_points.push_back(pts[0]);
  }
  out.x = pts[0];
  out.value = vals[0];
  return out;
}

double halton(std::uint64_t index, int dimension) {
  static constexpr std::array<std::uint64_t, 16> primes = {2,  3,  5,  7,  11, 13, 17, 19,
                                                           23, 29, 31, 37, 41, 43, 47, 53};
  if (dimension < 0 || dimension >= static_cast<int>(primes.size())) {
    throw UnsupportedOperation("Halton sequence supports at most 16 dimensions");
  }
  const std::uint64_t b = primes[static_cast<std::size_t>(dimension)];
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(b);
    r += f * static_cast<double>(index % b);
    index /= b;
  }
  return r;
}

OptimizationResult optimize_objective(
    const std::function<double(const HyperParameterVector&)>& objective,
    const HyperParameterVector& init, const OptimizerConfig& config) {
  init.validate();
  if (config.restarts < 0 || config.max_iterations < 0) {
    throw ConfigError("optimizer restarts and iterations must be non-negative");
  }
  const Vector lo = init.encoded_lower();
  const Vector hi = init.encoded_upper();
  const Index d = init.size();
  auto f = [&](const Vector& z) { return objective(init.decode(z)); };

  OptimizationResult result;
  result.best = init;
  result.init_value = objective(init);
  if (std::isnan(result.init_value)) result.init_value = kNegInf;
  result.best_value = result.init_value;

  std::mt19937_64 gen = make_generator(config.seed, RngStream::optimizer, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector shift(d);
  for (Index j = 0; j < d; ++j) shift(j) = unit(gen);

  NelderMeadOptions nm;
  nm.max_iterations = config.max_iterations;
  nm.tolerance = config.tolerance;
  nm.initial_step = config.initial_step;

  for (int r = 0; r <= config.restarts; ++r) {
    Vector z0 = init.encode();
    if (r > 0) {
      for (Index j = 0; j < d; ++j) {
        double u = halton(static_cast<std::uint64_t>(r), static_cast<int>(j)) + shift(j);
        u -= std::floor(u);
        z0(j) = lo(j) + u * (hi(j) - lo(j));
      }
    }
    const NelderMeadResult run = nelder_mead_maximize(f, z0, lo, hi, nm);
    if (!std::isfinite(run.value)) ++result.failed_restarts;
    for (std::size_t it = 0; it < run.best_values.size(); ++it) {
      TraceRow row;
      row.restart = r;
      row.iteration = static_cast<int>(it) + 1;
      row.value = run.best_values[it];
      row.best_value = std::max(result.best_value, run.best_values[it]);
      row.parameters = init.decode(run.best_points[it]).values();
      result.trace.push_back(std::move(row));
    }
    if (run.value > result.best_value) {
      result.best_value = run.value;
      result.best = init.decode(run.x);
      result.best_restart = r;
    }
  }
  if (!std::isfinite(result.best_value)) {
    throw OptimizationFailed("every optimizer restart failed to factorize the Gram matrix");
  }
  return result;
}

OptimizationResult optimize(const TrainingDataset& data, const PriorModel& prior,
                            const LagrangianKernel& base, const HyperParameterVector& init,
                            const OptimizerConfig& config) {
  data.validate();
  auto objective = [&](const HyperParameterVector& h) {
    try {
      return log_marginal_likelihood(data, prior, h.apply(base), config.noise_compensation);
    } catch (const ConfigError&) {
      return kNegInf;
    }
  };
  return optimize_objective(objective, init, config);
}

}  // namespace lgp
