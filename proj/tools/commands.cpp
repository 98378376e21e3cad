#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "config.hpp"
#include "lgp/consistency.hpp"
#include "lgp/dynamics.hpp"
#include "lgp/errors.hpp"
#include "lgp/experiments.hpp"
#include "lgp/hyperopt.hpp"
#include "lgp/serialization.hpp"

namespace lgp::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::string data;
  std::string model;
  std::string out;
  std::string trace;
  std::vector<double> q{0.0, 0.0};
  std::vector<double> qd{0.0, 0.0};
  std::vector<double> qdd{0.0, 0.0};
  std::vector<double> domain;
  std::vector<double> pd_q;
  int n = 0;
  int samples = 0;
};

RunConfig config_of(const Options& o) {
  return o.config.empty() ? parse_config("") : load_config(o.config);
}

Provenance provenance_of(const RunConfig& cfg) {
  return {cfg.hash(), cfg.seed, library_version()};
}

fs::path output_path(const Options& o, const RunConfig& cfg, const std::string& name) {
  return o.out.empty() ? fs::path(cfg.output_dir) / name : fs::path(o.out);
}

Vector vec2(const std::vector<double>& v, const char* what) {
  if (v.size() != 2) throw ConfigError(std::string(what) + " expects 2 values");
  return Eigen::Map<const Vector>(v.data(), 2);
}

json jvec(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json jmat(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) rows.push_back(jvec(m.row(r).transpose()));
  return rows;
}

json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

const char* status_name(IntegrationStatus s) {
  switch (s) {
    case IntegrationStatus::completed: return "completed";
    case IntegrationStatus::stopped_by_monitor: return "stopped_by_monitor";
    case IntegrationStatus::field_error: return "field_error";
    case IntegrationStatus::step_underflow: return "step_underflow";
    case IntegrationStatus::max_steps: return "max_steps";
  }
  return "unknown";
}

json events_json(const std::vector<IntegrationEvent>& events) {
  json a = json::array();
  for (const auto& e : events) a.push_back({{"t", e.t}, {"message", e.message}});
  return a;
}

double lambda_min(const Matrix& M) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(M, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(1) + "\n"); }

// ---------------------------------------------------------------------------

int cmd_generate(const Options& o, std::ostream& out) {
  const RunConfig cfg = config_of(o);
  const TrainingDataset data = generate_training_data(cfg.data);
  const fs::path path = output_path(o, cfg, "dataset.csv");
  save_dataset(path, data, provenance_of(cfg));
  out << json{{"dataset", path.string()}, {"points", data.size()}, {"dim", data.dim()}}.dump()
      << "\n";
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  const RunConfig cfg = config_of(o);
  const fs::path data_path =
      o.data.empty() ? fs::path(cfg.output_dir) / "dataset.csv" : fs::path(o.data);
  const TrainingDataset data = load_dataset(data_path);
  const PriorModel prior = cfg.make_prior_model();
  LagrangianKernel kernel = make_kernel(cfg.kernel);
  TrainingRecord record;
  const Provenance prov = provenance_of(cfg);
  if (cfg.optimize) {
    const HyperParameterVector init = HyperParameterVector::from_kernel(kernel);
    OptimizationResult res = optimize(data, prior, kernel, init, cfg.optimizer);
    kernel = res.best.apply(kernel);
    for (const auto& e : init.entries()) record.parameter_names.push_back(e.name);
    record.optimization = std::move(res);
  }
  const TrainedModel model = train(data, prior, kernel, cfg.noise_compensation);
  const fs::path path = output_path(o, cfg, "model.json");
  save_model(path, model, record, prov);
  json summary = {{"model", path.string()},
                  {"log_likelihood", jnum(model.log_likelihood())},
                  {"jitter", model.conditioning().jitter}};
  if (record.optimization) {
    const fs::path tpath =
        o.trace.empty() ? path.parent_path() / "trace.csv" : fs::path(o.trace);
    write_file_atomic(tpath,
                      trace_to_csv(*record.optimization, record.parameter_names, prov).to_string());
    summary["trace"] = tpath.string();
    summary["init_log_likelihood"] = jnum(record.optimization->init_value);
    json hp = json::object();
    const auto& entries = record.optimization->best.entries();
    for (const auto& e : entries) hp[e.name] = e.value;
    summary["hyperparameters"] = hp;
  }
  out << summary.dump() << "\n";
  return kExitOk;
}

int cmd_predict(const Options& o, std::ostream& out) {
  const TrainedModel model = load_model(o.model);
  const Vector q = vec2(o.q, "--q");
  const Vector qd = vec2(o.qd, "--qd");
  const Vector qdd = vec2(o.qdd, "--qdd");
  const Matrix M = model.predict_matrix(1, q);
  json j = {{"q", jvec(q)},
            {"qd", jvec(qd)},
            {"qdd", jvec(qdd)},
            {"tau", jvec(model.predict_torque(q, qd, qdd))},
            {"M", jmat(M)},
            {"C", jmat(model.predict_coriolis(q, qd))},
            {"g", jvec(model.predict_potential_gradient(q))},
            {"V", model.predict_potential(q)},
            {"T", model.predict_kinetic(q, qd)},
            {"E", model.predict_energy(q, qd)},
            {"L", model.predict_lagrangian(q, qd)},
            {"lambda_min_M", lambda_min(M)}};
  if (o.out.empty()) {
    out << j.dump(1) << "\n";
  } else {
    write_json(o.out, j);
  }
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const RunConfig cfg = config_of(o);
  const TrainedModel model = load_model(o.model);
  const auto runs = run_energy_experiment(model, cfg.energy);
  CsvTable t;
  t.provenance = provenance_of(cfg);
  t.header = {"amplitude", "t",    "q1",   "q2",   "dq1",      "dq2",
              "E_hat",     "E_true", "tau1", "tau2", "rel_error"};
  json summary = json::array();
  bool all_completed = true;
  for (const auto& r : runs) {
    for (std::size_t i = 0; i < r.sim.t.size(); ++i) {
      const Vector& x = r.sim.x[i];
      const double et = r.sim.energy_true[i];
      const double rel = std::abs(et) > 1e-12 ? (r.sim.energy_hat[i] - et) / et : 0.0;
      t.rows.push_back({format_double(r.amplitude), format_double(r.sim.t[i]), format_double(x(0)),
                        format_double(x(1)), format_double(x(2)), format_double(x(3)),
                        format_double(r.sim.energy_hat[i]), format_double(et),
                        format_double(r.sim.torque[i](0)), format_double(r.sim.torque[i](1)),
                        format_double(rel)});
    }
    all_completed = all_completed && r.sim.status == IntegrationStatus::completed;
    summary.push_back({{"amplitude", r.amplitude},
                       {"status", status_name(r.sim.status)},
                       {"events", events_json(r.sim.events)},
                       {"samples", r.sim.t.size()},
                       {"internal_drift", r.internal_drift},
                       {"max_relative_error", r.max_relative_error}});
  }
  const fs::path path = output_path(o, cfg, "energy.csv");
  write_file_atomic(path, t.to_string());
  out << json{{"report", path.string()}, {"runs", summary}}.dump() << "\n";
  return all_completed ? kExitOk : kExitNumerical;
}

int cmd_track(const Options& o, std::ostream& out) {
  const RunConfig cfg = config_of(o);
  const TrainedModel model = load_model(o.model);
  const TrackingResult r = run_tracking_experiment(model, cfg.tracking);
  const ReferenceFn ref = sinusoidal_reference(cfg.tracking.amplitude, 2);
  CsvTable t;
  t.provenance = provenance_of(cfg);
  t.header = {"controller", "t",     "q1",      "q2",      "dq1",  "dq2",
              "qref1",      "qref2", "err_pos", "err_vel", "tau1", "tau2"};
  auto emit = [&](const char* name, const SimResult& s) {
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      const Reference rr = ref(s.t[i]);
      const Vector& x = s.x[i];
      t.rows.push_back({name, format_double(s.t[i]), format_double(x(0)), format_double(x(1)),
                        format_double(x(2)), format_double(x(3)), format_double(rr.q(0)),
                        format_double(rr.q(1)), format_double((x.head(2) - rr.q).norm()),
                        format_double((x.tail(2) - rr.qdot).norm()),
                        format_double(s.torque[i](0)), format_double(s.torque[i](1))});
    }
  };
  emit("pd", r.pd);
  emit("lgp", r.lgp);
  const fs::path path = output_path(o, cfg, "tracking.csv");
  write_file_atomic(path, t.to_string());
  auto metrics = [](const TrackingMetrics& m, const SimResult& s) {
    return json{{"rms_position", m.rms_position},
                {"max_position", m.max_position},
                {"rms_velocity", m.rms_velocity},
                {"max_velocity", m.max_velocity},
                {"status", status_name(s.status)}};
  };
  out << json{{"report", path.string()},
              {"pd", metrics(r.pd_metrics, r.pd)},
              {"lgp", metrics(r.lgp_metrics, r.lgp)}}
             .dump()
      << "\n";
  const bool ok = r.pd.status == IntegrationStatus::completed &&
                  r.lgp.status == IntegrationStatus::completed;
  return ok ? kExitOk : kExitNumerical;
}

int cmd_scan(const Options& o, std::ostream& out) {
  RunConfig cfg = config_of(o);
  if (!o.domain.empty()) {
    if (o.domain.size() != 2 || !(o.domain[1] >= o.domain[0])) {
      throw ConfigError("--domain expects lower and upper bounds");
    }
    cfg.scan.lower = o.domain[0];
    cfg.scan.upper = o.domain[1];
  }
  if (o.n > 0) cfg.scan.count = o.n;
  const TrainedModel model = load_model(o.model);
  const EigScanReport rep = run_eigenmanifold_scan(model, cfg.plant, cfg.scan);
  CsvTable t;
  t.provenance = provenance_of(cfg);
  t.header = {"q1",          "q2",           "lam_max",       "lam_min",
              "true_lam_max", "true_lam_min", "rel_err_max_pct", "rel_err_min_pct",
              "prior_rel_err_max_pct", "prior_rel_err_min_pct", "bound", "bound_satisfied",
              "pd_satisfied"};
  int violations = 0;
  int indefinite = 0;
  double worst_gap = INFINITY;
  for (const auto& row : rep.rows) {
    const Vector q = (Vector(2) << row.q1, row.q2).finished();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(plant_inertia(cfg.plant, q), Eigen::EigenvaluesOnly);
    const EigBoundReport b = eig_lower_bound_unchecked(model, 1, q);
    violations += b.satisfied ? 0 : 1;
    indefinite += row.lam_min > 0.0 ? 0 : 1;
    worst_gap = std::min(worst_gap, b.actual_lambda_min - b.bound);
    t.rows.push_back({format_double(row.q1), format_double(row.q2), format_double(row.lam_max),
                      format_double(row.lam_min), format_double(eig.eigenvalues()(1)),
                      format_double(eig.eigenvalues()(0)), format_double(row.rel_err_max_pct),
                      format_double(row.rel_err_min_pct), format_double(row.prior_rel_err_max_pct),
                      format_double(row.prior_rel_err_min_pct), format_double(b.bound),
                      b.satisfied ? "true" : "false", row.lam_min > 0.0 ? "true" : "false"});
  }
  const fs::path path = output_path(o, cfg, "eig_scan.csv");
  write_file_atomic(path, t.to_string());
  out << json{{"report", path.string()},
              {"rows", rep.rows.size()},
              {"bound_violations", violations},
              {"indefinite_nodes", indefinite},
              {"min_bound_gap", jnum(worst_gap)},
              {"mean_rel_err_max_pct", rep.mean_rel_err_max_pct},
              {"mean_rel_err_min_pct", rep.mean_rel_err_min_pct},
              {"prior_mean_rel_err_max_pct", rep.prior_mean_rel_err_max_pct},
              {"prior_mean_rel_err_min_pct", rep.prior_mean_rel_err_min_pct}}
             .dump()
      << "\n";
  if (violations > 0) throw TheoremViolation("eigenvalue lower bound exceeds lambda_min");
  return kExitOk;
}

int cmd_check(const Options& o, std::ostream& out) {
  const RunConfig cfg = config_of(o);
  const TrainedModel model = load_model(o.model);
  const EquilibriumReport eq = verify_equilibrium(model);
  const QuadraticFormReport qf = check_quadratic_form(model, 100, cfg.seed);
  int nodes = 0;
  int indefinite = 0;
  for (double a : linspace(cfg.scan.lower, cfg.scan.upper, cfg.scan.count)) {
    for (double b : linspace(cfg.scan.lower, cfg.scan.upper, cfg.scan.count)) {
      const EigBoundReport r = eig_lower_bound(model, 1, (Vector(2) << a, b).finished());
      ++nodes;
      indefinite += r.actual_lambda_min > 0.0 ? 0 : 1;
    }
  }
  auto check = [](const EquilibriumCheck& c) {
    return json{{"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}};
  };
  const bool quad_ok = qf.max_scaling_error <= 1e-12 && qf.max_path_error <= 1e-8;
  const json j = {{"equilibrium",
                   {{"potential", check(eq.potential)},
                    {"potential_gradient", check(eq.potential_gradient)},
                    {"lagrangian", check(eq.lagrangian)},
                    {"lagrangian_gradient", check(eq.lagrangian_gradient)},
                    {"pass", eq.pass()}}},
                  {"quadratic_form",
                   {{"points", qf.points},
                    {"max_scaling_error", qf.max_scaling_error},
                    {"max_direct_scaling_error", qf.max_direct_scaling_error},
                    {"max_path_error", qf.max_path_error},
                    {"pass", quad_ok}}},
                  {"eigen_bound", {{"nodes", nodes}, {"violations", 0}, {"indefinite_nodes", indefinite}}}};
  const fs::path path = output_path(o, cfg, "consistency.json");
  write_json(path, j);
  out << j.dump() << "\n";
  if (!eq.pass()) throw TheoremViolation("equilibrium conditions are not met");
  if (!quad_ok) throw TheoremViolation("kinetic energy estimate is not a quadratic form");
  return kExitOk;
}

int cmd_pd_probability(const Options& o, std::ostream& out) {
  RunConfig cfg = config_of(o);
  const TrainedModel model = load_model(o.model);
  if (!o.pd_q.empty()) cfg.pd_q = o.pd_q;
  if (o.samples > 0) cfg.pd_samples = o.samples;
  PdProbabilityConfig pc;
  pc.k = cfg.pd_k;
  pc.q = vec2(cfg.pd_q, "pd_probability q");
  pc.n_samples = cfg.pd_samples;
  pc.seed = cfg.seed;
  pc.noise_compensation = cfg.noise_compensation;
  const TrainingDataset truth = generate_clean_data(cfg.data);
  const PdProbabilityResult r = pd_probability_mc(truth, model.prior(), model.kernel(), pc);
  CsvTable t;
  t.provenance = provenance_of(cfg);
  t.header = {"q1", "q2", "k", "samples", "positive", "used", "discarded", "estimate",
              "standard_error"};
  t.rows.push_back({format_double(pc.q(0)), format_double(pc.q(1)), std::to_string(pc.k),
                    std::to_string(pc.n_samples), std::to_string(r.positive),
                    std::to_string(r.used), std::to_string(r.discarded),
                    format_double(r.estimate), format_double(r.standard_error)});
  const fs::path path = output_path(o, cfg, "pd_probability.csv");
  write_file_atomic(path, t.to_string());
  out << json{{"report", path.string()},
              {"estimate", r.estimate},
              {"standard_error", r.standard_error},
              {"used", r.used},
              {"discarded", r.discarded}}
             .dump()
      << "\n";
  return kExitOk;
}

void error_line(std::ostream& err, const char* kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lagrangian Gaussian process regression for Euler-Lagrange systems", "lgp"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("generate-data", "write the training dataset CSV");
  gen->add_option("--config", o.config, "run configuration (INI)");
  gen->add_option("--out", o.out, "dataset CSV path");

  auto* tr = app.add_subcommand("train", "optimize hyperparameters and write the model JSON");
  tr->add_option("--config", o.config, "run configuration (INI)");
  tr->add_option("--data", o.data, "dataset CSV");
  tr->add_option("--out", o.out, "model JSON path");
  tr->add_option("--trace", o.trace, "optimizer trace CSV path");

  auto* pr = app.add_subcommand("predict", "evaluate the model at one state, JSON to stdout");
  pr->add_option("--model", o.model, "model JSON")->required();
  pr->add_option("--q", o.q, "configuration")->expected(2);
  pr->add_option("--qd", o.qd, "velocity")->expected(2);
  pr->add_option("--qdd", o.qdd, "acceleration")->expected(2);
  pr->add_option("--out", o.out, "write JSON here instead of stdout");

  auto* sim = app.add_subcommand("simulate", "free trajectories of the learned dynamics");
  sim->add_option("--config", o.config, "run configuration (INI)");
  sim->add_option("--model", o.model, "model JSON")->required();
  sim->add_option("--out", o.out, "energy report CSV path");

  auto* trk = app.add_subcommand("track", "PD and model-augmented tracking on the true plant");
  trk->add_option("--config", o.config, "run configuration (INI)");
  trk->add_option("--model", o.model, "model JSON")->required();
  trk->add_option("--out", o.out, "tracking report CSV path");

  auto* scan = app.add_subcommand("scan-eig", "eigenvalue scan of the inertia estimate");
  scan->alias("scan");
  scan->add_option("--config", o.config, "run configuration (INI)");
  scan->add_option("--model", o.model, "model JSON")->required();
  scan->add_option("--domain", o.domain, "lower and upper bound per joint")->expected(2);
  scan->add_option("--n", o.n, "points per joint");
  scan->add_option("--out", o.out, "scan report CSV path");

  auto* chk = app.add_subcommand("check-consistency", "equilibrium, quadratic form, eigen bound");
  chk->add_option("--config", o.config, "run configuration (INI)");
  chk->add_option("--model", o.model, "model JSON")->required();
  chk->add_option("--out", o.out, "report JSON path");

  auto* pdp = app.add_subcommand("pd-probability", "Monte Carlo estimate of Pr{M(q) > 0}");
  pdp->add_option("--config", o.config, "run configuration (INI)");
  pdp->add_option("--model", o.model, "model JSON (kernel and prior)")->required();
  pdp->add_option("--q", o.pd_q, "configuration")->expected(2);
  pdp->add_option("--samples", o.samples, "number of redraws");
  pdp->add_option("--out", o.out, "report CSV path");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    error_line(err, "config_error", e.what());
    return kExitConfig;
  }

  try {
    if (gen->parsed()) return cmd_generate(o, out);
    if (tr->parsed()) return cmd_train(o, out);
    if (pr->parsed()) return cmd_predict(o, out);
    if (sim->parsed()) return cmd_simulate(o, out);
    if (trk->parsed()) return cmd_track(o, out);
    if (scan->parsed()) return cmd_scan(o, out);
    if (chk->parsed()) return cmd_check(o, out);
    if (pdp->parsed()) return cmd_pd_probability(o, out);
  } catch (const TheoremViolation& e) {
    error_line(err, "theorem_violation", e.what());
    return kExitTheorem;
  } catch (const InternalConsistencyError& e) {
    error_line(err, "theorem_violation", e.what());
    return kExitTheorem;
  } catch (const ConfigError& e) {
    error_line(err, "config_error", e.what());
    return kExitConfig;
  } catch (const NumericalError& e) {
    error_line(err, "numerical_error", e.what());
    return kExitNumerical;
  } catch (const DomainError& e) {
    error_line(err, "numerical_error", e.what());
    return kExitNumerical;
  } catch (const Error& e) {
    error_line(err, "io_error", e.what());
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    error_line(err, "io_error", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    error_line(err, "numerical_error", e.what());
    return kExitNumerical;
  }
  error_line(err, "config_error", "no subcommand");
  return kExitConfig;
}

}  // namespace lgp::cli
