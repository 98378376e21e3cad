#include "config.hpp"

#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "lgp/dynamics.hpp"
#include "lgp/errors.hpp"
#include "lgp/serialization.hpp"

namespace lgp::cli {

namespace {

struct Key {
  KeyDoc doc;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::istringstream is(text);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "': not a number: '" + tok + "'");
    }
  }
  return out;
}

double parse_number(const std::string& text, const std::string& key) {
  const auto v = parse_list(text, key);
  if (v.size() != 1) throw ConfigError("key '" + key + "' expects one number");
  return v[0];
}

std::uint64_t parse_unsigned(const std::string& text, const std::string& key) {
  std::istringstream is(text);
  std::string tok, extra;
  is >> tok >> extra;
  if (tok.empty() || !extra.empty() || tok.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError("key '" + key + "' expects a non-negative integer");
  }
  try {
    return std::stoull(tok);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' is out of range");
  }
}

int parse_int(const std::string& text, const std::string& key) {
  const std::uint64_t v = parse_unsigned(text, key);
  if (v > 1000000000ULL) throw ConfigError("key '" + key + "' is out of range");
  return static_cast<int>(v);
}

bool parse_bool(const std::string& text, const std::string& key) {
  std::istringstream is(text);
  std::string tok;
  is >> tok;
  if (tok == "true" || tok == "1" || tok == "yes") return true;
  if (tok == "false" || tok == "0" || tok == "no") return false;
  throw ConfigError("key '" + key + "' expects true or false");
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + format_double(v[i]);
  return out;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_std(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

// Upper-triangular entries, row major.
std::vector<double> upper(const Matrix& m) {
  std::vector<double> out;
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = r; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

Matrix from_upper(const std::vector<double>& v, Index n, const std::string& key) {
  if (static_cast<Index>(v.size()) != n * (n + 1) / 2) {
    throw ConfigError("key '" + key + "' expects " + std::to_string(n * (n + 1) / 2) +
                      " upper-triangular entries");
  }
  Matrix m = Matrix::Zero(n, n);
  std::size_t k = 0;
  for (Index r = 0; r < n; ++r) {
    for (Index c = r; c < n; ++c) m(r, c) = v[k++];
  }
  return m;
}

#define LGP_NUM(sec, key, unit, desc, field)                                              \
  Key {                                                                                   \
    {sec, key, unit, desc},                                                               \
        [](RunConfig& c, const std::string& s) { c.field = parse_number(s, key); },       \
        [](const RunConfig& c) { return format_double(c.field); }                         \
  }
#define LGP_INT(sec, key, unit, desc, field)                                              \
  Key {                                                                                   \
    {sec, key, unit, desc}, [](RunConfig& c, const std::string& s) { c.field = parse_int(s, key); }, \
        [](const RunConfig& c) { return std::to_string(c.field); }                        \
  }
#define LGP_BOOL(sec, key, unit, desc, field)                                             \
  Key {                                                                                   \
    {sec, key, unit, desc},                                                               \
        [](RunConfig& c, const std::string& s) { c.field = parse_bool(s, key); },         \
        [](const RunConfig& c) { return std::string(c.field ? "true" : "false"); }        \
  }
#define LGP_VEC(sec, key, unit, desc, field)                                              \
  Key {                                                                                   \
    {sec, key, unit, desc},                                                               \
        [](RunConfig& c, const std::string& s) { c.field = from_std(parse_list(s, key)); }, \
        [](const RunConfig& c) { return join(to_std(c.field)); }                          \
  }
#define LGP_LIST(sec, key, unit, desc, field)                                             \
  Key {                                                                                   \
    {sec, key, unit, desc},                                                               \
        [](RunConfig& c, const std::string& s) { c.field = parse_list(s, key); },         \
        [](const RunConfig& c) { return join(c.field); }                                  \
  }

const std::vector<Key>& key_table() {
  static const std::vector<Key> keys = {
      Key{{"run", "seed", "-", "base seed of every random stream"},
          [](RunConfig& c, const std::string& s) { c.seed = parse_unsigned(s, "seed"); },
          [](const RunConfig& c) { return std::to_string(c.seed); }},
      Key{{"run", "output_dir", "path", "directory for outputs without an explicit path"},
          [](RunConfig& c, const std::string& s) {
            std::istringstream is(s);
            std::string v;
            is >> v;
            if (v.empty()) throw ConfigError("key 'output_dir' is empty");
            c.output_dir = v;
          },
          [](const RunConfig& c) { return c.output_dir; }},
      LGP_NUM("plant", "m1", "kg", "mass of link 1", plant.m1),
      LGP_NUM("plant", "m2", "kg", "mass of link 2", plant.m2),
      LGP_NUM("plant", "l1", "m", "length of link 1", plant.l1),
      LGP_NUM("plant", "l2", "m", "length of link 2", plant.l2),
      LGP_NUM("plant", "g", "m/s^2", "gravity along +x", plant.g),
      LGP_NUM("plant", "delta1", "-", "relative prior error of link 1", plant.delta1),
      LGP_NUM("plant", "delta2", "-", "relative prior error of link 2", plant.delta2),
      Key{{"plant", "prior", "-", "erroneous | exact | zero"},
          [](RunConfig& c, const std::string& s) {
            std::istringstream is(s);
            std::string v;
            is >> v;
            if (v == "erroneous") c.prior = PriorChoice::erroneous;
            else if (v == "exact") c.prior = PriorChoice::exact;
            else if (v == "zero") c.prior = PriorChoice::zero;
            else throw ConfigError("key 'prior' expects erroneous, exact or zero");
          },
          [](const RunConfig& c) {
            return std::string(c.prior == PriorChoice::erroneous ? "erroneous"
                               : c.prior == PriorChoice::exact   ? "exact"
                                                                 : "zero");
          }},
      LGP_NUM("data", "grid_lower", "rad", "lower grid bound per joint", data.grid_lower),
      LGP_NUM("data", "grid_upper", "rad", "upper grid bound per joint", data.grid_upper),
      LGP_INT("data", "grid_count", "-", "grid points per joint", data.grid_count),
      LGP_VEC("data", "qdot", "rad/s", "velocity at every training point", data.qdot),
      LGP_VEC("data", "qddot", "rad/s^2", "acceleration at every training point", data.qddot),
      LGP_NUM("noise", "sigma_eps", "N m", "torque noise standard deviation", data.sigma_eps),
      LGP_NUM("noise", "sigma_alpha", "rad/s^2", "acceleration noise standard deviation",
              data.sigma_alpha),
      LGP_NUM("noise", "sigma_omega", "rad/s", "velocity noise standard deviation",
              data.sigma_omega),
      LGP_NUM("hyper", "sigma_G2", "J^2", "gravitational hypervariance (initial value)",
              kernel.sigma_G2),
      Key{{"hyper", "sigma_f_T", "-", "kinetic hypervariance, upper triangle row major"},
          [](RunConfig& c, const std::string& s) {
            c.kernel.sigma_f_T = from_upper(parse_list(s, "sigma_f_T"), 2, "sigma_f_T");
          },
          [](const RunConfig& c) { return join(upper(c.kernel.sigma_f_T)); }},
      Key{{"hyper", "sigma_f_U", "-", "elastic hypervariance, upper triangle row major"},
          [](RunConfig& c, const std::string& s) {
            c.kernel.sigma_f_U = from_upper(parse_list(s, "sigma_f_U"), 2, "sigma_f_U");
          },
          [](const RunConfig& c) { return join(upper(c.kernel.sigma_f_U)); }},
      LGP_NUM("hyper", "sigma_d_T", "rad", "kinetic length scale", kernel.sigma_d_T),
      LGP_NUM("hyper", "sigma_d_U", "rad", "elastic length scale", kernel.sigma_d_U),
      LGP_VEC("hyper", "sigma_d_G", "rad", "gravitational length scales", kernel.sigma_d_G),
      LGP_BOOL("hyper", "noise_compensation", "-", "propagate input noise into the torque noise",
               noise_compensation),
      LGP_BOOL("optimizer", "enabled", "-", "optimize sigma_G2 and sigma_f_T", optimize),
      LGP_INT("optimizer", "restarts", "-", "Halton restarts after the run from the initial values",
              optimizer.restarts),
      LGP_INT("optimizer", "max_iterations", "-", "simplex iterations per run",
              optimizer.max_iterations),
      LGP_NUM("optimizer", "tolerance", "-", "simplex diameter for convergence",
              optimizer.tolerance),
      LGP_NUM("optimizer", "initial_step", "-", "initial simplex edge in log space",
              optimizer.initial_step),
      LGP_NUM("experiment", "amplitude", "rad", "tracking reference amplitude",
              tracking.amplitude),
      LGP_NUM("experiment", "t_end", "s", "tracking horizon", tracking.t_end),
      LGP_NUM("experiment", "sample_dt", "s", "output sample spacing", tracking.sample_dt),
      LGP_NUM("experiment", "kp", "N m/rad", "proportional gain", tracking.kp),
      LGP_NUM("experiment", "kd", "N m s/rad", "derivative gain", tracking.kd),
      LGP_LIST("experiment", "energy_amplitudes", "rad", "initial displacements of free runs",
               energy.amplitudes),
      LGP_NUM("experiment", "energy_t_end", "s", "free-run horizon", energy.t_end),
      LGP_NUM("experiment", "rtol", "-", "integrator relative tolerance", tracking.integrator.rtol),
      LGP_NUM("experiment", "atol", "-", "integrator absolute tolerance", tracking.integrator.atol),
      LGP_NUM("experiment", "scan_lower", "rad", "eigenvalue scan lower bound", scan.lower),
      LGP_NUM("experiment", "scan_upper", "rad", "eigenvalue scan upper bound", scan.upper),
      LGP_INT("experiment", "scan_count", "-", "eigenvalue scan points per joint", scan.count),
      LGP_INT("pd_probability", "samples", "-", "Monte Carlo redraws", pd_samples),
      LGP_INT("pd_probability", "k", "-", "1 inertia, 0 stiffness", pd_k),
      LGP_LIST("pd_probability", "q", "rad", "query configuration", pd_q),
  };
  return keys;
}

#undef LGP_NUM
#undef LGP_INT
#undef LGP_BOOL
#undef LGP_VEC
#undef LGP_LIST

// Derived fields that mirror others.
void sync(RunConfig& c) {
  c.data.plant = c.plant;
  c.data.seed = c.seed;
  c.tracking.plant = c.plant;
  c.energy.plant = c.plant;
  c.energy.sample_dt = c.tracking.sample_dt;
  c.energy.integrator = c.tracking.integrator;
  c.optimizer.seed = c.seed;
  c.optimizer.noise_compensation = c.noise_compensation;
}

}  // namespace

PriorModel RunConfig::make_prior_model() const {
  switch (prior) {
    case PriorChoice::erroneous:
      return make_two_link_prior(plant.erroneous());
    case PriorChoice::exact: {
      PlantParams p = plant;
      p.delta1 = 0.0;
      p.delta2 = 0.0;
      return make_two_link_prior(p);
    }
    case PriorChoice::zero:
      break;
  }
  return PriorModel::zero(2);
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const Key& k : key_table()) {
    out += k.doc.section + "." + k.doc.name + "=" + k.get(*this) + "\n";
  }
  return out;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical()); }

void RunConfig::validate() const {
  plant.validate();
  data.validate();
  (void)make_kernel(kernel);
  if (kernel.sigma_d_G.size() != 2) throw ConfigError("sigma_d_G expects 2 entries");
  if (!(kernel.sigma_G2 > 0.0)) throw ConfigError("sigma_G2 must be positive");
  if (optimizer.restarts < 0 || optimizer.max_iterations < 0) {
    throw ConfigError("optimizer counts must be non-negative");
  }
  if (!(optimizer.tolerance > 0.0) || !(optimizer.initial_step > 0.0)) {
    throw ConfigError("optimizer tolerance and initial_step must be positive");
  }
  if (!(tracking.t_end > 0.0) || !(energy.t_end > 0.0) || !(tracking.sample_dt > 0.0)) {
    throw ConfigError("experiment horizons and sample_dt must be positive");
  }
  if (!(tracking.integrator.rtol > 0.0) || !(tracking.integrator.atol > 0.0)) {
    throw ConfigError("integrator tolerances must be positive");
  }
  if (scan.count < 1 || !(scan.upper >= scan.lower)) throw ConfigError("invalid scan grid");
  if (pd_samples < 1) throw ConfigError("pd_probability samples must be at least 1");
  if (pd_k != 0 && pd_k != 1) throw ConfigError("pd_probability k must be 0 or 1");
  if (pd_q.size() != 2) throw ConfigError("pd_probability q expects 2 entries");
}

std::vector<KeyDoc> config_keys() {
  std::vector<KeyDoc> out;
  for (const Key& k : key_table()) out.push_back(k.doc);
  return out;
}

RunConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("key '" + section + "' is outside of any section");
    for (const auto& [name, value] : body) {
      if (!value.empty()) throw ConfigError("nested key '" + name + "' is not supported");
      const Key* match = nullptr;
      for (const Key& k : key_table()) {
        if (k.doc.section == section && k.doc.name == name) match = &k;
      }
      if (!match) throw ConfigError("unknown config key [" + section + "] " + name);
      match->set(cfg, value.data());
    }
  }
  sync(cfg);
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

}  // namespace lgp::cli
