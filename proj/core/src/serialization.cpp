#include "lgp/serialization.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "lgp/dynamics.hpp"
#include "lgp/errors.hpp"

#ifndef LGP_VERSION_STRING
#define LGP_VERSION_STRING "0.0.0"
#endif

namespace lgp {

using nlohmann::json;

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string library_version() { return LGP_VERSION_STRING; }

std::string Provenance::comment_line() const {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash));
  std::ostringstream os;
  os << "# lgp version=" << version << " config_hash=" << hash << " seed=" << seed;
  return os.str();
}

std::optional<Provenance> Provenance::parse(const std::string& line) {
  std::istringstream is(line);
  std::string hashmark, tag, v, h, s;
  if (!(is >> hashmark >> tag >> v >> h >> s) || hashmark != "#" || tag != "lgp") return std::nullopt;
  auto value_of = [](const std::string& kv, const std::string& key) -> std::optional<std::string> {
    if (kv.rfind(key + "=", 0) != 0) return std::nullopt;
    return kv.substr(key.size() + 1);
  };
  const auto ver = value_of(v, "version");
  const auto hash = value_of(h, "config_hash");
  const auto seed = value_of(s, "seed");
  if (!ver || !hash || !seed) return std::nullopt;
  Provenance p;
  p.version = *ver;
  try {
    p.config_hash = std::stoull(*hash, nullptr, 16);
    p.seed = std::stoull(*seed);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  return p;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) throw ConfigError("not a number: '" + s + "'");
  return v;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

// Non-finite values become null.
json number_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

Matrix matrix_from(const json& j, Index cols_if_empty = 0) {
  if (!j.is_array()) throw ConfigError("expected a matrix (array of rows)");
  const auto rows = static_cast<Index>(j.size());
  const Index cols = rows ? static_cast<Index>(j[0].size()) : cols_if_empty;
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw ConfigError("ragged matrix in model file");
    }
    for (Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Vector vector_from(const json& j) {
  if (!j.is_array()) throw ConfigError("expected a vector");
  Vector v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

json cholesky_json(const CholeskyKernelSpec& s) {
  return {{"hyper_variance", matrix_json(s.hyper_variance())}, {"metric", matrix_json(s.metric())}};
}

CholeskyKernelSpec cholesky_from(int k, const json& j) {
  return {k, matrix_from(j.at("hyper_variance")), matrix_from(j.at("metric"))};
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(static_cast<long>(::getpid()));
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open for writing: " + tmp.string());
    os << content;
    os.flush();
    if (!os) throw Error("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open file: " + path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::string CsvTable::to_string() const {
  std::ostringstream os;
  if (provenance) os << provenance->comment_line() << '\n';
  auto emit = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  return os.str();
}

CsvTable CsvTable::parse(const std::string& text) {
  CsvTable t;
  std::istringstream is(text);
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (!have_header && !t.provenance) t.provenance = Provenance::parse(line);
      continue;
    }
    auto cells = split(line, ',');
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
    } else {
      if (cells.size() != t.header.size()) {
        throw ConfigError("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                          std::to_string(t.header.size()));
      }
      t.rows.push_back(std::move(cells));
    }
  }
  if (!have_header) throw ConfigError("CSV has no header row");
  return t;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ConfigError("CSV is missing column '" + name + "'");
}

CsvTable dataset_to_csv(const TrainingDataset& data, const Provenance& provenance) {
  data.validate();
  const Index n = data.dim();
  CsvTable t;
  t.provenance = provenance;
  for (const char* p : {"q", "qd", "qdd", "tau", "sigma_eps", "sigma_alpha", "sigma_omega"}) {
    for (Index j = 1; j <= n; ++j) t.header.push_back(std::string(p) + std::to_string(j));
  }
  for (Index i = 0; i < data.size(); ++i) {
    const auto si = static_cast<std::size_t>(i);
    std::vector<std::string> row;
    auto push = [&row](double v) { row.push_back(format_double(v)); };
    for (Index j = 0; j < n; ++j) push(data.Q(i, j));
    for (Index j = 0; j < 2 * n; ++j) push(data.Xdot(i, j));
    for (Index j = 0; j < n; ++j) push(data.Y(i, j));
    for (const auto* cov : {&data.sigma_eps, &data.sigma_alpha, &data.sigma_omega}) {
      for (Index j = 0; j < n; ++j) push(std::sqrt((*cov)[si](j, j)));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

TrainingDataset dataset_from_csv(const CsvTable& t) {
  Index n = 0;
  while (true) {
    bool found = false;
    for (const auto& h : t.header) found = found || h == "q" + std::to_string(n + 1);
    if (!found) break;
    ++n;
  }
  if (n == 0) throw ConfigError("dataset CSV has no q1 column");
  const auto d = static_cast<Index>(t.rows.size());
  TrainingDataset data;
  data.Q.resize(d, n);
  data.Xdot.resize(d, 2 * n);
  data.Y.resize(d, n);
  auto cols = [&](const std::string& p) {
    std::vector<std::size_t> c;
    for (Index j = 1; j <= n; ++j) c.push_back(t.column(p + std::to_string(j)));
    return c;
  };
  const auto cq = cols("q"), cqd = cols("qd"), cqdd = cols("qdd"), ctau = cols("tau");
  const auto ce = cols("sigma_eps"), ca = cols("sigma_alpha"), co = cols("sigma_omega");
  for (Index i = 0; i < d; ++i) {
    const auto& r = t.rows[static_cast<std::size_t>(i)];
    Vector se(n), sa(n), so(n);
    for (Index j = 0; j < n; ++j) {
      const auto sj = static_cast<std::size_t>(j);
      data.Q(i, j) = parse_double(r[cq[sj]]);
      data.Xdot(i, j) = parse_double(r[cqd[sj]]);
      data.Xdot(i, n + j) = parse_double(r[cqdd[sj]]);
      data.Y(i, j) = parse_double(r[ctau[sj]]);
      se(j) = parse_double(r[ce[sj]]);
      sa(j) = parse_double(r[ca[sj]]);
      so(j) = parse_double(r[co[sj]]);
    }
    data.sigma_eps.push_back(se.cwiseAbs2().asDiagonal());
    data.sigma_alpha.push_back(sa.cwiseAbs2().asDiagonal());
    data.sigma_omega.push_back(so.cwiseAbs2().asDiagonal());
  }
  data.validate();
  return data;
}

void save_dataset(const std::filesystem::path& path, const TrainingDataset& data,
                  const Provenance& provenance) {
  write_file_atomic(path, dataset_to_csv(data, provenance).to_string());
}

TrainingDataset load_dataset(const std::filesystem::path& path) {
  return dataset_from_csv(CsvTable::parse(read_file(path)));
}

std::string model_to_json(const TrainedModel& model, const TrainingRecord& record,
                          const Provenance& provenance) {
  const auto& data = model.dataset();
  const auto& kernel = model.kernel();
  json j;
  j["format"] = "lgp-model";
  j["format_version"] = 1;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(provenance.config_hash));
  j["provenance"] = {{"version", provenance.version}, {"config_hash", hash},
                     {"seed", provenance.seed}};
  j["kernel"] = {{"gravity",
                  {{"sigma2", kernel.gravity.sigma2()},
                   {"metric", matrix_json(kernel.gravity.metric())}}},
                 {"kinetic", cholesky_json(kernel.kinetic)},
                 {"elastic", cholesky_json(kernel.elastic)}};
  j["prior"] = {{"id", model.prior().id()}, {"params", model.prior().params()}};
  auto cov_list = [](const std::vector<Matrix>& v) {
    json a = json::array();
    for (const auto& m : v) a.push_back(matrix_json(m));
    return a;
  };
  j["dataset"] = {{"Q", matrix_json(data.Q)},
                  {"Xdot", matrix_json(data.Xdot)},
                  {"Y", matrix_json(data.Y)},
                  {"sigma_omega", cov_list(data.sigma_omega)},
                  {"sigma_alpha", cov_list(data.sigma_alpha)},
                  {"sigma_eps", cov_list(data.sigma_eps)}};
  j["delta_y"] = vector_json(model.delta_y());
  j["delta_x"] = vector_json(model.delta_x());
  j["w"] = vector_json(model.equilibrium_weights());
  const auto& info = model.conditioning();
  j["conditioning"] = {{"jitter", info.jitter},
                       {"log_det", info.log_det},
                       {"quadratic", info.quadratic},
                       {"residual", info.residual},
                       {"refinement_steps", info.refinement_steps}};
  j["log_likelihood"] = number_json(model.log_likelihood());
  if (record.optimization) {
    const auto& r = *record.optimization;
    json trace = json::array();
    for (const auto& row : r.trace) {
      trace.push_back({{"restart", row.restart},
                       {"iteration", row.iteration},
                       {"value", number_json(row.value)},
                       {"best_value", number_json(row.best_value)},
                       {"parameters", vector_json(row.parameters)}});
    }
    j["optimization"] = {{"parameter_names", record.parameter_names},
                         {"best_parameters", vector_json(r.best.values())},
                         {"best_value", number_json(r.best_value)},
                         {"init_value", number_json(r.init_value)},
                         {"best_restart", r.best_restart},
                         {"failed_restarts", r.failed_restarts},
                         {"trace", std::move(trace)}};
  }
  return j.dump(1) + "\n";
}

TrainedModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.value("format", std::string()) != "lgp-model") {
      throw ConfigError("not an lgp model file");
    }
    const json& jk = j.at("kernel");
    const json& g = jk.at("gravity");
    LagrangianKernel kernel{cholesky_from(1, jk.at("kinetic")), cholesky_from(0, jk.at("elastic")),
                            MetricKernel(g.at("sigma2").get<double>(), matrix_from(g.at("metric")))};
    const Index n = kernel.dim();
    const json& jp = j.at("prior");
    PriorModel prior = make_prior(jp.at("id").get<std::string>(),
                                  jp.at("params").get<std::vector<double>>(), n);
    const json& jd = j.at("dataset");
    TrainingDataset data;
    data.Q = matrix_from(jd.at("Q"), n);
    data.Xdot = matrix_from(jd.at("Xdot"), 2 * n);
    data.Y = matrix_from(jd.at("Y"), n);
    for (const char* key : {"sigma_omega", "sigma_alpha", "sigma_eps"}) {
      std::vector<Matrix>& dst = std::string(key) == "sigma_omega"   ? data.sigma_omega
                                 : std::string(key) == "sigma_alpha" ? data.sigma_alpha
                                                                     : data.sigma_eps;
      for (const auto& m : jd.at(key)) dst.push_back(matrix_from(m, n));
    }
    data.validate();
    const json& ji = j.at("conditioning");
    ConditioningInfo info;
    info.jitter = ji.at("jitter").get<double>();
    info.log_det = ji.at("log_det").get<double>();
    info.quadratic = ji.at("quadratic").get<double>();
    info.residual = ji.at("residual").get<double>();
    info.refinement_steps = ji.at("refinement_steps").get<int>();
    Vector dy = vector_from(j.at("delta_y"));
    Vector dx = vector_from(j.at("delta_x"));
    Vector w = vector_from(j.at("w"));
    if (dy.size() != data.size() * n || dx.size() != dy.size() || w.size() != n + 1) {
      throw ConfigError("model weights do not match the dataset");
    }
    return {std::move(data), std::move(prior), std::move(kernel), std::move(dy), std::move(dx),
            std::move(w), info};
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model file schema mismatch: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const TrainedModel& model,
                const TrainingRecord& record, const Provenance& provenance) {
  write_file_atomic(path, model_to_json(model, record, provenance));
}

TrainedModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_file(path));
}

CsvTable trace_to_csv(const OptimizationResult& result,
                      const std::vector<std::string>& parameter_names,
                      const Provenance& provenance) {
  CsvTable t;
  t.provenance = provenance;
  t.header = {"restart", "iteration", "value", "best_value"};
  for (const auto& n : parameter_names) t.header.push_back(n);
  for (const auto& row : result.trace) {
    std::vector<std::string> r = {std::to_string(row.restart), std::to_string(row.iteration),
                                  format_double(row.value), format_double(row.best_value)};
    for (Index i = 0; i < row.parameters.size(); ++i) r.push_back(format_double(row.parameters(i)));
    while (r.size() < t.header.size()) r.emplace_back("");
    t.rows.push_back(std::move(r));
  }
  return t;
}

}  // namespace lgp
