#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "lgp/errors.hpp"
#include "lgp/serialization.hpp"
#include "support/benchmark_model.hpp"

namespace lgp {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lgp_serialization_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<std::string> names_of(const HyperParameterVector& h) {
  std::vector<std::string> n;
  for (const auto& e : h.entries()) n.push_back(e.name);
  return n;
}

TEST(Serialization, FormatDoubleRoundTrips) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(gen) * std::pow(10.0, (i % 40) - 20);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(0.0), "0");
  EXPECT_EQ(std::stod(format_double(std::numeric_limits<double>::max())),
            std::numeric_limits<double>::max());
}

TEST(Serialization, ProvenanceLine) {
  Provenance p{0x0123456789abcdefULL, 42, "0.1.0"};
  const std::string line = p.comment_line();
  EXPECT_EQ(line, "# lgp version=0.1.0 config_hash=0123456789abcdef seed=42");
  const auto back = Provenance::parse(line);
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(back->config_hash, p.config_hash);
  EXPECT_EQ(back->seed, 42u);
  EXPECT_EQ(back->version, "0.1.0");
  EXPECT_FALSE(Provenance::parse("q1,q2").has_value());
  EXPECT_FALSE(Provenance::parse("# something else").has_value());
}

TEST(Serialization, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Serialization, CsvRoundTrip) {
  CsvTable t;
  t.provenance = Provenance{7, 1, library_version()};
  t.header = {"a", "b"};
  t.rows = {{"1", "2.5"}, {"-3", "1e-300"}};
  const std::string text = t.to_string();
  const CsvTable back = CsvTable::parse(text);
  ASSERT_TRUE(back.provenance.has_value());
  EXPECT_EQ(back.provenance->config_hash, 7u);
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.column("b"), 1u);
  EXPECT_THROW((void)back.column("c"), ConfigError);
  EXPECT_EQ(back.to_string(), text);
}

TEST(Serialization, CsvRejectsRaggedRows) {
  EXPECT_THROW((void)CsvTable::parse("a,b\n1,2\n3\n"), ConfigError);
}

TEST(Serialization, DatasetRoundTrip) {
  const auto& b = test::benchmark();
  const Provenance p{1, 0, library_version()};
  const CsvTable t = dataset_to_csv(b.data, p);
  ASSERT_EQ(t.rows.size(), 25u);
  EXPECT_EQ(t.header.front(), "q1");
  const TrainingDataset back = dataset_from_csv(CsvTable::parse(t.to_string()));
  EXPECT_EQ(back.Q, b.data.Q);
  EXPECT_EQ(back.Xdot, b.data.Xdot);
  EXPECT_EQ(back.Y, b.data.Y);
  ASSERT_EQ(back.sigma_eps.size(), b.data.sigma_eps.size());
  for (std::size_t i = 0; i < back.sigma_eps.size(); ++i) {
    EXPECT_NEAR((back.sigma_eps[i] - b.data.sigma_eps[i]).norm(), 0.0, 1e-15);
    EXPECT_NEAR((back.sigma_alpha[i] - b.data.sigma_alpha[i]).norm(), 0.0, 1e-15);
    EXPECT_NEAR((back.sigma_omega[i] - b.data.sigma_omega[i]).norm(), 0.0, 1e-15);
  }
}

TEST(Serialization, DatasetFileRoundTrip) {
  const fs::path dir = scratch_dir("dataset");
  const auto& b = test::benchmark();
  save_dataset(dir / "d.csv", b.data, Provenance{1, 0, library_version()});
  const TrainingDataset back = load_dataset(dir / "d.csv");
  EXPECT_EQ(back.Y, b.data.Y);
  fs::remove_all(dir);
}

TEST(Serialization, DatasetMissingColumn) {
  EXPECT_THROW((void)dataset_from_csv(CsvTable::parse("q1,q2\n0,0\n")), ConfigError);
}

TEST(Serialization, ModelJsonReproducesPredictions) {
  const auto& b = test::benchmark();
  TrainingRecord rec{b.optimization, names_of(b.optimization.best)};
  const std::string text = model_to_json(b.model, rec, Provenance{5, 0, library_version()});
  const TrainedModel back = model_from_json(text);
  std::mt19937_64 gen(11);
  for (int i = 0; i < 50; ++i) {
    const DifferentialInput x = test::random_input(gen, 2);
    const Vector a = b.model.predict_torque(x.q, x.qdot, x.qddot);
    const Vector c = back.predict_torque(x.q, x.qdot, x.qddot);
    EXPECT_LE((a - c).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()));
    EXPECT_NEAR(back.predict_energy(x.q, x.qdot), b.model.predict_energy(x.q, x.qdot), 1e-12);
    EXPECT_LE((back.predict_matrix(1, x.q) - b.model.predict_matrix(1, x.q)).cwiseAbs().maxCoeff(),
              1e-12);
  }
  EXPECT_EQ(model_to_json(back, rec, Provenance{5, 0, library_version()}), text);
}

TEST(Serialization, ModelJsonRejectsGarbage) {
  EXPECT_THROW((void)model_from_json("{not json"), ConfigError);
  EXPECT_THROW((void)model_from_json("{}"), ConfigError);
  EXPECT_THROW((void)model_from_json("[1, 2]"), ConfigError);
}

TEST(Serialization, AtomicWriteReplaces) {
  const fs::path dir = scratch_dir("atomic");
  const fs::path f = dir / "x.txt";
  write_file_atomic(f, "first");
  write_file_atomic(f, "second");
  EXPECT_EQ(read_file(f), "second");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  EXPECT_EQ(entries, 1u);
  EXPECT_THROW((void)read_file(dir / "missing.txt"), ConfigError);
  fs::remove_all(dir);
}

TEST(Serialization, TraceCsvLayout) {
  const auto& b = test::benchmark();
  const auto names = names_of(b.optimization.best);
  const CsvTable t = trace_to_csv(b.optimization, names, Provenance{1, 0, library_version()});
  ASSERT_GE(t.header.size(), 4u + names.size());
  EXPECT_EQ(t.header[0], "restart");
  EXPECT_EQ(t.header[1], "iteration");
  EXPECT_EQ(t.header[2], "value");
  EXPECT_EQ(t.header[3], "best_value");
  EXPECT_EQ(t.rows.size(), b.optimization.trace.size());
  for (const auto& r : t.rows) EXPECT_EQ(r.size(), t.header.size());
}

}  // namespace
}  // namespace lgp
