#pragma once

// File formats: dataset CSV, model JSON, report CSVs. Every CSV starts with a
// provenance comment line followed by a header row. Writes are atomic.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lgp/hyperopt.hpp"
#include "lgp/model.hpp"

namespace lgp {

[[nodiscard]] std::uint64_t fnv1a64(const std::string& text);

struct Provenance {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string version;

  /// "# lgp version=<v> config_hash=<16 hex digits> seed=<n>"
  [[nodiscard]] std::string comment_line() const;
  /// Parses comment_line(); nullopt for anything else.
  static std::optional<Provenance> parse(const std::string& line);
};

[[nodiscard]] std::string library_version();

/// Shortest decimal that reads back to the same double.
[[nodiscard]] std::string format_double(double v);

/// Writes to a temporary sibling file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
[[nodiscard]] std::string read_file(const std::filesystem::path& path);

struct CsvTable {
  std::optional<Provenance> provenance;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::string to_string() const;
  static CsvTable parse(const std::string& text);
  /// Column index by name; throws ConfigError when absent.
  [[nodiscard]] std::size_t column(const std::string& name) const;
};

/// Columns q1..qN, qd1..qdN, qdd1..qddN, tau1..tauN, then per-component
/// standard deviations sigma_eps*, sigma_alpha*, sigma_omega*. Only the
/// diagonals of the noise covariances are stored.
[[nodiscard]] CsvTable dataset_to_csv(const TrainingDataset& data, const Provenance& provenance);
[[nodiscard]] TrainingDataset dataset_from_csv(const CsvTable& table);

void save_dataset(const std::filesystem::path& path, const TrainingDataset& data,
                  const Provenance& provenance);
[[nodiscard]] TrainingDataset load_dataset(const std::filesystem::path& path);

/// Optimizer outcome stored next to the model.
struct TrainingRecord {
  std::optional<OptimizationResult> optimization;
  std::vector<std::string> parameter_names;
};

[[nodiscard]] std::string model_to_json(const TrainedModel& model, const TrainingRecord& record,
                                        const Provenance& provenance);
/// Restores the model bit for bit from the stored weights (no refit).
[[nodiscard]] TrainedModel model_from_json(const std::string& text);

void save_model(const std::filesystem::path& path, const TrainedModel& model,
                const TrainingRecord& record, const Provenance& provenance);
[[nodiscard]] TrainedModel load_model(const std::filesystem::path& path);

/// restart, iteration, value, best_value, then one column per parameter.
[[nodiscard]] CsvTable trace_to_csv(const OptimizationResult& result,
                                    const std::vector<std::string>& parameter_names,
                                    const Provenance& provenance);

}  // namespace lgp
