#pragma once

// Run configuration of the lgp tool: an INI file with the sections [run],
// [plant], [data], [noise], [hyper], [optimizer], [experiment] and
// [pd_probability]. Unknown sections or keys are rejected; missing keys keep
// their defaults. Lists are whitespace separated.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lgp/consistency.hpp"
#include "lgp/experiments.hpp"
#include "lgp/hyperopt.hpp"

namespace lgp::cli {

enum class PriorChoice { erroneous, exact, zero };

struct RunConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  PlantParams plant;
  PriorChoice prior = PriorChoice::erroneous;
  DataConfig data;  // plant and seed are kept in sync with the fields above
  KernelConfig kernel;
  bool noise_compensation = true;
  bool optimize = true;
  OptimizerConfig optimizer;

  TrackingConfig tracking;
  EnergyConfig energy;
  ScanConfig scan;

  int pd_samples = 200;
  int pd_k = 1;
  std::vector<double> pd_q = {0.0, 0.0};

  /// Prior built from the plant according to `prior`.
  [[nodiscard]] PriorModel make_prior_model() const;
  /// Every key as section.name=value, one per line, in a fixed order.
  [[nodiscard]] std::string canonical() const;
  [[nodiscard]] std::uint64_t hash() const;
  void validate() const;
};

struct KeyDoc {
  std::string section;
  std::string name;
  std::string unit;
  std::string description;
};

/// Documentation of every recognised key.
[[nodiscard]] std::vector<KeyDoc> config_keys();

[[nodiscard]] RunConfig parse_config(const std::string& text);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

}  // namespace lgp::cli
