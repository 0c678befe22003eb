#pragma once

#include "gmmimm/gmm.hpp"
#include "gmmimm/imm.hpp"
#include "gmmimm/synth.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gmmimm {

/// Every tunable of the pipeline. Serialized as flat `key = value` lines.
struct PipelineConfig {
  std::filesystem::path data_dir = "data";
  std::filesystem::path output_dir = "out";

  std::size_t window = kDefaultWindow;
  std::size_t stride = 1;

  std::vector<std::size_t> components{1, 3, 6, 9, 12, 15, 18};
  std::uint64_t seed = 0;
  std::size_t max_iter = 500;
  double tol = 1e-6;
  InitMode init_mode = InitMode::KMeansPlusPlus;

  double q = kDefaultProcessNoise;
  double r = kDefaultMeasurementNoise;
  InitialStateMode x0_mode = InitialStateMode::FirstMeasurement;
  double p0 = kDefaultInitialVariance;

  double tr_diag = 0.95;
  std::vector<double> tr_matrix; // optional, row-major; only valid for a single M
  WeightPrior weight_prior = WeightPrior::Predicted;

  double tail = 0.025;

  /// Runs used for fitting. Empty means every run not listed in `unseen`.
  std::vector<std::string> seen;
  std::vector<std::string> unseen;

  std::size_t workers = 1;

  SynthConfig synth;

  void validate() const;
  ImmRunConfig imm_config() const;
};

/// Applies one `key = value` setting. Throws ParameterError on unknown keys or bad values.
void set_config_value(PipelineConfig &config, std::string_view key, std::string_view value);

/// Parses config text; `#` starts a comment. Later keys override earlier ones.
PipelineConfig parse_config(std::string_view text, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path &file);

/// Canonical text form listing every key (round-trips through parse_config).
std::string config_to_text(const PipelineConfig &config);

/// Documented keys, in canonical order.
const std::vector<std::string_view> &config_keys();

} // namespace gmmimm
