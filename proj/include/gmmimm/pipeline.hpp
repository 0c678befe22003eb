#pragma once

#include "gmmimm/config.hpp"
#include "gmmimm/consistency.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace gmmimm {

struct StageResult {
  std::vector<std::filesystem::path> files; // written, in deterministic order
  std::vector<std::string> notes;           // human-readable diagnostics
};

struct ReportResult : StageResult {
  std::vector<SummaryRow> summary;
};

/// Run ids split into fitting (seen) and held-out (unseen) sets.
struct RunSplit {
  std::vector<std::string> seen;
  std::vector<std::string> unseen;
  DatasetTag tag_of(const std::string &run_id) const;
};

/// Resolves the configured split against the available runs. Throws ParameterError
/// when a configured run id does not exist.
RunSplit resolve_split(const PipelineConfig &config, const std::vector<std::string> &run_ids);

/// Writes `<data_dir>/<run>.csv`, `<data_dir>/labels/<run>.csv` and `<data_dir>/manifest.txt`.
StageResult cmd_synth(const PipelineConfig &config);

/// Fits seen runs: `<out>/models.csv` and `<out>/global_model.json`.
StageResult cmd_fit(const PipelineConfig &config);

/// `<out>/gmm_<M>.json` for each configured M.
StageResult cmd_cluster(const PipelineConfig &config);

/// `<out>/estimates/<run>/estimate_global.csv` and `estimate_<M>.csv` for every run.
StageResult cmd_estimate(const PipelineConfig &config);

/// `<out>/nis_summary.csv`, `<out>/nis_report_<label>_<tag>.json`, `<out>/plots/*.svg`.
ReportResult cmd_report(const PipelineConfig &config);

std::string baseline_label();
std::string gmm_label(std::size_t components);

} // namespace gmmimm
