#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gmmimm {

inline constexpr double kDefaultTail = 0.025;

enum class DatasetTag { Seen, Unseen };

DatasetTag parse_dataset_tag(std::string_view text);
std::string_view to_string(DatasetTag tag);

/// nu = y^2 / S. Throws NumericalError when S <= 0.
double nis_step(double innovation, double innovation_var);

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

double chi2_cdf(double x, int dof);

/// Quantiles at `tail` and 1 - tail, found by bisection on chi2_cdf.
std::pair<double, double> chi2_bounds(int dof, double tail = kDefaultTail);

struct NisSeries {
  std::vector<double> values;
  int dof = 1;
};

struct NisReport {
  double mean_nis = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  std::size_t count_over = 0;  // nu > upper: overconfident
  std::size_t count_under = 0; // nu < lower: underconfident
  double fraction_over = 0.0;
  double fraction_under = 0.0;
  std::size_t steps = 0;
  DatasetTag dataset_tag = DatasetTag::Seen;
};

NisReport nis_report(const NisSeries &series, double tail = kDefaultTail,
                     DatasetTag tag = DatasetTag::Seen);

/// A per-run report attributed to one estimator configuration.
struct LabeledReport {
  std::string label;                    // e.g. "global", "gmm3"
  std::optional<std::size_t> components; // nullopt for the single-model baseline
  std::string run_id;
  NisReport report;
};

struct SummaryRow {
  std::string label;
  std::optional<std::size_t> components;
  DatasetTag dataset_tag = DatasetTag::Seen;
  std::size_t runs = 0;
  std::size_t steps = 0;
  double mean_nis = 0.0; // over all steps of all runs
  double avg_over_per_run = 0.0;
  double avg_under_per_run = 0.0;
  double avg_violations_per_run = 0.0;
};

/// Average violations per run for every (label, dataset tag). Rows follow first
/// appearance of each label; seen before unseen. Needs at least one baseline report;
/// a repeated (label, run) or a label used with two component counts is an error.
std::vector<SummaryRow> compare_runs(std::span<const LabeledReport> reports);

std::string summary_to_csv(std::span<const SummaryRow> rows);

/// `{label, M, dataset_tag, mean_nis, lower, upper, count_over, count_under,
///   fraction_over, fraction_under, steps}`
std::string nis_report_to_json(const NisReport &report, std::string_view label,
                               std::optional<std::size_t> components);

} // namespace gmmimm
