#include "gmmimm/consistency.hpp"

#include "gmmimm/errors.hpp"
#include "gmmimm/io.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <tuple>

namespace gmmimm {

namespace {

constexpr int kMaxGammaIterations = 1000;
constexpr double kGammaEps = 1e-16;

// Series expansion, converges quickly for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxGammaIterations; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaEps)
      break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) (modified Lentz), for x >= a + 1.
double gamma_q_continued_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kGammaEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxGammaIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny)
      d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny)
      c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaEps)
      break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace

DatasetTag parse_dataset_tag(std::string_view text) {
  if (text == "seen")
    return DatasetTag::Seen;
  if (text == "unseen")
    return DatasetTag::Unseen;
  throw ParameterError("unknown dataset tag '" + std::string(text) + "'");
}

std::string_view to_string(DatasetTag tag) { return tag == DatasetTag::Unseen ? "unseen" : "seen"; }

double nis_step(double innovation, double innovation_var) {
  if (!(innovation_var > 0.0))
    throw NumericalError("nis_step: innovation variance must be positive");
  return innovation * innovation / innovation_var;
}

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0))
    throw ParameterError("regularized_gamma_p: a must be positive");
  if (x < 0.0 || std::isnan(x))
    throw ParameterError("regularized_gamma_p: x must be nonnegative");
  if (x == 0.0)
    return 0.0;
  if (std::isinf(x))
    return 1.0;
  if (x < a + 1.0)
    return gamma_p_series(a, x);
  return 1.0 - gamma_q_continued_fraction(a, x);
}

double chi2_cdf(double x, int dof) {
  if (dof < 1)
    throw ParameterError("chi-squared dof must be >= 1");
  if (x <= 0.0)
    return 0.0;
  return regularized_gamma_p(0.5 * dof, 0.5 * x);
}

namespace {

double chi2_quantile(double p, int dof) {
  double lo = 0.0;
  double hi = static_cast<double>(dof);
  while (chi2_cdf(hi, dof) < p)
    hi *= 2.0;
  for (int i = 0; i < 2000; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
      break;
    if (chi2_cdf(mid, dof) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace

std::pair<double, double> chi2_bounds(int dof, double tail) {
  if (dof < 1)
    throw ParameterError("chi-squared dof must be >= 1");
  if (!(tail > 0.0 && tail < 0.5))
    throw ParameterError("tail probability must be in (0, 0.5)");
  return {chi2_quantile(tail, dof), chi2_quantile(1.0 - tail, dof)};
}

NisReport nis_report(const NisSeries &series, double tail, DatasetTag tag) {
  if (series.values.empty())
    throw ParameterError("nis_report: empty series");
  NisReport r;
  std::tie(r.lower_bound, r.upper_bound) = chi2_bounds(series.dof, tail);
  r.dataset_tag = tag;
  r.steps = series.values.size();
  double sum = 0.0;
  for (double nu : series.values) {
    if (!(nu >= 0.0))
      throw NumericalError("nis_report: negative or NaN NIS value");
    sum += nu;
    if (nu > r.upper_bound)
      ++r.count_over;
    else if (nu < r.lower_bound)
      ++r.count_under;
  }
  const double n = static_cast<double>(r.steps);
  r.mean_nis = sum / n;
  r.fraction_over = static_cast<double>(r.count_over) / n;
  r.fraction_under = static_cast<double>(r.count_under) / n;
  return r;
}

std::vector<SummaryRow> compare_runs(std::span<const LabeledReport> reports) {
  if (reports.empty())
    throw ParameterError("compare_runs: no reports");
  bool have_baseline = false;
  std::map<std::pair<std::string, std::string>, bool> seen_runs;
  std::map<std::string, std::optional<std::size_t>> label_components;
  std::vector<std::string> label_order;
  for (const auto &r : reports) {
    have_baseline = have_baseline || !r.components.has_value();
    if (!seen_runs.emplace(std::pair{r.label, r.run_id}, true).second)
      throw ParameterError("compare_runs: duplicate report for label '" + r.label + "' run '" +
                           r.run_id + "'");
    auto [it, inserted] = label_components.emplace(r.label, r.components);
    if (inserted)
      label_order.push_back(r.label);
    else if (it->second != r.components)
      throw ParameterError("compare_runs: label '" + r.label +
                           "' used with different component counts");
  }
  if (!have_baseline)
    throw ParameterError("compare_runs: a baseline report is required");

  std::vector<SummaryRow> rows;
  for (const auto &label : label_order) {
    for (DatasetTag tag : {DatasetTag::Seen, DatasetTag::Unseen}) {
      SummaryRow row;
      row.label = label;
      row.components = label_components[label];
      row.dataset_tag = tag;
      double nis_sum = 0.0;
      std::size_t over = 0, under = 0;
      for (const auto &r : reports) {
        if (r.label != label || r.report.dataset_tag != tag)
          continue;
        ++row.runs;
        row.steps += r.report.steps;
        nis_sum += r.report.mean_nis * static_cast<double>(r.report.steps);
        over += r.report.count_over;
        under += r.report.count_under;
      }
      if (row.runs == 0)
        continue;
      const double runs = static_cast<double>(row.runs);
      row.mean_nis = nis_sum / static_cast<double>(row.steps);
      row.avg_over_per_run = static_cast<double>(over) / runs;
      row.avg_under_per_run = static_cast<double>(under) / runs;
      row.avg_violations_per_run = static_cast<double>(over + under) / runs;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string summary_to_csv(std::span<const SummaryRow> rows) {
  std::string out = "label,M,dataset_tag,runs,steps,mean_nis,avg_over_per_run,"
                    "avg_under_per_run,avg_violations_per_run\n";
  for (const auto &r : rows) {
    out += r.label + ',' + (r.components ? std::to_string(*r.components) : std::string()) + ',' +
           std::string(to_string(r.dataset_tag)) + ',' + std::to_string(r.runs) + ',' +
           std::to_string(r.steps) + ',' + io::format_double(r.mean_nis) + ',' +
           io::format_double(r.avg_over_per_run) + ',' + io::format_double(r.avg_under_per_run) +
           ',' + io::format_double(r.avg_violations_per_run) + '\n';
  }
  return out;
}

std::string nis_report_to_json(const NisReport &report, std::string_view label,
                               std::optional<std::size_t> components) {
  nlohmann::ordered_json j;
  j["label"] = label;
  if (components)
    j["M"] = *components;
  else
    j["M"] = nullptr;
  j["dataset_tag"] = to_string(report.dataset_tag);
  j["mean_nis"] = report.mean_nis;
  j["lower"] = report.lower_bound;
  j["upper"] = report.upper_bound;
  j["count_over"] = report.count_over;
  j["count_under"] = report.count_under;
  j["fraction_over"] = report.fraction_over;
  j["fraction_under"] = report.fraction_under;
  j["steps"] = report.steps;
  return j.dump(2) + "\n";
}

} // namespace gmmimm
