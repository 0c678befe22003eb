#include "gmmimm/pipeline.hpp"

#include "gmmimm/errors.hpp"
#include "gmmimm/gmm.hpp"
#include "gmmimm/imm.hpp"
#include "gmmimm/io.hpp"
#include "gmmimm/svg.hpp"
#include "gmmimm/synth.hpp"
#include "gmmimm/sysid.hpp"
#include "gmmimm/trajectory.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <thread>

namespace gmmimm {

namespace fs = std::filesystem;

namespace {

// Runs job(i) for i in [0, count) on up to `workers` threads. The first failing job
// (by index) has its exception rethrown.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)> &job) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  std::vector<std::exception_ptr> errors(count);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            job(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
  }
  for (auto &e : errors)
    if (e)
      std::rethrow_exception(e);
}

fs::path gmm_path(const PipelineConfig &c, std::size_t m) {
  return c.output_dir / ("gmm_" + std::to_string(m) + ".json");
}

fs::path estimate_path(const PipelineConfig &c, const std::string &run, const std::string &name) {
  return c.output_dir / "estimates" / run / ("estimate_" + name + ".csv");
}

std::vector<std::string> run_ids(const std::vector<Trajectory> &runs) {
  std::vector<std::string> ids;
  for (const auto &t : runs)
    ids.push_back(t.run_id);
  return ids;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string &name, const fs::path &file) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw DataError(file.string() + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
};

Table read_table(const fs::path &file) {
  const std::string text = io::read_file(file);
  Table t;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    std::string_view line(text.data() + pos, (eol == std::string::npos ? text.size() : eol) - pos);
    pos = eol == std::string::npos ? text.size() : eol + 1;
    ++line_no;
    if (line.empty())
      continue;
    const auto fields = io::split_csv_line(line);
    if (t.header.empty()) {
      for (auto f : fields)
        t.header.emplace_back(f);
      continue;
    }
    std::vector<double> row;
    for (auto f : fields) {
      auto v = io::parse_double(f);
      if (!v)
        throw DataError(file.string() + ":" + std::to_string(line_no) + ": non-numeric value");
      row.push_back(*v);
    }
    if (row.size() != t.header.size())
      throw DataError(file.string() + ":" + std::to_string(line_no) + ": wrong field count");
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty())
    throw DataError(file.string() + ": empty table");
  return t;
}

std::string estimate_header(std::size_t models) {
  std::string h = "k,z,x_hat,p_hat";
  for (std::size_t i = 1; i <= models; ++i)
    h += ",w_" + std::to_string(i);
  return h + ",nu\n";
}

std::string baseline_estimate_csv(const Trajectory &traj, const std::vector<KfStepOutput> &steps) {
  std::string out = "k,z,x_hat,p_hat,nu\n";
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const auto &s = steps[k];
    out += std::to_string(k) + ',' + io::format_double(traj.samples[k].x_next) + ',' +
           io::format_double(s.state.x) + ',' + io::format_double(s.state.p) + ',' +
           io::format_double(nis_step(s.innovation.y, s.innovation.s)) + '\n';
  }
  return out;
}

std::string imm_estimate_csv(const Trajectory &traj, const std::vector<ImmStepOutput> &steps,
                             std::size_t models) {
  std::string out = estimate_header(models);
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const auto &s = steps[k];
    out += std::to_string(k) + ',' + io::format_double(traj.samples[k].x_next) + ',' +
           io::format_double(s.combined.x) + ',' + io::format_double(s.combined.p);
    for (double w : s.weights)
      out += ',' + io::format_double(w);
    out += ',' + io::format_double(nis_step(s.mixture.y, s.mixture.s)) + '\n';
  }
  return out;
}

std::vector<Trajectory> select(const std::vector<Trajectory> &runs,
                               const std::vector<std::string> &ids) {
  std::vector<Trajectory> out;
  for (const auto &t : runs)
    if (std::find(ids.begin(), ids.end(), t.run_id) != ids.end())
      out.push_back(t);
  return out;
}

} // namespace

std::string baseline_label() { return "global"; }
std::string gmm_label(std::size_t components) { return "gmm" + std::to_string(components); }

DatasetTag RunSplit::tag_of(const std::string &run_id) const {
  return std::find(unseen.begin(), unseen.end(), run_id) != unseen.end() ? DatasetTag::Unseen
                                                                         : DatasetTag::Seen;
}

RunSplit resolve_split(const PipelineConfig &config, const std::vector<std::string> &ids) {
  auto exists = [&](const std::string &id) {
    return std::find(ids.begin(), ids.end(), id) != ids.end();
  };
  for (const auto *list : {&config.seen, &config.unseen})
    for (const auto &id : *list)
      if (!exists(id))
        throw ParameterError("configured run '" + id + "' not found in data");
  RunSplit split;
  for (const auto &id : ids) {
    const bool unseen = std::find(config.unseen.begin(), config.unseen.end(), id) != config.unseen.end();
    const bool seen = config.seen.empty()
                          ? !unseen
                          : std::find(config.seen.begin(), config.seen.end(), id) != config.seen.end();
    if (unseen)
      split.unseen.push_back(id);
    else if (seen)
      split.seen.push_back(id);
  }
  if (split.seen.empty())
    throw ParameterError("no runs selected for fitting");
  return split;
}

StageResult cmd_synth(const PipelineConfig &config) {
  config.validate();
  if (config.synth.dwell < static_cast<double>(config.window))
    throw ParameterError("synth_dwell must be at least the window length");
  const SynthOutput synth = generate(config.synth);
  StageResult result;
  std::string manifest;
  for (std::size_t i = 0; i < synth.trajectories.size(); ++i) {
    const auto &traj = synth.trajectories[i];
    const fs::path run_file = config.data_dir / (traj.run_id + ".csv");
    const fs::path label_file = config.data_dir / "labels" / (traj.run_id + ".csv");
    io::write_file_atomic(run_file, trajectory_to_csv(traj));
    io::write_file_atomic(label_file, labels_to_csv(synth.labels[i], traj.dt));
    result.files.push_back(run_file);
    result.files.push_back(label_file);
    manifest += traj.run_id + ".csv\n";
    manifest += "labels/" + traj.run_id + ".csv\n";
  }
  const fs::path manifest_file = config.data_dir / "manifest.txt";
  io::write_file_atomic(manifest_file, manifest);
  result.files.push_back(manifest_file);
  return result;
}

StageResult cmd_fit(const PipelineConfig &config) {
  config.validate();
  const auto runs = load_trajectories(config.data_dir);
  const RunSplit split = resolve_split(config, run_ids(runs));
  const auto seen = select(runs, split.seen);

  StageResult result;
  const LinearModel global = fit_global(seen, config.q, config.r);
  const ModelCloud cloud = fit_local_models(seen, config.window, config.stride);

  const fs::path models_file = config.output_dir / "models.csv";
  const fs::path global_file = config.output_dir / "global_model.json";
  io::write_file_atomic(models_file, model_cloud_to_csv(cloud));
  io::write_file_atomic(global_file, linear_model_to_json(global));
  result.files = {models_file, global_file};
  result.notes.push_back(std::to_string(cloud.points.size()) + " local models from " +
                         std::to_string(seen.size()) + " runs (" +
                         std::to_string(cloud.degenerate_windows) + " degenerate windows dropped)");
  return result;
}

StageResult cmd_cluster(const PipelineConfig &config) {
  config.validate();
  const ModelCloud cloud = model_cloud_from_csv(io::read_file(config.output_dir / "models.csv"),
                                                config.window, config.stride);
  const auto points = cloud_points(cloud);
  StageResult result;
  result.files.resize(config.components.size());
  std::vector<std::string> notes(config.components.size());
  parallel_for(config.components.size(), config.workers, [&](std::size_t i) {
    GmmOptions options;
    options.components = config.components[i];
    options.seed = config.seed;
    options.max_iter = config.max_iter;
    options.tol = config.tol;
    options.init = config.init_mode;
    const GmmFit fit = gmm_fit(points, options);
    result.files[i] = gmm_path(config, options.components);
    io::write_file_atomic(result.files[i], gmm_fit_to_json(fit));
    notes[i] = "M=" + std::to_string(options.components) + ": " +
               std::to_string(fit.trace.iterations) + " iterations" +
               (fit.trace.converged ? "" : " (not converged)") +
               (fit.trace.rescued_iterations.empty()
                    ? ""
                    : ", " + std::to_string(fit.trace.rescued_iterations.size()) +
                          " empty-component rescues");
  });
  result.notes = std::move(notes);
  return result;
}

StageResult cmd_estimate(const PipelineConfig &config) {
  config.validate();
  const auto runs = load_trajectories(config.data_dir);
  const RunSplit split = resolve_split(config, run_ids(runs));
  const LinearModel global =
      linear_model_from_json(io::read_file(config.output_dir / "global_model.json"));

  std::vector<std::vector<LinearModel>> banks;
  for (auto m : config.components) {
    const GmmFit fit = gmm_fit_from_json(io::read_file(gmm_path(config, m)));
    banks.push_back(extract_models(fit.params, config.q, config.r));
  }

  std::vector<const Trajectory *> selected;
  for (const auto &t : runs)
    if (std::find(split.seen.begin(), split.seen.end(), t.run_id) != split.seen.end() ||
        std::find(split.unseen.begin(), split.unseen.end(), t.run_id) != split.unseen.end())
      selected.push_back(&t);

  // Job j covers run j / (1 + banks) and estimator j % (1 + banks); estimator 0 is the baseline.
  const std::size_t per_run = 1 + banks.size();
  const std::size_t jobs = selected.size() * per_run;
  std::vector<fs::path> files(jobs);
  std::vector<std::size_t> flagged(jobs, 0);
  const ImmRunConfig imm = config.imm_config();
  parallel_for(jobs, config.workers, [&](std::size_t j) {
    const Trajectory &traj = *selected[j / per_run];
    const std::size_t which = j % per_run;
    if (which == 0) {
      files[j] = estimate_path(config, traj.run_id, "global");
      const auto steps = run_kf(global, traj, config.x0_mode, config.p0);
      io::write_file_atomic(files[j], baseline_estimate_csv(traj, steps));
      return;
    }
    const auto &models = banks[which - 1];
    files[j] = estimate_path(config, traj.run_id, std::to_string(models.size()));
    const auto steps = run_imm(models, traj, imm);
    for (const auto &s : steps)
      if (s.likelihood_underflow || s.mixing_fallback)
        ++flagged[j];
    io::write_file_atomic(files[j], imm_estimate_csv(traj, steps, models.size()));
  });

  StageResult result;
  result.files = std::move(files);
  for (std::size_t j = 0; j < jobs; ++j)
    if (flagged[j])
      result.notes.push_back(result.files[j].string() + ": " + std::to_string(flagged[j]) +
                             " flagged steps (likelihood underflow or mixing fallback)");
  return result;
}

ReportResult cmd_report(const PipelineConfig &config) {
  config.validate();
  const auto runs = load_trajectories(config.data_dir);
  const RunSplit split = resolve_split(config, run_ids(runs));
  std::vector<std::string> ids = split.seen;
  ids.insert(ids.end(), split.unseen.begin(), split.unseen.end());
  std::sort(ids.begin(), ids.end());

  struct Estimator {
    std::string label;
    std::optional<std::size_t> components;
    std::string file_name;
  };
  std::vector<Estimator> estimators{{baseline_label(), std::nullopt, "global"}};
  for (auto m : config.components)
    estimators.push_back({gmm_label(m), m, std::to_string(m)});

  ReportResult result;
  std::vector<LabeledReport> reports;
  std::map<std::pair<std::string, DatasetTag>, std::vector<double>> pooled;
  const auto [lower, upper] = chi2_bounds(1, config.tail);
  const fs::path plot_dir = config.output_dir / "plots";

  for (const auto &run : ids) {
    const DatasetTag tag = split.tag_of(run);
    for (const auto &est : estimators) {
      const fs::path file = estimate_path(config, run, est.file_name);
      const Table table = read_table(file);
      const std::size_t nu_col = table.column("nu", file);
      NisSeries series;
      for (const auto &row : table.rows)
        series.values.push_back(row[nu_col]);
      reports.push_back({est.label, est.components, run, nis_report(series, config.tail, tag)});
      auto &pool = pooled[{est.label, tag}];
      pool.insert(pool.end(), series.values.begin(), series.values.end());

      svg::LineChart nis_chart;
      nis_chart.title = "NIS, " + est.label + ", " + run + " (" + std::string(to_string(tag)) + ")";
      nis_chart.x_label = "step";
      nis_chart.y_label = "NIS";
      nis_chart.log_y = true;
      nis_chart.series.push_back({est.label, series.values});
      nis_chart.reference_lines = {{"upper", upper}, {"lower", lower}};
      const fs::path nis_plot = plot_dir / ("nis_" + run + "_" + est.label + ".svg");
      io::write_file_atomic(nis_plot, svg::render(nis_chart));
      result.files.push_back(nis_plot);

      if (est.components) {
        svg::LineChart weights_chart;
        weights_chart.title = "Model weights, " + est.label + ", " + run;
        weights_chart.x_label = "step";
        weights_chart.y_label = "weight";
        for (std::size_t i = 1; i <= *est.components; ++i) {
          const std::size_t col = table.column("w_" + std::to_string(i), file);
          svg::Series s{"w_" + std::to_string(i), {}};
          for (const auto &row : table.rows)
            s.values.push_back(row[col]);
          weights_chart.series.push_back(std::move(s));
        }
        const fs::path w_plot = plot_dir / ("weights_" + run + "_" + est.label + ".svg");
        io::write_file_atomic(w_plot, svg::render(weights_chart));
        result.files.push_back(w_plot);
      }
    }
  }

  for (const auto &est : estimators) {
    for (DatasetTag tag : {DatasetTag::Seen, DatasetTag::Unseen}) {
      auto it = pooled.find({est.label, tag});
      if (it == pooled.end())
        continue;
      const NisReport report = nis_report({it->second, 1}, config.tail, tag);
      const fs::path file = config.output_dir / ("nis_report_" + est.label + "_" +
                                                 std::string(to_string(tag)) + ".json");
      io::write_file_atomic(file, nis_report_to_json(report, est.label, est.components));
      result.files.push_back(file);
    }
  }

  result.summary = compare_runs(reports);
  const fs::path summary_file = config.output_dir / "nis_summary.csv";
  io::write_file_atomic(summary_file, summary_to_csv(result.summary));
  result.files.push_back(summary_file);

  svg::BarChart bars;
  bars.title = "Average NIS violations per run";
  bars.y_label = "samples outside bounds";
  bars.series_names = {"seen over", "seen under", "unseen over", "unseen under"};
  for (const auto &est : estimators) {
    std::vector<double> values(4, 0.0);
    for (const auto &row : result.summary) {
      if (row.label != est.label)
        continue;
      const std::size_t base = row.dataset_tag == DatasetTag::Seen ? 0 : 2;
      values[base] = row.avg_over_per_run;
      values[base + 1] = row.avg_under_per_run;
    }
    bars.group_labels.push_back(est.label);
    bars.values.push_back(values);
  }
  const fs::path bar_plot = plot_dir / "nis_violations.svg";
  io::write_file_atomic(bar_plot, svg::render(bars));
  result.files.push_back(bar_plot);
  return result;
}

} // namespace gmmimm
