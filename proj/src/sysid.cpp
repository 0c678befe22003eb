#include "gmmimm/sysid.hpp"

#include "gmmimm/errors.hpp"
#include "gmmimm/io.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>

namespace gmmimm {

namespace {

constexpr double kRankThreshold = 1e-10;

LinearFit solve(const Eigen::MatrixXd &regressor, const Eigen::VectorXd &target) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(regressor, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(kRankThreshold);
  LinearFit fit;
  fit.rank = static_cast<int>(svd.rank());
  fit.degenerate = fit.rank < 3;
  if (fit.rank == 0)
    return fit;
  const Eigen::Vector3d theta = svd.solve(target);
  fit.coefficients = {theta(0), theta(1), theta(2)};
  return fit;
}

} // namespace

void LinearModel::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b1) || !std::isfinite(b2))
    throw ParameterError("linear model coefficients must be finite");
  if (!(q > 0.0) || !(r > 0.0) || !std::isfinite(q) || !std::isfinite(r))
    throw ParameterError("linear model noise variances must be positive");
}

LinearFit fit_linear(std::span<const double> x, std::span<const WheelInput> u,
                     std::span<const double> x_next) {
  const std::size_t n = x.size();
  if (u.size() != n || x_next.size() != n)
    throw ParameterError("fit_linear: sequences must have equal length");
  if (n < 3)
    throw ParameterError("fit_linear: at least 3 transitions required");
  Eigen::MatrixXd regressor(static_cast<Eigen::Index>(n), 3);
  Eigen::VectorXd target(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    regressor(k, 0) = x[i];
    regressor(k, 1) = u[i].left;
    regressor(k, 2) = u[i].right;
    target(k) = x_next[i];
  }
  return solve(regressor, target);
}

LinearFit fit_linear(std::span<const TrajectorySample> samples) {
  const std::size_t n = samples.size();
  if (n < 3)
    throw ParameterError("fit_linear: at least 3 transitions required");
  Eigen::MatrixXd regressor(static_cast<Eigen::Index>(n), 3);
  Eigen::VectorXd target(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    regressor(k, 0) = samples[i].x;
    regressor(k, 1) = samples[i].u.left;
    regressor(k, 2) = samples[i].u.right;
    target(k) = samples[i].x_next;
  }
  return solve(regressor, target);
}

LinearModel fit_global(std::span<const Trajectory> dataset, double q, double r) {
  if (dataset.empty())
    throw ParameterError("fit_global: empty dataset");
  std::vector<TrajectorySample> pooled;
  for (const auto &traj : dataset)
    pooled.insert(pooled.end(), traj.samples.begin(), traj.samples.end());
  if (pooled.size() < 3)
    throw ParameterError("fit_global: at least 3 transitions required");
  const auto fit = fit_linear(pooled);
  LinearModel model{fit.coefficients[0], fit.coefficients[1], fit.coefficients[2], q, r};
  model.validate();
  return model;
}

ModelCloud fit_local_models(std::span<const Trajectory> dataset, std::size_t window,
                            std::size_t stride) {
  ModelCloud cloud;
  cloud.window = window;
  cloud.stride = stride;
  for (const auto &traj : dataset) {
    for (const auto &w : sliding_windows(traj, window, stride)) {
      const auto fit = fit_linear(w.samples);
      if (fit.degenerate) {
        ++cloud.degenerate_windows;
        continue;
      }
      cloud.points.push_back({fit.coefficients, w.run_id, w.start_index});
    }
  }
  if (cloud.points.empty())
    throw DataError("no usable windows: " + std::to_string(cloud.degenerate_windows) +
                    " degenerate, window length " + std::to_string(window));
  return cloud;
}

std::string model_cloud_to_csv(const ModelCloud &cloud) {
  std::string out = "run_id,start_index,a,b1,b2\n";
  for (const auto &p : cloud.points) {
    out += p.run_id;
    out += ',';
    out += std::to_string(p.start_index);
    for (double v : p.s) {
      out += ',';
      out += io::format_double(v);
    }
    out += '\n';
  }
  return out;
}

ModelCloud model_cloud_from_csv(std::string_view text, std::size_t window, std::size_t stride) {
  ModelCloud cloud;
  cloud.window = window;
  cloud.stride = stride;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    auto line = text.substr(pos, (eol == text.npos ? text.size() : eol) - pos);
    pos = eol == text.npos ? text.size() : eol + 1;
    ++line_no;
    if (line.empty() || line == "\r" || line_no == 1)
      continue;
    const auto f = io::split_csv_line(line);
    if (f.size() != 5)
      throw DataError("models csv line " + std::to_string(line_no) + ": expected 5 fields");
    ModelPoint p;
    p.run_id = std::string(f[0]);
    auto start = io::parse_double(f[1]);
    if (!start || *start < 0)
      throw DataError("models csv line " + std::to_string(line_no) + ": bad start_index");
    p.start_index = static_cast<std::size_t>(*start);
    for (int c = 0; c < 3; ++c) {
      auto v = io::parse_double(f[2 + c]);
      if (!v || !std::isfinite(*v))
        throw DataError("models csv line " + std::to_string(line_no) + ": bad coefficient");
      p.s[c] = *v;
    }
    cloud.points.push_back(std::move(p));
  }
  if (cloud.points.empty())
    throw DataError("models csv contains no points");
  return cloud;
}

std::string linear_model_to_json(const LinearModel &model) {
  nlohmann::ordered_json j;
  j["a"] = model.a;
  j["b1"] = model.b1;
  j["b2"] = model.b2;
  j["q"] = model.q;
  j["r"] = model.r;
  return j.dump(2) + "\n";
}

LinearModel linear_model_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    LinearModel m{j.at("a").get<double>(), j.at("b1").get<double>(), j.at("b2").get<double>(),
                  j.at("q").get<double>(), j.at("r").get<double>()};
    m.validate();
    return m;
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("global model json: ") + e.what());
  }
}

} // namespace gmmimm
