#include "gmmimm/gmm.hpp"

#include "gmmimm/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gmmimm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112; // log(2*pi)

Point3 pooled_variance(std::span<const Point3> points) {
  Point3 mean{}, var{};
  const double n = static_cast<double>(points.size());
  for (const auto &p : points)
    for (int d = 0; d < 3; ++d)
      mean[d] += p[d];
  for (auto &m : mean)
    m /= n;
  for (const auto &p : points)
    for (int d = 0; d < 3; ++d)
      var[d] += (p[d] - mean[d]) * (p[d] - mean[d]);
  for (auto &v : var)
    v = std::max(v / n, kVarianceFloor);
  return var;
}

// Fills `gamma` (row-major N x M) and returns the total log-likelihood.
double expectation(const GmmParams &params, std::span<const Point3> points,
                   std::vector<double> &gamma) {
  const std::size_t m_count = params.components();
  gamma.assign(points.size() * m_count, 0.0);
  std::vector<double> log_w(m_count);
  for (std::size_t m = 0; m < m_count; ++m)
    log_w[m] = std::log(params.weights[m]);

  double total = 0.0;
  for (std::size_t n = 0; n < points.size(); ++n) {
    double *row = gamma.data() + n * m_count;
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < m_count; ++m) {
      row[m] = log_w[m] + log_density(points[n], params.means[m], params.variances[m]);
      peak = std::max(peak, row[m]);
    }
    if (!std::isfinite(peak)) {
      std::fill(row, row + m_count, 1.0 / static_cast<double>(m_count));
      total += peak;
      continue;
    }
    double sum = 0.0;
    for (std::size_t m = 0; m < m_count; ++m) {
      row[m] = std::exp(row[m] - peak);
      sum += row[m];
    }
    for (std::size_t m = 0; m < m_count; ++m)
      row[m] /= sum;
    total += peak + std::log(sum);
  }
  return total;
}

GmmParams maximization(std::size_t m_count, std::span<const Point3> points,
                       const std::vector<double> &gamma, std::mt19937_64 &rng,
                       std::vector<std::size_t> &rescued) {
  const std::size_t n_count = points.size();
  GmmParams next;
  next.weights.assign(m_count, 0.0);
  next.means.assign(m_count, Point3{});
  next.variances.assign(m_count, Point3{});

  std::vector<double> mass(m_count, 0.0);
  for (std::size_t n = 0; n < n_count; ++n) {
    const double *row = gamma.data() + n * m_count;
    for (std::size_t m = 0; m < m_count; ++m) {
      mass[m] += row[m];
      for (int d = 0; d < 3; ++d)
        next.means[m][d] += row[m] * points[n][d];
    }
  }
  for (std::size_t m = 0; m < m_count; ++m)
    if (mass[m] >= kEmptyComponentMass)
      for (int d = 0; d < 3; ++d)
        next.means[m][d] /= mass[m];

  for (std::size_t n = 0; n < n_count; ++n) {
    const double *row = gamma.data() + n * m_count;
    for (std::size_t m = 0; m < m_count; ++m)
      for (int d = 0; d < 3; ++d) {
        const double e = points[n][d] - next.means[m][d];
        next.variances[m][d] += row[m] * e * e;
      }
  }

  std::uniform_int_distribution<std::size_t> pick(0, n_count - 1);
  Point3 pooled{};
  bool have_pooled = false;
  for (std::size_t m = 0; m < m_count; ++m) {
    if (mass[m] < kEmptyComponentMass) {
      if (!have_pooled) {
        pooled = pooled_variance(points);
        have_pooled = true;
      }
      next.means[m] = points[pick(rng)];
      next.variances[m] = pooled;
      mass[m] = 1.0;
      rescued.push_back(m);
      continue;
    }
    for (int d = 0; d < 3; ++d)
      next.variances[m][d] = std::max(next.variances[m][d] / mass[m], kVarianceFloor);
  }

  double total_mass = 0.0;
  for (double r : mass)
    total_mass += r;
  for (std::size_t m = 0; m < m_count; ++m)
    next.weights[m] = mass[m] / total_mass;
  return next;
}

void require_points(std::span<const Point3> points, std::size_t components) {
  if (components < 1)
    throw ParameterError("number of mixture components must be >= 1");
  if (points.size() < components)
    throw ParameterError("cloud has " + std::to_string(points.size()) + " points, fewer than " +
                         std::to_string(components) + " components");
}

} // namespace

InitMode parse_init_mode(std::string_view text) {
  if (text == "kmeans++" || text == "kmeanspp")
    return InitMode::KMeansPlusPlus;
  if (text == "random")
    return InitMode::Random;
  throw ParameterError("unknown init mode '" + std::string(text) + "' (kmeans++|random)");
}

std::string_view to_string(InitMode mode) {
  return mode == InitMode::Random ? "random" : "kmeans++";
}

void GmmParams::validate() const {
  const std::size_t m = weights.size();
  if (m == 0 || means.size() != m || variances.size() != m)
    throw ParameterError("gmm params: inconsistent component counts");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw ParameterError("gmm params: weights must be nonnegative and finite");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ParameterError("gmm params: weights must sum to 1");
  for (std::size_t i = 0; i < m; ++i)
    for (int d = 0; d < 3; ++d) {
      if (!std::isfinite(means[i][d]))
        throw ParameterError("gmm params: non-finite mean");
      if (!(variances[i][d] >= kVarianceFloor) || !std::isfinite(variances[i][d]))
        throw ParameterError("gmm params: variance below floor");
    }
}

std::vector<Point3> cloud_points(const ModelCloud &cloud) {
  std::vector<Point3> out;
  out.reserve(cloud.points.size());
  for (const auto &p : cloud.points)
    out.push_back(p.s);
  return out;
}

double log_density(const Point3 &s, const Point3 &mean, const Point3 &variance) {
  double acc = 0.0;
  for (int d = 0; d < 3; ++d) {
    const double e = s[d] - mean[d];
    acc += kLog2Pi + std::log(variance[d]) + e * e / variance[d];
  }
  return -0.5 * acc;
}

std::vector<double> responsibilities(const GmmParams &params, const Point3 &s) {
  std::vector<double> gamma;
  expectation(params, std::span<const Point3>(&s, 1), gamma);
  return gamma;
}

double log_likelihood(const GmmParams &params, std::span<const Point3> points) {
  std::vector<double> gamma;
  return expectation(params, points, gamma);
}

EmStep em_step(const GmmParams &params, std::span<const Point3> points, std::mt19937_64 &rng) {
  if (points.empty())
    throw ParameterError("em_step: empty cloud");
  params.validate();
  std::vector<double> gamma;
  EmStep out;
  out.log_likelihood = expectation(params, points, gamma);
  out.params = maximization(params.components(), points, gamma, rng, out.rescued);
  return out;
}

EmStep em_step(const GmmParams &params, std::span<const Point3> points) {
  std::mt19937_64 rng(0);
  return em_step(params, points, rng);
}

GmmParams initialize_gmm(std::span<const Point3> points, std::size_t components,
                         std::mt19937_64 &rng, InitMode mode) {
  require_points(points, components);
  GmmParams params;
  params.weights.assign(components, 1.0 / static_cast<double>(components));
  params.variances.assign(components, pooled_variance(points));

  if (mode == InitMode::Random) {
    Point3 lo = points.front(), hi = points.front();
    for (const auto &p : points)
      for (int d = 0; d < 3; ++d) {
        lo[d] = std::min(lo[d], p[d]);
        hi[d] = std::max(hi[d], p[d]);
      }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t m = 0; m < components; ++m) {
      Point3 mean{};
      for (int d = 0; d < 3; ++d)
        mean[d] = lo[d] + unit(rng) * (hi[d] - lo[d]);
      params.means.push_back(mean);
    }
    return params;
  }

  // k-means++: each further center is drawn with probability proportional to the
  // squared distance to the nearest center chosen so far.
  std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  params.means.push_back(points[pick(rng)]);
  std::vector<double> dist2(points.size(), std::numeric_limits<double>::infinity());
  while (params.means.size() < components) {
    const auto &last = params.means.back();
    double total = 0.0;
    for (std::size_t n = 0; n < points.size(); ++n) {
      double d2 = 0.0;
      for (int d = 0; d < 3; ++d)
        d2 += (points[n][d] - last[d]) * (points[n][d] - last[d]);
      dist2[n] = std::min(dist2[n], d2);
      total += dist2[n];
    }
    if (!(total > 0.0)) {
      params.means.push_back(points[pick(rng)]);
      continue;
    }
    const double target = unit(rng) * total;
    double cum = 0.0;
    std::size_t chosen = points.size() - 1;
    for (std::size_t n = 0; n < points.size(); ++n) {
      cum += dist2[n];
      if (cum > target) {
        chosen = n;
        break;
      }
    }
    params.means.push_back(points[chosen]);
  }
  return params;
}

GmmFit gmm_fit(std::span<const Point3> points, const GmmOptions &options) {
  require_points(points, options.components);
  if (!(options.tol >= 0.0))
    throw ParameterError("gmm tolerance must be nonnegative");
  std::mt19937_64 rng(options.seed);

  GmmFit fit;
  fit.seed = options.seed;
  fit.params = initialize_gmm(points, options.components, rng, options.init);

  std::vector<double> gamma;
  double ll = expectation(fit.params, points, gamma);
  fit.trace.log_likelihoods.push_back(ll);
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    std::vector<std::size_t> rescued;
    fit.params = maximization(options.components, points, gamma, rng, rescued);
    const double next_ll = expectation(fit.params, points, gamma);
    fit.trace.log_likelihoods.push_back(next_ll);
    fit.trace.iterations = it;
    if (!rescued.empty())
      fit.trace.rescued_iterations.push_back(it);
    const bool settled = std::abs(next_ll - ll) < options.tol;
    ll = next_ll;
    if (settled && rescued.empty()) {
      fit.trace.converged = true;
      break;
    }
  }
  fit.final_log_likelihood = ll;
  return fit;
}

GmmFit gmm_fit(const ModelCloud &cloud, const GmmOptions &options) {
  const auto points = cloud_points(cloud);
  return gmm_fit(points, options);
}

std::vector<LinearModel> extract_models(const GmmParams &params, double q, double r) {
  params.validate();
  std::vector<LinearModel> models;
  models.reserve(params.components());
  for (const auto &mean : params.means) {
    LinearModel m{mean[0], mean[1], mean[2], q, r};
    m.validate();
    models.push_back(m);
  }
  return models;
}

std::string gmm_fit_to_json(const GmmFit &fit) {
  nlohmann::ordered_json j;
  j["M"] = fit.params.components();
  j["weights"] = fit.params.weights;
  j["means"] = fit.params.means;
  j["variances"] = fit.params.variances;
  j["seed"] = fit.seed;
  j["iterations"] = fit.trace.iterations;
  j["final_log_likelihood"] = fit.final_log_likelihood;
  return j.dump(2) + "\n";
}

GmmFit gmm_fit_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    GmmFit fit;
    fit.params.weights = j.at("weights").get<std::vector<double>>();
    fit.params.means = j.at("means").get<std::vector<Point3>>();
    fit.params.variances = j.at("variances").get<std::vector<Point3>>();
    fit.seed = j.at("seed").get<std::uint64_t>();
    fit.trace.iterations = j.at("iterations").get<std::size_t>();
    fit.final_log_likelihood = j.at("final_log_likelihood").get<double>();
    if (j.at("M").get<std::size_t>() != fit.params.components())
      throw DataError("gmm json: M does not match component arrays");
    fit.params.validate();
    return fit;
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("gmm json: ") + e.what());
  } catch (const ParameterError &e) {
    throw DataError(std::string("gmm json: ") + e.what());
  }
}

} // namespace gmmimm
