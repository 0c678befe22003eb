#pragma once

#include "gmmimm/sysid.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace gmmimm {

using Point3 = std::array<double, 3>;

inline constexpr double kVarianceFloor = 1e-8;
inline constexpr double kEmptyComponentMass = 1e-6;

/// Diagonal-covariance Gaussian mixture over (a, b1, b2) model space.
struct GmmParams {
  std::vector<double> weights;
  std::vector<Point3> means;
  std::vector<Point3> variances; // per-axis, diagonal covariance

  std::size_t components() const { return weights.size(); }
  /// Sizes agree, weights on the simplex (1e-12), variances >= floor, all finite.
  void validate() const;
};

struct EmTrace {
  std::size_t iterations = 0;
  /// log-likelihood of the initial parameters followed by one entry per iteration.
  std::vector<double> log_likelihoods;
  bool converged = false;
  /// Iterations (1-based) in which an empty component was re-seeded.
  std::vector<std::size_t> rescued_iterations;
};

enum class InitMode { KMeansPlusPlus, Random };

InitMode parse_init_mode(std::string_view text);
std::string_view to_string(InitMode mode);

struct GmmOptions {
  std::size_t components = 3;
  std::uint64_t seed = 0;
  std::size_t max_iter = 500;
  double tol = 1e-6;
  InitMode init = InitMode::KMeansPlusPlus;
};

struct GmmFit {
  GmmParams params;
  EmTrace trace;
  std::uint64_t seed = 0;
  double final_log_likelihood = 0.0;
};

std::vector<Point3> cloud_points(const ModelCloud &cloud);

/// Log of the diagonal Gaussian density at `s`.
double log_density(const Point3 &s, const Point3 &mean, const Point3 &variance);

/// Posterior component probabilities for one point, evaluated in log space.
/// Falls back to 1/M if every component density is zero.
std::vector<double> responsibilities(const GmmParams &params, const Point3 &s);

double log_likelihood(const GmmParams &params, std::span<const Point3> points);

struct EmStep {
  GmmParams params;
  double log_likelihood = 0.0; // of the input parameters
  std::vector<std::size_t> rescued; // components re-seeded this step
};

/// One E-step + M-step. A component whose responsibility mass falls below
/// kEmptyComponentMass is moved to a random cloud point with the pooled variance.
EmStep em_step(const GmmParams &params, std::span<const Point3> points, std::mt19937_64 &rng);
EmStep em_step(const GmmParams &params, std::span<const Point3> points);

/// Equal weights, pooled per-axis variance, and means from k-means++ seeding
/// (or uniform draws in the bounding box for InitMode::Random).
GmmParams initialize_gmm(std::span<const Point3> points, std::size_t components,
                         std::mt19937_64 &rng, InitMode mode = InitMode::KMeansPlusPlus);

/// Iterates EM until the log-likelihood changes by less than `tol` or `max_iter`.
GmmFit gmm_fit(std::span<const Point3> points, const GmmOptions &options);
GmmFit gmm_fit(const ModelCloud &cloud, const GmmOptions &options);

/// One bank model per component mean, sharing q and r.
std::vector<LinearModel> extract_models(const GmmParams &params, double q = kDefaultProcessNoise,
                                        double r = kDefaultMeasurementNoise);

/// `{M, weights, means, variances, seed, iterations, final_log_likelihood}`
std::string gmm_fit_to_json(const GmmFit &fit);
GmmFit gmm_fit_from_json(std::string_view text);

} // namespace gmmimm
