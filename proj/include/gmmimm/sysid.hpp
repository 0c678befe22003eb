#pragma once

#include "gmmimm/trajectory.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gmmimm {

/// Scalar discrete model x_{k+1} = a*x_k + b1*u_l + b2*u_r + w,  z_k = x_k + v,
/// with w ~ N(0, q) and v ~ N(0, r).
///
/// `a` is the full-transition coefficient; the delta-form coefficient is a - 1.
struct LinearModel {
  double a = 1.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double q = 1e-3;
  double r = 1e-2;

  std::array<double, 3> coefficients() const { return {a, b1, b2}; }
  double predict(double x, const WheelInput &u) const { return a * x + b1 * u.left + b2 * u.right; }
  void validate() const;
};

inline constexpr double kDefaultProcessNoise = 1e-3;
inline constexpr double kDefaultMeasurementNoise = 1e-2;
inline constexpr std::size_t kDefaultWindow = 25;

/// Result of one least-squares fit.
struct LinearFit {
  std::array<double, 3> coefficients{}; // a, b1, b2
  int rank = 0;
  bool degenerate = false; // regressor rank < 3
};

/// Minimum-norm least squares for X+ = [a b1 b2] [X; U]. Singular values below
/// 1e-10 of the largest are treated as zero. Requires N >= 3.
LinearFit fit_linear(std::span<const double> x, std::span<const WheelInput> u,
                     std::span<const double> x_next);

/// Same regression over a run of transitions.
LinearFit fit_linear(std::span<const TrajectorySample> samples);

/// One model over all transitions pooled across the dataset.
LinearModel fit_global(std::span<const Trajectory> dataset, double q = kDefaultProcessNoise,
                       double r = kDefaultMeasurementNoise);

/// A fitted window as a point in (a, b1, b2) space.
struct ModelPoint {
  std::array<double, 3> s{};
  std::string run_id;
  std::size_t start_index = 0;
};

struct ModelCloud {
  std::vector<ModelPoint> points;
  std::size_t window = kDefaultWindow;
  std::size_t stride = 1;
  std::size_t degenerate_windows = 0; // excluded from `points`
};

/// One model per sliding window, ordered by run then start index. Windows with a
/// rank-deficient regressor are dropped and counted. Throws DataError if none remain.
ModelCloud fit_local_models(std::span<const Trajectory> dataset, std::size_t window = kDefaultWindow,
                            std::size_t stride = 1);

/// `run_id,start_index,a,b1,b2`
std::string model_cloud_to_csv(const ModelCloud &cloud);
ModelCloud model_cloud_from_csv(std::string_view text, std::size_t window = kDefaultWindow,
                                std::size_t stride = 1);

/// `{a, b1, b2, q, r}`
std::string linear_model_to_json(const LinearModel &model);
LinearModel linear_model_from_json(std::string_view text);

} // namespace gmmimm
