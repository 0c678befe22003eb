#pragma once

#include "gmmimm/gmm.hpp"
#include "gmmimm/trajectory.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gmmimm {

enum class DwellMode { Exponential, Fixed };

DwellMode parse_dwell_mode(std::string_view text);

/// Independent per-wheel piecewise-constant excitation: each wheel holds a level drawn
/// uniformly from [low, high] for a period drawn uniformly from [period_min, period_max].
struct InputProfile {
  double low = -4.0;
  double high = 4.0;
  std::size_t period_min = 4;
  std::size_t period_max = 16;
};

struct SynthConfig {
  std::vector<Point3> regimes{{0.9, -0.04, 0.04}, {0.6, -0.06, 0.06}, {0.75, 0.02, 0.1}};
  double dwell = 200.0; // mean steps per regime visit
  DwellMode dwell_mode = DwellMode::Exponential;
  double process_noise_std = 0.031622776601683794; // sqrt(1e-3)
  double measurement_noise_std = 0.1;              // sqrt(1e-2)
  InputProfile input;
  double initial_state = 0.0;
  std::size_t steps = 358; // transitions per run (rows = steps + 1)
  std::size_t runs = 9;
  std::uint64_t seed = 1;
  double dt = 0.05;
  std::string run_prefix = "run_";

  void validate() const;
};

struct SynthOutput {
  std::vector<Trajectory> trajectories;
  /// Active regime for each row of each run (steps + 1 entries).
  std::vector<std::vector<std::size_t>> labels;
};

/// Simulates x_{k+1} = a x_k + b1 u_l + b2 u_r + w_k, z_k = x_k + v_k with Markov
/// regime switching. Logged omega is z. Deterministic per seed.
SynthOutput generate(const SynthConfig &config);

/// `time_s,regime_index`
std::string labels_to_csv(const std::vector<std::size_t> &labels, double dt);

} // namespace gmmimm
