#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace gmmimm {

/// Left/right wheel angular velocities [rad/s].
struct WheelInput {
  double left = 0.0;
  double right = 0.0;

  bool operator==(const WheelInput &) const = default;
};

/// One transition (x_k, u_k, x_{k+1}) of body angular velocity.
struct TrajectorySample {
  double x = 0.0;      // omega at k [rad/s]
  WheelInput u;        // wheel speeds applied over [k, k+1)
  double x_next = 0.0; // omega at k+1 [rad/s]

  bool operator==(const TrajectorySample &) const = default;
};

/// A single logged run. Samples are chained: samples[i].x_next == samples[i+1].x.
struct Trajectory {
  std::string run_id;
  double dt = 0.0;
  std::vector<TrajectorySample> samples;

  /// Throws ParameterError if dt <= 0, a value is non-finite or the chain is broken.
  void validate(double chain_tolerance = 0.0) const;
};

/// Contiguous slice of a trajectory used to fit one local model.
struct Window {
  std::string run_id;
  std::size_t start_index = 0;
  std::span<const TrajectorySample> samples;
};

/// Builds a trajectory from raw log rows; row i and i+1 form transition i.
Trajectory trajectory_from_rows(std::string run_id, std::span<const double> time_s,
                                std::span<const double> omega,
                                std::span<const double> wheel_left,
                                std::span<const double> wheel_right);

/// Reads one run CSV (`time_s, omega_radps, wheel_left_radps, wheel_right_radps`).
/// Run id is the file stem. Throws DataError naming the file and row.
Trajectory load_trajectory_csv(const std::filesystem::path &file);

/// Loads a single CSV, or every top-level *.csv of a directory ordered by filename.
std::vector<Trajectory> load_trajectories(const std::filesystem::path &path);

/// Serializes a trajectory in the run CSV schema (shortest round-trip formatting).
std::string trajectory_to_csv(const Trajectory &traj);

/// Windows of length `window` advancing by `stride`. Empty when window > N.
/// The returned spans alias `traj.samples`.
std::vector<Window> sliding_windows(const Trajectory &traj, std::size_t window,
                                    std::size_t stride = 1);

} // namespace gmmimm
