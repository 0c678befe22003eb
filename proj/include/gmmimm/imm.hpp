#pragma once

#include "gmmimm/filter.hpp"
#include "gmmimm/trajectory.hpp"

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace gmmimm {

/// Row-stochastic Markov switching matrix, stored row-major.
class TransitionMatrix {
public:
  TransitionMatrix() = default;
  /// Throws ParameterError unless `values` is M*M, nonnegative, rows sum to 1 (1e-12).
  TransitionMatrix(std::size_t size, std::vector<double> values);

  /// Tr_ii = diag, off-diagonal mass split evenly. M = 1 gives [[1]].
  static TransitionMatrix sticky(std::size_t size, double diag = 0.95);

  std::size_t size() const { return size_; }
  double operator()(std::size_t from, std::size_t to) const { return values_[from * size_ + to]; }
  const std::vector<double> &values() const { return values_; }

private:
  std::size_t size_ = 0;
  std::vector<double> values_;
};

/// Which model probabilities multiply the likelihoods in the weight update.
enum class WeightPrior {
  Predicted, // c_j = sum_i w_i Tr_ij (standard IMM)
  Previous,  // w_{k-1} directly
};

WeightPrior parse_weight_prior(std::string_view text);
std::string_view to_string(WeightPrior prior);

struct ImmOptions {
  WeightPrior weight_prior = WeightPrior::Predicted;
  double weight_floor = 1e-12;
};

struct ImmBank {
  std::vector<LinearModel> models;
  std::vector<FilterState> states;
  std::vector<double> weights;
  TransitionMatrix transition;

  std::size_t size() const { return models.size(); }
  void validate() const;
};

/// Equal weights, every filter starting from `initial`.
ImmBank make_bank(std::vector<LinearModel> models, const FilterState &initial,
                  TransitionMatrix transition);

struct MixResult {
  std::vector<FilterState> mixed;
  std::vector<double> predicted_weights; // c_j
  bool fallback = false;                 // some c_j underflowed; uniform mixing used
};

MixResult imm_mix(const ImmBank &bank);

inline constexpr double kLikelihoodFloor = 1e-300;

/// N(y; 0, S), floored at kLikelihoodFloor.
double model_likelihood(const UpdateOutcome &outcome);

struct Innovation {
  double y = 0.0;
  double s = 1.0;
  double nis() const { return y * y / s; }
};

struct ImmStepOutput {
  FilterState combined;
  std::vector<double> weights;
  std::vector<UpdateOutcome> per_model;
  /// Innovation of the model with the largest prior weight.
  Innovation dominant;
  std::size_t dominant_index = 0;
  /// Moment-matched innovation of the prior-weighted predictive mixture.
  Innovation mixture;
  bool likelihood_underflow = false; // all likelihoods floored, weights carried over
  bool mixing_fallback = false;
};

struct ImmStep {
  ImmBank bank;
  ImmStepOutput output;
};

/// Mix, per-model predict/update against the same z, likelihood weighting, combination.
ImmStep imm_step(const ImmBank &bank, const WheelInput &u, double z,
                 const ImmOptions &options = {});

enum class InitialStateMode { FirstMeasurement, Zero };

InitialStateMode parse_initial_state_mode(std::string_view text);

struct ImmRunConfig {
  double tr_diag = 0.95;
  std::vector<double> transition; // optional full M*M matrix, overrides tr_diag
  InitialStateMode x0_mode = InitialStateMode::FirstMeasurement;
  double p0 = kDefaultInitialVariance;
  ImmOptions options;
};

FilterState initial_state(const Trajectory &trajectory, InitialStateMode mode, double p0);

/// Folds imm_step over the trajectory with z = x_next and u = u_k of every sample.
std::vector<ImmStepOutput> run_imm(std::span<const LinearModel> models, const Trajectory &trajectory,
                                   const ImmRunConfig &config = {});

/// Single-model Kalman filter run with the same initialization.
struct KfStepOutput {
  FilterState state;
  Innovation innovation;
};

std::vector<KfStepOutput> run_kf(const LinearModel &model, const Trajectory &trajectory,
                                 InitialStateMode x0_mode = InitialStateMode::FirstMeasurement,
                                 double p0 = kDefaultInitialVariance);

} // namespace gmmimm
