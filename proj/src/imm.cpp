#include "gmmimm/imm.hpp"

#include "gmmimm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gmmimm {

namespace {

constexpr double kSimplexTolerance = 1e-12;
constexpr double kMixingUnderflow = 1e-300;

void check_simplex(std::span<const double> values, const char *what) {
  double sum = 0.0;
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ParameterError(std::string(what) + ": entries must be nonnegative and finite");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance)
    throw ParameterError(std::string(what) + ": entries must sum to 1");
}

} // namespace

TransitionMatrix::TransitionMatrix(std::size_t size, std::vector<double> values)
    : size_(size), values_(std::move(values)) {
  if (size_ == 0 || values_.size() != size_ * size_)
    throw ParameterError("transition matrix must be M x M with M >= 1");
  for (std::size_t i = 0; i < size_; ++i)
    check_simplex(std::span<const double>(values_).subspan(i * size_, size_),
                  "transition matrix row");
}

TransitionMatrix TransitionMatrix::sticky(std::size_t size, double diag) {
  if (size == 0)
    throw ParameterError("transition matrix needs at least one model");
  if (!(diag > 0.0 && diag <= 1.0))
    throw ParameterError("transition diagonal must be in (0, 1]");
  if (size == 1)
    return TransitionMatrix(1, {1.0});
  const double off = (1.0 - diag) / static_cast<double>(size - 1);
  std::vector<double> values(size * size, off);
  for (std::size_t i = 0; i < size; ++i)
    values[i * size + i] = diag;
  return TransitionMatrix(size, std::move(values));
}

WeightPrior parse_weight_prior(std::string_view text) {
  if (text == "predicted")
    return WeightPrior::Predicted;
  if (text == "previous")
    return WeightPrior::Previous;
  throw ParameterError("unknown weight prior '" + std::string(text) + "' (predicted|previous)");
}

std::string_view to_string(WeightPrior prior) {
  return prior == WeightPrior::Previous ? "previous" : "predicted";
}

InitialStateMode parse_initial_state_mode(std::string_view text) {
  if (text == "first_measurement")
    return InitialStateMode::FirstMeasurement;
  if (text == "zero")
    return InitialStateMode::Zero;
  throw ParameterError("unknown x0 mode '" + std::string(text) + "' (first_measurement|zero)");
}

void ImmBank::validate() const {
  const std::size_t m = models.size();
  if (m == 0 || states.size() != m || weights.size() != m || transition.size() != m)
    throw ParameterError("imm bank: inconsistent sizes");
  for (const auto &model : models)
    model.validate();
  for (const auto &s : states)
    if (!(s.p > 0.0) || !std::isfinite(s.x))
      throw ParameterError("imm bank: invalid filter state");
  check_simplex(weights, "imm bank weights");
}

ImmBank make_bank(std::vector<LinearModel> models, const FilterState &initial,
                  TransitionMatrix transition) {
  ImmBank bank;
  const std::size_t m = models.size();
  bank.models = std::move(models);
  bank.states.assign(m, initial);
  bank.weights.assign(m, m == 0 ? 0.0 : 1.0 / static_cast<double>(m));
  bank.transition = std::move(transition);
  bank.validate();
  return bank;
}

MixResult imm_mix(const ImmBank &bank) {
  const std::size_t m = bank.size();
  MixResult out;
  out.mixed.resize(m);
  out.predicted_weights.assign(m, 0.0);
  std::vector<double> mu(m);
  for (std::size_t j = 0; j < m; ++j) {
    double c = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      mu[i] = bank.weights[i] * bank.transition(i, j);
      c += mu[i];
    }
    out.predicted_weights[j] = c;
    if (c < kMixingUnderflow) {
      std::fill(mu.begin(), mu.end(), 1.0 / static_cast<double>(m));
      out.fallback = true;
    } else {
      for (auto &v : mu)
        v /= c;
    }

    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      mean += mu[i] * bank.states[i].x;
    double var = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double d = bank.states[i].x - mean;
      var += mu[i] * (bank.states[i].p + d * d);
    }
    out.mixed[j] = {mean, var};
  }
  if (out.fallback) {
    double total = 0.0;
    for (double c : out.predicted_weights)
      total += c;
    for (auto &c : out.predicted_weights)
      c = total > 0.0 ? c / total : 1.0 / static_cast<double>(m);
  }
  return out;
}

double model_likelihood(const UpdateOutcome &outcome) {
  const double s = outcome.innovation_var;
  if (!(s > 0.0))
    throw NumericalError("model_likelihood: innovation variance must be positive");
  const double y = outcome.innovation;
  const double value = std::exp(-0.5 * y * y / s) / std::sqrt(2.0 * std::numbers::pi * s);
  return std::isfinite(value) ? std::max(value, kLikelihoodFloor) : kLikelihoodFloor;
}

ImmStep imm_step(const ImmBank &bank, const WheelInput &u, double z, const ImmOptions &options) {
  if (!std::isfinite(z))
    throw ParameterError("imm_step: measurement must be finite");
  bank.validate();
  const std::size_t m = bank.size();
  const MixResult mix = imm_mix(bank);
  const std::vector<double> &prior_weights =
      options.weight_prior == WeightPrior::Predicted ? mix.predicted_weights : bank.weights;

  ImmStep step;
  step.bank.models = bank.models;
  step.bank.transition = bank.transition;
  step.bank.states.resize(m);
  auto &out = step.output;
  out.mixing_fallback = mix.fallback;
  out.per_model.resize(m);

  std::vector<FilterState> priors(m);
  std::vector<double> likelihood(m);
  bool all_floored = true;
  for (std::size_t j = 0; j < m; ++j) {
    priors[j] = kf_predict(mix.mixed[j], bank.models[j], u);
    out.per_model[j] = kf_update(priors[j], z, bank.models[j].r);
    step.bank.states[j] = out.per_model[j].state;
    likelihood[j] = model_likelihood(out.per_model[j]);
    all_floored = all_floored && likelihood[j] <= kLikelihoodFloor;
  }

  // Predictive innovation statistics use only information available before z.
  out.dominant_index = static_cast<std::size_t>(
      std::max_element(prior_weights.begin(), prior_weights.end()) - prior_weights.begin());
  out.dominant = {out.per_model[out.dominant_index].innovation,
                  out.per_model[out.dominant_index].innovation_var};
  double predicted_mean = 0.0;
  for (std::size_t j = 0; j < m; ++j)
    predicted_mean += prior_weights[j] * priors[j].x;
  double predicted_var = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double d = priors[j].x - predicted_mean;
    predicted_var += prior_weights[j] * (out.per_model[j].innovation_var + d * d);
  }
  out.mixture = {z - predicted_mean, predicted_var};

  std::vector<double> weights(m);
  if (all_floored) {
    weights = prior_weights;
    out.likelihood_underflow = true;
  } else {
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      weights[j] = likelihood[j] * prior_weights[j];
      total += weights[j];
    }
    for (auto &w : weights)
      w /= total;
  }
  double total = 0.0;
  for (auto &w : weights) {
    w = std::max(w, options.weight_floor);
    total += w;
  }
  for (auto &w : weights)
    w /= total;
  step.bank.weights = weights;

  double x_hat = 0.0;
  for (std::size_t j = 0; j < m; ++j)
    x_hat += weights[j] * step.bank.states[j].x;
  double p_hat = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double d = step.bank.states[j].x - x_hat;
    p_hat += weights[j] * (step.bank.states[j].p + d * d);
  }
  out.combined = {x_hat, p_hat};
  out.weights = std::move(weights);
  return step;
}

FilterState initial_state(const Trajectory &trajectory, InitialStateMode mode, double p0) {
  if (trajectory.samples.empty())
    throw ParameterError("trajectory '" + trajectory.run_id + "' has no samples");
  if (!(p0 > 0.0))
    throw ParameterError("initial variance p0 must be positive");
  const double x0 = mode == InitialStateMode::FirstMeasurement ? trajectory.samples.front().x : 0.0;
  return {x0, p0};
}

std::vector<ImmStepOutput> run_imm(std::span<const LinearModel> models, const Trajectory &trajectory,
                                   const ImmRunConfig &config) {
  if (models.empty())
    throw ParameterError("run_imm: at least one model required");
  const std::size_t m = models.size();
  TransitionMatrix tr = config.transition.empty()
                            ? TransitionMatrix::sticky(m, config.tr_diag)
                            : TransitionMatrix(m, config.transition);
  ImmBank bank = make_bank({models.begin(), models.end()},
                           initial_state(trajectory, config.x0_mode, config.p0), std::move(tr));
  std::vector<ImmStepOutput> out;
  out.reserve(trajectory.samples.size());
  for (const auto &sample : trajectory.samples) {
    ImmStep step = imm_step(bank, sample.u, sample.x_next, config.options);
    bank = std::move(step.bank);
    out.push_back(std::move(step.output));
  }
  return out;
}

std::vector<KfStepOutput> run_kf(const LinearModel &model, const Trajectory &trajectory,
                                 InitialStateMode x0_mode, double p0) {
  model.validate();
  FilterState state = initial_state(trajectory, x0_mode, p0);
  std::vector<KfStepOutput> out;
  out.reserve(trajectory.samples.size());
  for (const auto &sample : trajectory.samples) {
    const auto outcome = kf_update(kf_predict(state, model, sample.u), sample.x_next, model.r);
    state = outcome.state;
    out.push_back({state, {outcome.innovation, outcome.innovation_var}});
  }
  return out;
}

} // namespace gmmimm
