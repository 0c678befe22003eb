#include "gmmimm/synth.hpp"

#include "gmmimm/errors.hpp"
#include "gmmimm/io.hpp"

#include <cmath>
#include <cstdio>
#include <random>

namespace gmmimm {

DwellMode parse_dwell_mode(std::string_view text) {
  if (text == "exponential")
    return DwellMode::Exponential;
  if (text == "fixed")
    return DwellMode::Fixed;
  throw ParameterError("unknown dwell mode '" + std::string(text) + "' (exponential|fixed)");
}

void SynthConfig::validate() const {
  if (regimes.empty())
    throw ParameterError("synth: at least one regime required");
  for (const auto &r : regimes) {
    if (!std::isfinite(r[0]) || !std::isfinite(r[1]) || !std::isfinite(r[2]))
      throw ParameterError("synth: regime coefficients must be finite");
    if (!(std::abs(r[0]) < 1.05))
      throw ParameterError("synth: regime |a| must be < 1.05");
  }
  if (!(dwell >= 3.0))
    throw ParameterError("synth: dwell must be >= 3 steps");
  if (!(process_noise_std >= 0.0) || !(measurement_noise_std >= 0.0))
    throw ParameterError("synth: noise standard deviations must be >= 0");
  if (!(input.low <= input.high) || input.period_min < 1 || input.period_min > input.period_max)
    throw ParameterError("synth: invalid input profile");
  if (steps < 1 || runs < 1)
    throw ParameterError("synth: steps and runs must be >= 1");
  if (!(dt > 0.0))
    throw ParameterError("synth: dt must be positive");
}

namespace {

class WheelSignal {
public:
  explicit WheelSignal(const InputProfile &profile) : profile_(profile) {}

  double next(std::mt19937_64 &rng) {
    if (remaining_ == 0) {
      std::uniform_real_distribution<double> level(profile_.low, profile_.high);
      std::uniform_int_distribution<std::size_t> period(profile_.period_min, profile_.period_max);
      level_ = profile_.low == profile_.high ? profile_.low : level(rng);
      remaining_ = period(rng);
    }
    --remaining_;
    return level_;
  }

private:
  InputProfile profile_;
  double level_ = 0.0;
  std::size_t remaining_ = 0;
};

std::size_t draw_dwell(const SynthConfig &config, std::mt19937_64 &rng) {
  if (config.dwell_mode == DwellMode::Fixed)
    return static_cast<std::size_t>(std::llround(config.dwell));
  std::exponential_distribution<double> exp(1.0 / config.dwell);
  return static_cast<std::size_t>(std::max(1.0, std::ceil(exp(rng))));
}

} // namespace

SynthOutput generate(const SynthConfig &config) {
  config.validate();
  SynthOutput out;
  const std::size_t n_regimes = config.regimes.size();
  for (std::size_t run = 0; run < config.runs; ++run) {
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed & 0xffffffffu),
                      static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(run)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> unit_normal(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_regime(0, n_regimes - 1);
    WheelSignal left(config.input), right(config.input);

    std::size_t regime = pick_regime(rng);
    std::size_t dwell_left = draw_dwell(config, rng);

    std::vector<double> truth(config.steps + 1);
    std::vector<WheelInput> inputs(config.steps + 1);
    std::vector<std::size_t> labels(config.steps + 1);
    truth[0] = config.initial_state;
    for (std::size_t k = 0; k < config.steps; ++k) {
      if (dwell_left == 0) {
        if (n_regimes > 1) {
          std::uniform_int_distribution<std::size_t> other(0, n_regimes - 2);
          const std::size_t next = other(rng);
          regime = next >= regime ? next + 1 : next;
        }
        dwell_left = draw_dwell(config, rng);
      }
      --dwell_left;
      labels[k] = regime;
      inputs[k] = {left.next(rng), right.next(rng)};
      const auto &c = config.regimes[regime];
      const double w = config.process_noise_std > 0.0 ? config.process_noise_std * unit_normal(rng) : 0.0;
      truth[k + 1] = c[0] * truth[k] + c[1] * inputs[k].left + c[2] * inputs[k].right + w;
    }
    labels[config.steps] = regime;
    inputs[config.steps] = inputs[config.steps > 0 ? config.steps - 1 : 0];

    Trajectory traj;
    std::array<char, 32> id{};
    std::snprintf(id.data(), id.size(), "%03zu", run);
    traj.run_id = config.run_prefix + id.data();
    traj.dt = config.dt;
    std::vector<double> z(config.steps + 1);
    for (std::size_t k = 0; k <= config.steps; ++k)
      z[k] = truth[k] + (config.measurement_noise_std > 0.0
                             ? config.measurement_noise_std * unit_normal(rng)
                             : 0.0);
    traj.samples.reserve(config.steps);
    for (std::size_t k = 0; k < config.steps; ++k)
      traj.samples.push_back({z[k], inputs[k], z[k + 1]});
    out.trajectories.push_back(std::move(traj));
    out.labels.push_back(std::move(labels));
  }
  return out;
}

std::string labels_to_csv(const std::vector<std::size_t> &labels, double dt) {
  std::string out = "time_s,regime_index\n";
  for (std::size_t k = 0; k < labels.size(); ++k)
    out += io::format_double(static_cast<double>(k) * dt) + ',' + std::to_string(labels[k]) + '\n';
  return out;
}

} // namespace gmmimm
