#include "gmmimm/errors.hpp"
#include "gmmimm/imm.hpp"
#include "gmmimm/synth.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

using namespace gmmimm;

namespace {

Trajectory noisy_run(const LinearModel &m, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> w(0.0, std::sqrt(m.q)), v(0.0, std::sqrt(m.r));
  std::uniform_real_distribution<double> input(-3, 3);
  Trajectory t;
  t.run_id = "noisy";
  t.dt = 0.05;
  double truth = 0.0, z = v(rng);
  for (std::size_t k = 0; k < n; ++k) {
    const WheelInput u{input(rng), input(rng)};
    truth = m.predict(truth, u) + w(rng);
    const double z_next = truth + v(rng);
    t.samples.push_back({z, u, z_next});
    z = z_next;
  }
  return t;
}

double sum(const std::vector<double> &v) { return std::accumulate(v.begin(), v.end(), 0.0); }

} // namespace

TEST(TransitionMatrix, ValidatesRows) {
  EXPECT_NO_THROW(TransitionMatrix(2, {0.9, 0.1, 0.2, 0.8}));
  EXPECT_THROW(TransitionMatrix(2, {0.9, 0.2, 0.2, 0.8}), ParameterError);
  EXPECT_THROW(TransitionMatrix(2, {1.1, -0.1, 0.2, 0.8}), ParameterError);
  EXPECT_THROW(TransitionMatrix(2, {1.0, 0.0, 1.0}), ParameterError);
  const auto one = TransitionMatrix::sticky(1, 0.95);
  EXPECT_EQ(one(0, 0), 1.0);
  const auto three = TransitionMatrix::sticky(3, 0.9);
  EXPECT_NEAR(three(0, 0), 0.9, 1e-15);
  EXPECT_NEAR(three(0, 2), 0.05, 1e-15);
  EXPECT_THROW(TransitionMatrix::sticky(2, 0.0), ParameterError);
}

TEST(ImmMix, SingleModelIsIdentity) {
  const auto bank = make_bank({LinearModel{}}, {0.37, 0.21}, TransitionMatrix::sticky(1));
  const auto mix = imm_mix(bank);
  EXPECT_EQ(mix.mixed[0].x, 0.37);
  EXPECT_EQ(mix.mixed[0].p, 0.21);
  EXPECT_FALSE(mix.fallback);
}

TEST(ImmMix, IdenticalStatesUnchanged) {
  const auto bank = make_bank(std::vector<LinearModel>(4), {1.5, 0.4}, TransitionMatrix::sticky(4, 0.7));
  for (const auto &s : imm_mix(bank).mixed) {
    EXPECT_NEAR(s.x, 1.5, 1e-15);
    EXPECT_NEAR(s.p, 0.4, 1e-15);
  }
}

TEST(ImmMix, HandEvaluatedTwoModel) {
  auto bank = make_bank(std::vector<LinearModel>(2), {0.0, 1.0},
                        TransitionMatrix(2, {0.9, 0.1, 0.1, 0.9}));
  bank.states = {{0.0, 1.0}, {1.0, 1.0}};
  const auto mix = imm_mix(bank);
  EXPECT_NEAR(mix.mixed[0].x, 0.1, 1e-15);
  EXPECT_NEAR(mix.mixed[1].x, 0.9, 1e-15);
  EXPECT_NEAR(mix.mixed[0].p, 1.09, 1e-15);
  EXPECT_NEAR(mix.mixed[1].p, 1.09, 1e-15);
  EXPECT_NEAR(mix.predicted_weights[0], 0.5, 1e-15);
}

TEST(ImmMix, UnderflowUsesUniformRow) {
  auto bank = make_bank(std::vector<LinearModel>(2), {0.0, 1.0}, TransitionMatrix(2, {1, 0, 1, 0}));
  bank.states = {{0.0, 1.0}, {2.0, 1.0}};
  const auto mix = imm_mix(bank);
  EXPECT_TRUE(mix.fallback);
  EXPECT_NEAR(mix.mixed[1].x, 1.0, 1e-15);
  EXPECT_NEAR(mix.mixed[1].p, 2.0, 1e-15);
  EXPECT_NEAR(sum(mix.predicted_weights), 1.0, 1e-15);
}

TEST(ModelLikelihood, StandardNormalAnchors) {
  EXPECT_NEAR(model_likelihood({{}, 0.0, 1.0}), 1.0 / std::sqrt(2 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(model_likelihood({{}, 0.0, 1.0}), 0.39894, 1e-5);
  EXPECT_NEAR(model_likelihood({{}, 1.0, 1.0}), 0.24197, 1e-5);
  EXPECT_NEAR(model_likelihood({{}, 1.0, 1.0}), std::exp(-0.5) / std::sqrt(2 * std::numbers::pi), 1e-15);
  const double tiny = model_likelihood({{}, 60.0, 1.0});
  EXPECT_EQ(tiny, kLikelihoodFloor);
  EXPECT_EQ(model_likelihood({{}, 1e200, 1.0}), kLikelihoodFloor);
  EXPECT_THROW(model_likelihood({{}, 0.0, 0.0}), NumericalError);
}

TEST(ImmStep, SingleModelEqualsKalmanOver500Steps) {
  const LinearModel m{0.9, 0.05, 0.05, 1e-3, 1e-2};
  const auto run = noisy_run(m, 500, 1);
  const auto imm = run_imm(std::vector<LinearModel>{m}, run);
  const auto kf = run_kf(m, run);
  ASSERT_EQ(imm.size(), 500u);
  for (std::size_t k = 0; k < imm.size(); ++k) {
    ASSERT_NEAR(imm[k].combined.x, kf[k].state.x, 1e-12);
    ASSERT_NEAR(imm[k].combined.p, kf[k].state.p, 1e-12);
    ASSERT_NEAR(imm[k].mixture.nis(), kf[k].innovation.nis(), 1e-12);
    ASSERT_EQ(imm[k].weights, std::vector<double>{1.0});
  }
}

TEST(ImmStep, IdenticalModelsStayUniform) {
  const LinearModel m{0.8, 0.1, -0.1, 1e-3, 1e-2};
  const auto run = noisy_run(m, 300, 2);
  const auto imm = run_imm(std::vector<LinearModel>(3, m), run, {.transition = std::vector<double>(9, 1.0 / 3)});
  const auto kf = run_kf(m, run);
  for (std::size_t k = 0; k < imm.size(); ++k) {
    for (double w : imm[k].weights)
      ASSERT_NEAR(w, 1.0 / 3, 1e-12);
    ASSERT_NEAR(imm[k].combined.x, kf[k].state.x, 1e-12);
    ASSERT_NEAR(imm[k].combined.p, kf[k].state.p, 1e-12);
  }
}

TEST(ImmStep, TrueModelWinsWithinHundredSteps) {
  // Low noise; the wrong model's a is off by 0.5.
  const LinearModel wrong{0.4, 0.05, 0.05, 1e-4, 1e-4}, right{0.9, 0.05, 0.05, 1e-4, 1e-4};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto run = noisy_run(right, 100, 10 + seed);
    const auto imm = run_imm(std::vector<LinearModel>{wrong, right}, run);
    double best = 0.0;
    for (const auto &out : imm)
      best = std::max(best, out.weights[1]);
    EXPECT_GT(best, 0.9) << "seed " << seed;
  }
}

TEST(ImmStep, SimplexAndCombinedVarianceBound) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> coef(-0.3, 0.3), a(0.3, 0.99);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<LinearModel> models;
    const std::size_t m = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
    for (std::size_t j = 0; j < m; ++j)
      models.push_back({a(rng), coef(rng), coef(rng), 1e-3, 1e-2});
    const auto run = noisy_run(models[0], 200, rng());
    for (const auto &out : run_imm(models, run, {.tr_diag = 0.9})) {
      ASSERT_NEAR(sum(out.weights), 1.0, 1e-12);
      double floor_var = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        ASSERT_GE(out.weights[j], 0.0);
        floor_var += out.weights[j] * out.per_model[j].state.p;
      }
      ASSERT_GE(out.combined.p, floor_var - 1e-15);
    }
  }
}

TEST(ImmStep, PermutationEquivariant) {
  const std::vector<LinearModel> models{{0.9, 0.05, 0.05, 1e-3, 1e-2},
                                        {0.6, -0.06, 0.06, 1e-3, 1e-2},
                                        {0.75, 0.02, 0.1, 1e-3, 1e-2}};
  const std::vector<LinearModel> rotated{models[2], models[0], models[1]};
  const auto run = noisy_run(models[1], 200, 5);
  const auto a = run_imm(models, run), b = run_imm(rotated, run);
  for (std::size_t k = 0; k < a.size(); ++k) {
    ASSERT_NEAR(a[k].combined.x, b[k].combined.x, 1e-12);
    ASSERT_NEAR(a[k].combined.p, b[k].combined.p, 1e-12);
    for (std::size_t j = 0; j < 3; ++j)
      ASSERT_NEAR(a[k].weights[j], b[k].weights[(j + 1) % 3], 1e-12);
  }
}

TEST(ImmStep, AllLikelihoodsFlooredCarriesWeights) {
  auto bank = make_bank({LinearModel{0.9, 0, 0, 1e-3, 1e-2}, LinearModel{0.5, 0, 0, 1e-3, 1e-2}},
                        {0.0, 1e-3}, TransitionMatrix::sticky(2, 0.9));
  bank.weights = {0.3, 0.7};
  const auto step = imm_step(bank, {}, 1e6);
  EXPECT_TRUE(step.output.likelihood_underflow);
  // Carried over from the predicted model probabilities c = w Tr.
  EXPECT_NEAR(step.output.weights[0], 0.3 * 0.9 + 0.7 * 0.1, 1e-12);
  EXPECT_NEAR(step.output.weights[1], 0.3 * 0.1 + 0.7 * 0.9, 1e-12);
  const auto prev = imm_step(bank, {}, 1e6, {.weight_prior = WeightPrior::Previous});
  EXPECT_NEAR(prev.output.weights[0], 0.3, 1e-12);
  EXPECT_THROW(imm_step(bank, {}, std::nan("")), ParameterError);
}

TEST(ImmStep, WeightFloorKeepsModelsAlive) {
  auto bank = make_bank({LinearModel{0.9, 0, 0, 1e-3, 1e-2}, LinearModel{-0.9, 0, 0, 1e-3, 1e-2}},
                        {10.0, 1e-3}, TransitionMatrix(2, {1, 0, 0, 1}));
  const auto step = imm_step(bank, {}, 9.0);
  EXPECT_GE(step.output.weights[1], 1e-12 / (1 + 1e-12));
  EXPECT_NEAR(sum(step.output.weights), 1.0, 1e-15);
}

TEST(RunImm, MatchedModelsTrackThreeRegimes) {
  SynthConfig cfg;
  cfg.runs = 3;
  cfg.steps = 900;
  cfg.seed = 12;
  const auto synth = generate(cfg);
  std::vector<LinearModel> models;
  for (const auto &r : cfg.regimes)
    models.push_back({r[0], r[1], r[2], 1e-3, 1e-2});
  std::vector<std::vector<double>> weight_sum(3, std::vector<double>(3, 0.0));
  std::vector<double> count(3, 0.0);
  for (std::size_t run = 0; run < synth.trajectories.size(); ++run) {
    const auto out = run_imm(models, synth.trajectories[run]);
    for (std::size_t k = 0; k < out.size(); ++k) {
      // Regime active on the transition k -> k+1.
      const std::size_t regime = synth.labels[run][k];
      for (std::size_t j = 0; j < 3; ++j)
        weight_sum[regime][j] += out[k].weights[j];
      count[regime] += 1.0;
    }
  }
  for (std::size_t r = 0; r < 3; ++r) {
    ASSERT_GT(count[r], 0.0);
    EXPECT_GT(weight_sum[r][r] / count[r], 1.0 / 3) << "regime " << r;
  }
}

TEST(RunImm, InitialStateModes) {
  const auto run = noisy_run({0.9, 0, 0, 1e-3, 1e-2}, 10, 3);
  EXPECT_EQ(initial_state(run, InitialStateMode::FirstMeasurement, 2.0).x, run.samples[0].x);
  EXPECT_EQ(initial_state(run, InitialStateMode::Zero, 2.0).x, 0.0);
  EXPECT_EQ(initial_state(run, InitialStateMode::Zero, 2.0).p, 2.0);
  EXPECT_THROW(initial_state(run, InitialStateMode::Zero, 0.0), ParameterError);
  EXPECT_THROW(run_imm(std::vector<LinearModel>{}, run), ParameterError);
  EXPECT_EQ(parse_weight_prior(to_string(WeightPrior::Previous)), WeightPrior::Previous);
  EXPECT_THROW(parse_initial_state_mode("middle"), ParameterError);
}
