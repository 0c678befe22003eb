#include "gmmimm/errors.hpp"
#include "gmmimm/synth.hpp"
#include "gmmimm/sysid.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace gmmimm;

TEST(Synth, ZeroCaseIsAllZero) {
  SynthConfig c;
  c.regimes = {{0.9, 0.05, 0.05}};
  c.process_noise_std = 0.0;
  c.measurement_noise_std = 0.0;
  c.input.low = c.input.high = 0.0;
  c.runs = 2;
  c.steps = 50;
  const auto out = generate(c);
  ASSERT_EQ(out.trajectories.size(), 2u);
  for (const auto &t : out.trajectories) {
    ASSERT_EQ(t.samples.size(), 50u);
    for (const auto &s : t.samples)
      EXPECT_EQ(s, (TrajectorySample{0.0, {0.0, 0.0}, 0.0}));
  }
}

TEST(Synth, NoiselessSingleRegimeIsExactlyIdentifiable) {
  SynthConfig c;
  c.regimes = {{0.8, -0.1, 0.15}};
  c.process_noise_std = 0.0;
  c.measurement_noise_std = 0.0;
  c.runs = 1;
  c.steps = 100;
  const auto t = generate(c).trajectories[0];
  EXPECT_NO_THROW(t.validate());
  const auto fit = fit_linear(t.samples);
  EXPECT_NEAR(fit.coefficients[0], 0.8, 1e-9);
  EXPECT_NEAR(fit.coefficients[1], -0.1, 1e-9);
  EXPECT_NEAR(fit.coefficients[2], 0.15, 1e-9);
}

TEST(Synth, WindowsInsideOneRegimeRecoverIt) {
  SynthConfig c;
  c.process_noise_std = 0.0;
  c.measurement_noise_std = 0.0;
  c.dwell_mode = DwellMode::Fixed;
  c.dwell = 60;
  c.runs = 2;
  c.steps = 400;
  const auto out = generate(c);
  std::size_t checked = 0;
  for (std::size_t r = 0; r < out.trajectories.size(); ++r) {
    const auto &labels = out.labels[r];
    for (const auto &w : sliding_windows(out.trajectories[r], 25, 5)) {
      const std::size_t regime = labels[w.start_index];
      bool pure = true;
      for (std::size_t k = w.start_index; k < w.start_index + 25; ++k)
        pure = pure && labels[k] == regime;
      if (!pure)
        continue;
      const auto fit = fit_linear(w.samples);
      for (int i = 0; i < 3; ++i)
        EXPECT_NEAR(fit.coefficients[i], c.regimes[regime][i], 1e-9);
      ++checked;
    }
  }
  EXPECT_GT(checked, 50u);
}

TEST(Synth, NineRunWindowCount) {
  const SynthConfig c; // 9 runs of 358 transitions
  const auto out = generate(c);
  ASSERT_EQ(out.trajectories.size(), 9u);
  std::size_t windows = 0;
  for (const auto &t : out.trajectories)
    windows += sliding_windows(t, 25, 1).size();
  EXPECT_EQ(windows, 3006u);
  for (const auto &l : out.labels)
    EXPECT_EQ(l.size(), 359u);
}

TEST(Synth, DeterministicAndSeedSensitive) {
  SynthConfig c;
  c.runs = 3;
  const auto a = generate(c), b = generate(c);
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_EQ(a.trajectories[r].samples, b.trajectories[r].samples);
    EXPECT_EQ(a.labels[r], b.labels[r]);
  }
  c.seed = 2;
  EXPECT_NE(generate(c).trajectories[0].samples, a.trajectories[0].samples);
  EXPECT_EQ(a.trajectories[1].run_id, "run_001");
}

TEST(Synth, VisitsEveryRegime) {
  const auto out = generate(SynthConfig{});
  std::set<std::size_t> seen;
  for (const auto &l : out.labels)
    seen.insert(l.begin(), l.end());
  EXPECT_EQ(seen, (std::set<std::size_t>{0, 1, 2}));
}

TEST(Synth, Validation) {
  SynthConfig c;
  c.regimes = {{1.2, 0, 0}};
  EXPECT_THROW(generate(c), ParameterError);
  c = {};
  c.dwell = 2;
  EXPECT_THROW(generate(c), ParameterError);
  c = {};
  c.regimes.clear();
  EXPECT_THROW(generate(c), ParameterError);
  EXPECT_THROW(parse_dwell_mode("poisson"), ParameterError);
}

TEST(Synth, LabelsCsv) {
  EXPECT_EQ(labels_to_csv({0, 2, 1}, 0.5), "time_s,regime_index\n0,0\n0.5,2\n1,1\n");
}
