#include "gmmimm/errors.hpp"
#include "gmmimm/io.hpp"
#include "gmmimm/trajectory.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>

using namespace gmmimm;
using gmmimm::testing::TempDir;

namespace {

void write(const std::filesystem::path &p, const std::string &text) {
  std::ofstream(p) << text;
}

std::string rows_csv(std::size_t rows) {
  std::string s = "time_s,omega_radps,wheel_left_radps,wheel_right_radps\n";
  for (std::size_t i = 0; i < rows; ++i)
    s += std::to_string(0.1 * i) + "," + std::to_string(0.01 * i) + ",1,2\n";
  return s;
}

Trajectory counted(std::size_t n) {
  Trajectory t;
  t.run_id = "r";
  t.dt = 0.1;
  for (std::size_t i = 0; i < n; ++i)
    t.samples.push_back({double(i), {0, 0}, double(i + 1)});
  return t;
}

} // namespace

TEST(LoadTrajectory, TwoZeroRowsGiveOneZeroSample) {
  TempDir dir("traj");
  write(dir.path() / "a.csv",
        "time_s,omega_radps,wheel_left_radps,wheel_right_radps\n0.0,0.0,0,0\n0.1,0.0,0,0\n");
  const auto runs = load_trajectories(dir.path() / "a.csv");
  ASSERT_EQ(runs.size(), 1u);
  EXPECT_EQ(runs[0].run_id, "a");
  ASSERT_EQ(runs[0].samples.size(), 1u);
  EXPECT_EQ(runs[0].samples[0].x, 0.0);
  EXPECT_EQ(runs[0].samples[0].x_next, 0.0);
  EXPECT_NEAR(runs[0].dt, 0.1, 1e-15);
}

TEST(LoadTrajectory, RowCountMinusOneSamples) {
  TempDir dir("traj");
  write(dir.path() / "a.csv", rows_csv(301));
  EXPECT_EQ(load_trajectory_csv(dir.path() / "a.csv").samples.size(), 300u);
}

TEST(LoadTrajectory, TransitionsChainRows) {
  TempDir dir("traj");
  write(dir.path() / "a.csv", "wheel_right_radps, time_s, omega_radps, wheel_left_radps\n"
                              "2, 0, 1.5, -1\n4, 1, 2.5, -3\n6, 2, 3.5, -5\n");
  const auto t = load_trajectory_csv(dir.path() / "a.csv");
  ASSERT_EQ(t.samples.size(), 2u);
  EXPECT_EQ(t.samples[0], (TrajectorySample{1.5, {-1, 2}, 2.5}));
  EXPECT_EQ(t.samples[1], (TrajectorySample{2.5, {-3, 4}, 3.5}));
}

TEST(LoadTrajectory, DirectoryOfNineRunsOrderedByName) {
  TempDir dir("traj");
  for (int i = 8; i >= 0; --i)
    write(dir.path() / ("run_" + std::to_string(i) + ".csv"), rows_csv(10));
  std::filesystem::create_directories(dir.path() / "labels");
  write(dir.path() / "labels" / "run_0.csv", "time_s,regime_index\n0,1\n");
  write(dir.path() / "manifest.txt", "run_0.csv\n");
  const auto runs = load_trajectories(dir.path());
  ASSERT_EQ(runs.size(), 9u);
  for (int i = 0; i < 9; ++i)
    EXPECT_EQ(runs[i].run_id, "run_" + std::to_string(i));
}

TEST(LoadTrajectory, ErrorsNameFileAndRow) {
  TempDir dir("traj");
  struct Case {
    std::string text;
    std::string needle;
  };
  const std::string hdr = "time_s,omega_radps,wheel_left_radps,wheel_right_radps\n";
  const std::vector<Case> cases = {
      {"time_s,omega_radps,wheel_left_radps\n0,0,0\n1,0,0\n", "wheel_right_radps"},
      {hdr + "0,0,0,0\n0.1,abc,0,0\n", ":3:"},
      {hdr + "0,0,0,0\n", "at least 2"},
      {hdr + "0,0,0,0\n0.2,0,0,0\n0.1,0,0,0\n", ":4:"},
      {hdr + "0,0,0,0\n0.1,nan,0,0\n", "non-finite"},
      {hdr + "0,0,0,0\n0.1,0,0\n", "missing value"},
      {"", "empty"},
  };
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto file = dir.path() / ("bad" + std::to_string(i) + ".csv");
    write(file, cases[i].text);
    try {
      load_trajectory_csv(file);
      ADD_FAILURE() << "case " << i << " did not throw";
    } catch (const DataError &e) {
      const std::string what = e.what();
      EXPECT_NE(what.find(file.string()), std::string::npos) << what;
      EXPECT_NE(what.find(cases[i].needle), std::string::npos) << what;
    }
  }
  EXPECT_THROW(load_trajectories(dir.path() / "missing"), DataError);
}

TEST(Trajectory, ChainValidation) {
  Trajectory t = counted(4);
  EXPECT_NO_THROW(t.validate());
  t.samples[1].x_next += 1e-10;
  EXPECT_THROW(t.validate(), ParameterError);
  EXPECT_NO_THROW(t.validate(1e-9));
  t.dt = 0.0;
  EXPECT_THROW(t.validate(1e-9), ParameterError);
}

TEST(SlidingWindows, Counts) {
  EXPECT_EQ(sliding_windows(counted(25), 25, 1).size(), 1u);
  EXPECT_EQ(sliding_windows(counted(100), 25, 1).size(), 76u);
  EXPECT_TRUE(sliding_windows(counted(10), 25, 1).empty());
  EXPECT_EQ(sliding_windows(counted(100), 25, 5).size(), 16u);
  EXPECT_THROW(sliding_windows(counted(10), 2, 1), ParameterError);
  EXPECT_THROW(sliding_windows(counted(10), 3, 0), ParameterError);
}

TEST(SlidingWindows, NineRunCorpusGivesThreeThousandWindows) {
  // 8 runs of 357 samples and one of 360: sum(N - 24) = 8 * 333 + 336 = 3000.
  std::size_t total = 0;
  for (int i = 0; i < 9; ++i)
    total += sliding_windows(counted(i < 8 ? 357 : 360), 25, 1).size();
  EXPECT_EQ(total, 3000u);
}

TEST(SlidingWindows, CoverageProperty) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 80)(rng);
    const std::size_t w = std::uniform_int_distribution<std::size_t>(3, 30)(rng);
    const std::size_t stride = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
    const auto traj = counted(n);
    const auto windows = sliding_windows(traj, w, stride);
    std::vector<int> starts(n, 0);
    for (std::size_t i = 0; i < windows.size(); ++i) {
      ASSERT_EQ(windows[i].samples.size(), w);
      EXPECT_EQ(windows[i].start_index, i * stride);
      EXPECT_EQ(windows[i].samples.front().x, double(windows[i].start_index));
      ++starts[windows[i].start_index];
    }
    if (stride == 1)
      for (std::size_t k = 0; k < n; ++k)
        EXPECT_EQ(starts[k], k + w <= n ? 1 : 0);
  }
}

TEST(TrajectoryCsv, RoundTripIsBitExact) {
  TempDir dir("traj");
  std::mt19937_64 rng(3);
  std::normal_distribution<double> value(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    Trajectory t;
    t.run_id = "rt" + std::to_string(trial);
    t.dt = 0.05;
    double x = value(rng);
    for (int k = 0; k < 40; ++k) {
      const double next = value(rng);
      t.samples.push_back({x, {value(rng), value(rng)}, next});
      x = next;
    }
    const auto file = dir.path() / (t.run_id + ".csv");
    io::write_file_atomic(file, trajectory_to_csv(t));
    const auto back = load_trajectory_csv(file);
    EXPECT_EQ(back.run_id, t.run_id);
    EXPECT_EQ(back.samples, t.samples);
  }
}
