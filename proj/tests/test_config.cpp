#include "gmmimm/config.hpp"
#include "gmmimm/errors.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace gmmimm;

TEST(Config, ParsesKeysAndComments) {
  const auto c = parse_config("# experiment\n"
                              "window = 30\n"
                              "  components = 3, 9 ,18  # trailing comment\n"
                              "\n"
                              "tr_diag=0.9\n"
                              "unseen = run_009,run_010\n"
                              "weight_prior = previous\n"
                              "synth_regimes = 0.9,0,0; 0.5, 0.1, -0.1\n");
  EXPECT_EQ(c.window, 30u);
  EXPECT_EQ(c.components, (std::vector<std::size_t>{3, 9, 18}));
  EXPECT_EQ(c.tr_diag, 0.9);
  EXPECT_EQ(c.unseen, (std::vector<std::string>{"run_009", "run_010"}));
  EXPECT_EQ(c.weight_prior, WeightPrior::Previous);
  ASSERT_EQ(c.synth.regimes.size(), 2u);
  EXPECT_EQ(c.synth.regimes[1], (Point3{0.5, 0.1, -0.1}));
  EXPECT_EQ(c.stride, 1u);
}

TEST(Config, ErrorsAreParameterErrors) {
  EXPECT_THROW(parse_config("windw = 3\n"), ParameterError);
  EXPECT_THROW(parse_config("window 3\n"), ParameterError);
  EXPECT_THROW(parse_config("window = -3\n"), ParameterError);
  EXPECT_THROW(parse_config("tol = abc\n"), ParameterError);
  EXPECT_THROW(parse_config("synth_regimes = 0.9, 0\n"), ParameterError);
  EXPECT_THROW(load_config("/nonexistent/gmmimm.cfg"), ParameterError);
}

TEST(Config, ValidateRejectsBadValues) {
  PipelineConfig c;
  EXPECT_NO_THROW(c.validate());
  c.window = 2;
  EXPECT_THROW(c.validate(), ParameterError);
  c = {};
  c.tail = 0.5;
  EXPECT_THROW(c.validate(), ParameterError);
  c = {};
  c.seen = {"a"};
  c.unseen = {"a"};
  EXPECT_THROW(c.validate(), ParameterError);
  c = {};
  c.components = {3};
  c.tr_matrix = {1, 0, 0, 1};
  EXPECT_THROW(c.validate(), ParameterError);
}

TEST(Config, TextRoundTrip) {
  auto c = parse_config("components = 2,5\ntr_matrix = 0.9,0.1;0.2,0.8\nseed = 7\ntol = 1e-9\n"
                        "init_mode = random\nx0_mode = zero\nsynth_dwell_mode = fixed\nworkers = 3\n");
  c.components = {2};
  const auto text = config_to_text(c);
  const auto back = parse_config(text);
  EXPECT_EQ(config_to_text(back), text);
  EXPECT_EQ(back.tr_matrix, c.tr_matrix);
  EXPECT_EQ(back.tol, 1e-9);
  EXPECT_EQ(back.init_mode, InitMode::Random);
  for (auto key : config_keys())
    EXPECT_NE(text.find(std::string(key) + " ="), std::string::npos) << key;
}

TEST(Config, LoadFromFile) {
  gmmimm::testing::TempDir dir("cfg");
  std::ofstream(dir.path() / "a.cfg") << "stride = 4\n";
  EXPECT_EQ(load_config(dir.path() / "a.cfg").stride, 4u);
}
