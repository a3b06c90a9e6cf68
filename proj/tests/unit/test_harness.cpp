#include <gtest/gtest.h>

#include <sstream>
#include <vector>

#include "denserew/error.hpp"
#include "denserew/harness/config.hpp"
#include "denserew/harness/game_dump.hpp"
#include "denserew/harness/svg_plot.hpp"
#include "denserew/harness/toy_oracle.hpp"

using namespace denserew;
using namespace denserew::harness;

TEST(ToyOracle, WeightsBonusesAndPenalty) {
  ToyRewardOracle o;
  o.weights = {{"good", 1.0}, {"bad", -0.5}};
  o.set_bonus("great", "good", 0.75);
  o.length_penalty = 0.25;
  // 1.0 + (-0.5) + 0.75 (both of the pair present, counted once) - 4 * 0.25.
  const std::vector<scar::Token> t{"good", "bad", "great", "good"};
  EXPECT_DOUBLE_EQ(o.score(t), 1.0 + 1.0 - 0.5 + 0.75 - 1.0);
  const std::vector<scar::Token> pad{"good", "<pad>", "<pad>"};
  EXPECT_DOUBLE_EQ(o.score(pad), 1.0 - 0.75);

  ToyRewardOracle self;
  self.set_bonus("x", "x", 2.0);
  EXPECT_EQ(self.score(std::vector<scar::Token>{"x"}), 0.0);
  EXPECT_EQ(self.score(std::vector<scar::Token>{"x", "x"}), 2.0);
}

TEST(ToyOracle, OneAndAHalfExample) {
  ToyRewardOracle o;
  o.weights = {{"a", 1.0}, {"b", 0.5}};
  const std::vector<scar::Token> t{"a", "b", "c"};
  EXPECT_DOUBLE_EQ(o.score(t), 1.5);
}

TEST(Config, SectionsCommentsAndGetters) {
  const auto c = Config::parse(
      "# top\nseeds = 1..3\n[g4rl]\nalpha_h = 0.25 ; inline\nepisodes=500\n"
      "relabel = false\n[scar]\nalphas = 0, 0.5, 1\nname = demo\n");
  EXPECT_EQ(c.get_string("seeds", ""), "1..3");
  EXPECT_EQ(c.get_double("g4rl.alpha_h", 0.0), 0.25);
  EXPECT_EQ(c.get_uint("g4rl.episodes", 0), 500u);
  EXPECT_FALSE(c.get_bool("g4rl.relabel", true));
  EXPECT_EQ(c.get_doubles("scar.alphas", {}), (std::vector<double>{0, 0.5, 1}));
  EXPECT_EQ(c.get_int("missing", -4), -4);
  EXPECT_NO_THROW(c.require_known({"seeds", "g4rl.alpha_h", "g4rl.episodes", "g4rl.relabel",
                                   "scar.alphas", "scar.name"}));
  EXPECT_THROW(c.require_known({"seeds"}), Error);
  EXPECT_THROW(c.get_double("scar.name", 0.0), Error);
  EXPECT_THROW(Config::parse("no equals sign here\n"), Error);
}

TEST(Config, SeedLists) {
  EXPECT_EQ(parse_seed_list("3"), (std::vector<std::uint64_t>{0, 1, 2}));
  EXPECT_EQ(parse_seed_list("7..7"), (std::vector<std::uint64_t>{7}));
  EXPECT_THROW(parse_seed_list("0"), Error);
  EXPECT_EQ(parse_seed_list("1..4,9"), (std::vector<std::uint64_t>{1, 2, 3, 4, 9}));
  EXPECT_THROW(parse_seed_list("5..2"), Error);
  EXPECT_THROW(parse_seed_list("x"), Error);
}

TEST(GameDump, ParseEvaluateAndWrite) {
  const auto d = GameDump::parse(R"({
    "units": [["the", "cat"], ["sat", "."]],
    "placeholder": "_",
    "oracle": {"weights": {"cat": 2.0, "sat": 1.0}, "bonuses": [["cat", "sat", 0.5]], "length_penalty": 0.0},
    "evaluations": {"1": 2.25}
  })");
  EXPECT_EQ(d.tokens(), (std::vector<scar::Token>{"the", "cat", "sat", "."}));
  EXPECT_EQ(d.unit_ranges(), (std::vector<scar::Unit>{{0, 2}, {2, 4}}));
  const auto g = d.game();
  EXPECT_EQ(g.value(1), 2.25);  // recorded evaluation wins over the oracle's 2.0
  EXPECT_EQ(g.value(3), 3.5);
  const auto sv = scar::exact_shapley(g);
  EXPECT_NEAR(sv.total, 3.5, 1e-12);

  std::ostringstream out;
  d.write(out, &g);
  const auto back = GameDump::parse(out.str());
  EXPECT_EQ(back.units, d.units);
  EXPECT_EQ(back.evaluations.at(3), 3.5);

  const auto bare = GameDump::parse(R"({"units": [["a"], ["b"]], "evaluations": {"0": 0, "1": 1}})");
  EXPECT_THROW(bare.game().value(3), Error);
  EXPECT_THROW(GameDump::parse("{"), Error);
}

TEST(SvgPlot, MovingAverageAndOutput) {
  EXPECT_EQ(moving_average({1, 3, 5, 7}, 2), (std::vector<double>{1, 2, 4, 6}));
  std::ostringstream out;
  write_svg_plot(out, "t", "x", "y", {{"a", {0, 1, 0.5}}});
  EXPECT_NE(out.str().find("<svg"), std::string::npos);
  EXPECT_NE(out.str().find("</svg>"), std::string::npos);
}
