#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "denserew/error.hpp"
#include "denserew/policy_invariance.hpp"

using namespace denserew;
using namespace denserew::scar;

namespace {

// States 0..4. "a" advances, "q" quits; only the last state can emit "goal".
TokenMdp chain() {
  TokenMdp m;
  m.actions.resize(5);
  for (std::size_t s = 0; s < 4; ++s) m.actions[s] = {{s + 1, "a", -0.01}, {kTerminal, "q", 0.0}};
  m.actions[4] = {{kTerminal, "goal", -0.01}, {kTerminal, "q", 0.0}};
  return m;
}

double goal_scorer(std::span<const Token> t) {
  return std::find(t.begin(), t.end(), "goal") != t.end() ? 1.0 : 0.0;
}

}  // namespace

TEST(PolicyInvariance, ChainOptimalActionsByHand) {
  const auto opt = optimal_actions(chain(), scar_rewarder(goal_scorer, 0.0, "_"));
  // Advancing all the way returns 1 - 0.05; quitting anywhere returns at most 0.
  for (std::size_t depth = 0; depth < 5; ++depth) {
    const History h(depth, 0);
    ASSERT_TRUE(opt.count(h));
    EXPECT_EQ(opt.at(h), std::vector<std::size_t>{0}) << depth;
  }
}

TEST(PolicyInvariance, ChainAcrossAlphas) {
  const std::vector<double> alphas{0.0, 0.5, 1.0};
  EXPECT_TRUE(verify_policy_invariance(chain(), goal_scorer, alphas, "_"));
  const std::vector<double> zero{0.0};
  EXPECT_TRUE(verify_policy_invariance(chain(), goal_scorer, zero, "_"));
}

TEST(PolicyInvariance, DenseRewardsSumToSparseReturn) {
  const std::vector<Token> toks{"a", "a", "goal"};
  const std::vector<double> kl{-0.1, -0.2, 0.0};
  for (double a : {0.0, 0.25, 1.0}) {
    const auto r = scar_rewarder(goal_scorer, a, "_")(toks, kl);
    double s = 0.0;
    for (std::size_t t = 0; t < r.size(); ++t) s += r[t] - kl[t];
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(PolicyInvariance, Guards) {
  auto cyc = chain();
  cyc.actions[3][0].next = 1;
  try {
    cyc.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidMdp);
  }
  auto dangling = chain();
  dangling.actions[2][1].next = 9;
  EXPECT_THROW(dangling.validate(), Error);
  EXPECT_THROW(scar_rewarder(goal_scorer, -0.1, "_"), Error);
}

TEST(PolicyInvariance, RandomMdpIsLayeredAndDeterministic) {
  const std::vector<Token> vocab{"x", "y", "z"};
  const auto m = random_token_mdp(5, vocab);
  EXPECT_NO_THROW(m.validate());
  ASSERT_EQ(m.actions.size(), 6u);
  for (const auto& a : m.actions.back()) EXPECT_EQ(a.next, kTerminal);
  for (std::size_t s = 0; s < 6; ++s)
    for (const auto& a : m.actions[s]) {
      EXPECT_TRUE(a.next == kTerminal || a.next > s);
      EXPECT_LE(a.kl, 0.0);
    }
  const auto again = random_token_mdp(5, vocab);
  for (std::size_t s = 0; s < 6; ++s)
    for (std::size_t k = 0; k < 2; ++k) {
      EXPECT_EQ(m.actions[s][k].next, again.actions[s][k].next);
      EXPECT_EQ(m.actions[s][k].token, again.actions[s][k].token);
    }
}
