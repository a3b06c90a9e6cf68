#include "denserew/policy_invariance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "denserew/error.hpp"
#include "denserew/random.hpp"

namespace denserew::scar {

void TokenMdp::validate() const {
  if (actions.empty()) throw Error(Errc::InvalidMdp, "MDP has no states");
  if (start >= actions.size()) throw Error(Errc::InvalidMdp, "start state out of range");
  for (std::size_t s = 0; s < actions.size(); ++s) {
    if (actions[s].empty()) throw Error(Errc::InvalidMdp, "state " + std::to_string(s) + " has no actions");
    for (const auto& a : actions[s])
      if (a.next != kTerminal && a.next >= actions.size())
        throw Error(Errc::InvalidMdp, "state " + std::to_string(s) + " has a dangling successor");
  }
  // 0 = unvisited, 1 = on the DFS stack, 2 = done.
  std::vector<int> mark(actions.size(), 0);
  auto dfs = [&](auto&& self, std::size_t s) -> void {
    mark[s] = 1;
    for (const auto& a : actions[s]) {
      if (a.next == kTerminal) continue;
      if (mark[a.next] == 1)
        throw Error(Errc::InvalidMdp, "MDP has a cycle through state " + std::to_string(a.next) +
                                          "; undiscounted episodes must terminate");
      if (mark[a.next] == 0) self(self, a.next);
    }
    mark[s] = 2;
  };
  dfs(dfs, start);
}

namespace {

RewardTrace make_trace(const CoalitionGame& game, std::span<const double> kl, double alpha) {
  RewardTrace trace;
  trace.horizon = kl.size();
  trace.unit_end_times.resize(kl.size());
  for (std::size_t t = 0; t < kl.size(); ++t) trace.unit_end_times[t] = t + 1;
  trace.kl_terms.assign(kl.begin(), kl.end());
  trace.terminal_reward = game.raw_value(full_coalition(game.players()));
  trace.alpha = alpha;
  trace.baseline = game.baseline();
  return trace;
}

CoalitionGame token_game(std::span<const Token> tokens, const Token& placeholder,
                         const SequenceScorer& scorer) {
  const Segmentation seg = segment(tokens, TokenLevel{});
  return make_text_game(std::vector<Token>(tokens.begin(), tokens.end()), seg.units, placeholder, scorer);
}

}  // namespace

TrajectoryRewarder scar_rewarder(SequenceScorer scorer, double alpha, Token placeholder) {
  validate_alpha(alpha);
  return [scorer = std::move(scorer), alpha, placeholder = std::move(placeholder)](
             std::span<const Token> tokens, std::span<const double> kl) {
    const auto game = token_game(tokens, placeholder, scorer);
    const auto credits = exact_shapley(game);
    const auto trace = make_trace(game, kl, alpha);
    return total_reward(trace, place_rewards(credits, trace));
  };
}

TrajectoryRewarder leave_one_out_rewarder(SequenceScorer scorer, double alpha, Token placeholder) {
  validate_alpha(alpha);
  return [scorer = std::move(scorer), alpha, placeholder = std::move(placeholder)](
             std::span<const Token> tokens, std::span<const double> kl) {
    const auto game = token_game(tokens, placeholder, scorer);
    const std::size_t n = game.players();
    const Coalition all = full_coalition(n);
    std::vector<double> loo(n);
    for (std::size_t i = 0; i < n; ++i) loo[i] = game.value(all) - game.value(all & ~(Coalition{1} << i));
    const auto trace = make_trace(game, kl, alpha);
    return total_reward(trace, place_rewards(CreditVector::from(std::move(loo)), trace));
  };
}

OptimalActions optimal_actions(const TokenMdp& mdp, const TrajectoryRewarder& rewarder,
                               double tie_tolerance) {
  mdp.validate();
  OptimalActions out;
  History history;
  std::vector<Token> tokens;
  std::vector<double> kl;

  auto solve = [&](auto&& self, std::size_t s) -> double {
    const auto& acts = mdp.actions[s];
    std::vector<double> q(acts.size());
    for (std::size_t a = 0; a < acts.size(); ++a) {
      history.push_back(a);
      tokens.push_back(acts[a].token);
      kl.push_back(acts[a].kl);
      if (acts[a].next == kTerminal) {
        double ret = 0.0;
        for (double r : rewarder(tokens, kl)) ret += r;
        q[a] = ret;
      } else {
        q[a] = self(self, acts[a].next);
      }
      history.pop_back();
      tokens.pop_back();
      kl.pop_back();
    }
    const double best = *std::max_element(q.begin(), q.end());
    auto& set = out[history];
    for (std::size_t a = 0; a < q.size(); ++a)
      if (q[a] >= best - tie_tolerance) set.push_back(a);
    return best;
  };
  solve(solve, mdp.start);
  return out;
}

bool same_optimal_actions(const TokenMdp& mdp, std::span<const TrajectoryRewarder> rewarders,
                          double tie_tolerance) {
  if (rewarders.empty()) return true;
  const auto reference = optimal_actions(mdp, rewarders.front(), tie_tolerance);
  for (std::size_t i = 1; i < rewarders.size(); ++i)
    if (optimal_actions(mdp, rewarders[i], tie_tolerance) != reference) return false;
  return true;
}

bool verify_policy_invariance(const TokenMdp& mdp, const SequenceScorer& scorer,
                              std::span<const double> alphas, const Token& placeholder,
                              double tie_tolerance) {
  std::vector<TrajectoryRewarder> rewarders{scar_rewarder(scorer, 0.0, placeholder)};
  for (double a : alphas) rewarders.push_back(scar_rewarder(scorer, a, placeholder));
  return same_optimal_actions(mdp, rewarders, tie_tolerance);
}

TokenMdp random_token_mdp(std::uint64_t seed, std::span<const Token> vocabulary, std::size_t states,
                          std::size_t actions_per_state, double kl_scale) {
  if (vocabulary.empty()) throw Error(Errc::InvalidArgument, "vocabulary must not be empty");
  if (states == 0 || actions_per_state == 0)
    throw Error(Errc::InvalidArgument, "need at least one state and one action per state");
  Rng rng(seed);
  TokenMdp mdp;
  mdp.actions.resize(states);
  for (std::size_t s = 0; s < states; ++s) {
    for (std::size_t a = 0; a < actions_per_state; ++a) {
      TokenMdp::Action act;
      act.token = vocabulary[uniform_index(rng, vocabulary.size())];
      act.kl = -kl_scale * uniform01(rng);
      // Later states or termination; the terminal option gets one extra slot.
      const std::size_t later = states - 1 - s;
      const std::size_t pick = uniform_index(rng, later + 1);
      act.next = pick == later ? kTerminal : s + 1 + pick;
      mdp.actions[s].push_back(std::move(act));
    }
  }
  return mdp;
}

}  // namespace denserew::scar
