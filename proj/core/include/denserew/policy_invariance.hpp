#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "denserew/shapley_credit.hpp"

namespace denserew::scar {

inline constexpr std::size_t kTerminal = std::numeric_limits<std::size_t>::max();

/// Deterministic token-emitting MDP. Taking action a in state s emits a
/// token, incurs a per-step KL term, and moves to actions[s][a].next
/// (kTerminal ends the episode). The sequence-level reward is only known
/// once the episode ends.
struct TokenMdp {
  struct Action {
    std::size_t next = kTerminal;
    Token token;
    double kl = 0.0;
  };

  std::size_t start = 0;
  std::vector<std::vector<Action>> actions;

  /// Throws InvalidMDP on dangling successors, action-less states or cycles
  /// (an undiscounted episode has to end).
  void validate() const;
};

/// Per-step rewards R_1..R_T for one finished trajectory.
using TrajectoryRewarder =
    std::function<std::vector<double>(std::span<const Token> tokens, std::span<const double> kl)>;

/// R_t(alpha) with token-level exact Shapley credits of the baseline-
/// subtracted placeholder game under `scorer`.
TrajectoryRewarder scar_rewarder(SequenceScorer scorer, double alpha, Token placeholder);

/// Leave-one-out credits v(N) - v(N \ {i}) placed like Shapley credits.
/// They generally do not sum to v(N); used as a negative control.
TrajectoryRewarder leave_one_out_rewarder(SequenceScorer scorer, double alpha, Token placeholder);

/// Histories are action-index sequences from the start state. Rewards may
/// depend on the whole trajectory, so optimal actions are computed per
/// history by backward induction over complete (undiscounted) returns.
using History = std::vector<std::size_t>;
using OptimalActions = std::map<History, std::vector<std::size_t>>;

OptimalActions optimal_actions(const TokenMdp& mdp, const TrajectoryRewarder& rewarder,
                               double tie_tolerance = 1e-9);

/// True iff every rewarder induces the same optimal-action sets.
bool same_optimal_actions(const TokenMdp& mdp, std::span<const TrajectoryRewarder> rewarders,
                          double tie_tolerance = 1e-9);

/// Compares the original sparse reward (alpha = 0) against R_t(alpha) for
/// every alpha given.
bool verify_policy_invariance(const TokenMdp& mdp, const SequenceScorer& scorer,
                              std::span<const double> alphas, const Token& placeholder,
                              double tie_tolerance = 1e-9);

/// Layered random MDP: state i has `actions_per_state` actions leading to a
/// later state or to termination; the last state always terminates.
/// Tokens are drawn from `vocabulary`, KL terms from [-kl_scale, 0].
TokenMdp random_token_mdp(std::uint64_t seed, std::span<const Token> vocabulary,
                          std::size_t states = 6, std::size_t actions_per_state = 2,
                          double kl_scale = 0.05);

}  // namespace denserew::scar
