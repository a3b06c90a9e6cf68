#pragma once

#include <map>
#include <span>
#include <utility>

#include "denserew/shapley_credit.hpp"

namespace denserew::harness {

inline const scar::Token kDefaultPlaceholder = "<pad>";

/// Programmatic sequence scorer: keyword weights, bonuses for pairs of
/// keywords that both occur, and a per-token length penalty. Placeholder
/// tokens count toward the length but carry no weight and join no pair.
struct ToyRewardOracle {
  std::map<scar::Token, double> weights;
  /// Keys are stored with the lexicographically smaller token first.
  std::map<std::pair<scar::Token, scar::Token>, double> bonuses;
  double length_penalty = 0.0;
  scar::Token placeholder = kDefaultPlaceholder;

  void set_bonus(const scar::Token& a, const scar::Token& b, double value);
  double score(std::span<const scar::Token> tokens) const;
  scar::SequenceScorer scorer() const;
};

}  // namespace denserew::harness
