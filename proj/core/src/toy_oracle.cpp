#include "denserew/harness/toy_oracle.hpp"

#include <unordered_map>

namespace denserew::harness {

void ToyRewardOracle::set_bonus(const scar::Token& a, const scar::Token& b, double value) {
  bonuses[a < b ? std::pair{a, b} : std::pair{b, a}] = value;
}

double ToyRewardOracle::score(std::span<const scar::Token> tokens) const {
  std::unordered_map<scar::Token, int> count;
  double s = 0.0;
  for (const auto& tok : tokens) {
    if (tok == placeholder) continue;
    ++count[tok];
    if (auto it = weights.find(tok); it != weights.end()) s += it->second;
  }
  // Iterate the ordered map so the summation order never depends on hashing.
  for (const auto& [pair, bonus] : bonuses) {
    const auto a = count.find(pair.first);
    if (a == count.end()) continue;
    if (pair.first == pair.second) {
      if (a->second >= 2) s += bonus;
    } else if (count.contains(pair.second)) {
      s += bonus;
    }
  }
  return s - length_penalty * static_cast<double>(tokens.size());
}

scar::SequenceScorer ToyRewardOracle::scorer() const {
  return [oracle = *this](std::span<const scar::Token> tokens) { return oracle.score(tokens); };
}

}  // namespace denserew::harness
