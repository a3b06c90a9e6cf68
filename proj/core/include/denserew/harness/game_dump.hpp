#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "denserew/harness/toy_oracle.hpp"
#include "denserew/shapley_credit.hpp"

namespace denserew::harness {

/// Offline record of a credit game:
///
///   {"units": [["tok", ...], ...], "placeholder": "<pad>",
///    "oracle": {"weights": {...}, "bonuses": [["a", "b", 0.5], ...], "length_penalty": 0.0},
///    "evaluations": {"5": 1.25, ...}}
///
/// Evaluation keys are decimal coalition bitmasks over the units and values
/// are raw (not baseline-subtracted) scores. "oracle" is optional; without
/// it every coalition the credit method asks about must be listed.
struct GameDump {
  std::vector<std::vector<scar::Token>> units;
  scar::Token placeholder = kDefaultPlaceholder;
  std::optional<ToyRewardOracle> oracle;
  std::map<scar::Coalition, double> evaluations;

  std::vector<scar::Token> tokens() const;
  std::vector<scar::Unit> unit_ranges() const;

  /// Game whose worth prefers recorded evaluations and falls back to the
  /// oracle; a coalition with neither raises ParseError.
  scar::CoalitionGame game() const;

  static GameDump parse(const std::string& json_text);
  static GameDump load_file(const std::string& path);
  /// Writes the dump, with `evaluations` replaced by those of `game` when given.
  void write(std::ostream& out, const scar::CoalitionGame* game = nullptr) const;
};

}  // namespace denserew::harness
