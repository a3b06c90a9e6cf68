#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "denserew/gchrl_shaping.hpp"
#include "denserew/grid_env.hpp"
#include "denserew/harness/config.hpp"
#include "denserew/transfer_experiment.hpp"
#include "settings.hpp"

namespace denserew::cli {

/// Validated inputs of a batch of hierarchical runs (config section [g4rl]).
struct G4rlPlan {
  explicit G4rlPlan(g4rl::GridEnv e) : env(std::move(e)) {}

  g4rl::GridEnv env;
  g4rl::ShapingConfig shaping;
  g4rl::AgentConfig agent;
  std::vector<g4rl::Variant> variants;
  std::size_t episodes = 500;
  std::size_t window = 50;
  std::vector<std::uint64_t> seeds;
};

void bind_g4rl_options(CLI::App* app, Settings& settings);
G4rlPlan make_g4rl_plan(const harness::Config& cfg);

/// Validated inputs of the maze-to-maze transfer runs (config section [transfer]).
struct TransferPlan {
  TransferPlan(g4rl::GridEnv a, g4rl::GridEnv b) : maze1(std::move(a)), maze2(std::move(b)) {}

  g4rl::GridEnv maze1;
  g4rl::GridEnv maze2;
  spectral::TransferConfig config;
  std::vector<std::uint64_t> seeds;
};

void bind_transfer_options(CLI::App* app, Settings& settings);
TransferPlan make_transfer_plan(const harness::Config& cfg);

/// Parsed seed list, sorted and without repeats.
std::vector<std::uint64_t> sorted_seeds(const std::string& text);

/// Throws InvalidEnv when the goal cannot be reached.
void require_reachable(const g4rl::GridEnv& env, const std::string& what);

}  // namespace denserew::cli
