#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "denserew/grid_env.hpp"
#include "denserew/spectral_transfer.hpp"
#include "denserew/state_graph.hpp"

namespace denserew::spectral {

using g4rl::Cell;
using g4rl::GridEnv;

/// Builds a state graph by trying every move from every free cell once, in
/// row-major order. Each free cell becomes a node and each traversable
/// neighbour pair gets weight 2 (one observation per direction).
graph::StateGraph survey_graph(const GridEnv& env, double epsilon_d = 0.05);

/// Left-right mirror of a map, start and goal included.
GridEnv mirrored(const GridEnv& env);

/// Asymmetric 9x9 maze used by the transfer experiment.
std::string_view transfer_maze_map();

struct FlatQConfig {
  std::size_t episodes = 200;
  std::size_t max_steps = 100;
  double learning_rate = 0.5;
  double gamma = 0.95;
  double epsilon = 0.1;

  void validate() const;
};

struct FlatQResult {
  std::vector<bool> success;
  /// Q(cell, move), cell-major.
  std::vector<double> q;

  double state_value(const GridEnv& env, Cell c) const;
};

/// Intrinsic term added to the sparse environment reward on every step,
/// evaluated at the next state's feature.
using IntrinsicFn = std::function<double(Cell next)>;

FlatQResult run_flat_q(const GridEnv& env, const FlatQConfig& cfg, std::uint64_t seed,
                       const IntrinsicFn& intrinsic = {});

/// 1-based index of the first episode at which the trailing `window`-episode
/// success rate reaches `threshold`; success.size() + 1 if it never does.
std::size_t episodes_to_threshold(const std::vector<bool>& success, std::size_t window,
                                  double threshold);

struct TransferConfig {
  /// A short source horizon gives steep value labels.
  FlatQConfig source{500, 100, 0.5, 0.5, 0.1};
  FlatQConfig target{200, 50, 0.5, 0.95, 0.1};
  double beta_transfer = 0.01;
  MatchTolerances tolerances{};
  double epsilon_d = 0.05;
  std::size_t window = 20;
  double threshold = 0.9;

  void validate() const;
};

struct TransferOutcome {
  double spectrum_distance = 0.0;
  bool spectra_match = false;
  MatchResult match;
  std::size_t shaped_episodes = 0;
  std::size_t baseline_episodes = 0;
  std::vector<bool> shaped_success;
  std::vector<bool> baseline_success;
};

/// Learns values in maze 1, labels its survey graph, matches it to maze 2's
/// survey graph and compares shaped (beta_transfer) against unshaped
/// learning in maze 2. Without a match the shaped run gets no intrinsic term.
TransferOutcome run_transfer(const GridEnv& maze1, const GridEnv& maze2, const TransferConfig& cfg,
                             std::uint64_t seed);

/// Header `seed,spectrum_distance,spectra_match,match,shaped_episodes,baseline_episodes`.
void write_transfer_csv_header(std::ostream& out);
void write_transfer_csv_row(std::ostream& out, std::uint64_t seed, const TransferOutcome& o);

}  // namespace denserew::spectral
