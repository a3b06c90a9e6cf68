#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "denserew/graph_autoencoder.hpp"
#include "denserew/grid_env.hpp"
#include "denserew/random.hpp"
#include "denserew/state_graph.hpp"

namespace denserew::g4rl {

/// r_ext + alpha_h * D(E(phi_s), E(g)).
double high_level_reward(double r_ext, std::span<const double> phi_s, std::span<const double> g,
                         const graph::EncoderParams& params, double alpha_h);

/// -||phi_next - g||^2 + alpha_l * D(E(phi_next), E(g)).
double low_level_reward(std::span<const double> phi_next, std::span<const double> g,
                        const graph::EncoderParams& params, double alpha_l);

struct ShapingConfig {
  double alpha_h = 0.1;
  double alpha_l = 0.3;
  /// Subgoal horizon: the high level picks a new subgoal every K steps.
  std::size_t K = 5;
  /// Encoder training tolerance, forwarded to StateGraph::should_train_and_reset.
  double beta = 1.0;

  void validate() const;
};

enum class Variant { Both, HighOnly, LowOnly, Vanilla };
std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);

/// Everything about the desk-scale agent and its graph that is not a
/// shaping coefficient.
struct AgentConfig {
  std::size_t max_steps = 40;
  double gamma = 0.99;
  double low_learning_rate = 0.1;
  double high_learning_rate = 0.1;
  double epsilon_start = 0.1;
  double epsilon_end = 0.01;
  /// Separate exploration schedule for subgoal selection.
  double high_epsilon_start = 0.3;
  double high_epsilon_end = 0.01;
  /// Initial high-level value of every (state, subgoal) pair. 1 is the
  /// largest sparse return, so untried subgoals look at least as good as
  /// any tried one.
  double high_initial_value = 1.0;
  /// Also update the low-level table for every other candidate subgoal on
  /// each transition.
  bool relabel_subgoals = true;

  std::size_t graph_capacity = 64;
  double epsilon_d = 0.05;
  graph::EvictionPolicy eviction = graph::EvictionPolicy::Oldest;
  std::uint64_t sample_interval = 1;

  std::vector<std::size_t> hidden_layers{64, 64};
  /// 0 means "same as the feature dimension".
  std::size_t embedding_dim = 0;
  graph::TrainConfig train{};

  void validate() const;
};

struct EpisodeMetrics {
  std::size_t episode = 0;
  bool success = false;
  double ret = 0.0;
  std::size_t steps = 0;
  double wallclock_ms = 0.0;
};

struct MetricsTable {
  std::vector<EpisodeMetrics> rows;
  std::size_t training_phases = 0;

  /// Header `episode,success,return,steps,wallclock_ms`.
  void write_csv(std::ostream& out) const;
  /// Mean success over the last `window` episodes.
  double final_success(std::size_t window) const;
  /// Area under the per-episode success curve (number of successes).
  double success_auc() const;
};

/// Per-step record handed to an optional observer (tests and diagnostics).
struct StepRecord {
  std::size_t episode = 0;
  std::size_t t = 0;
  Cell state;
  Cell next;
  Cell subgoal;
  bool subgoal_selected = false;
  double r_ext = 0.0;
  double r_high = 0.0;
  double r_low = 0.0;
};
using StepObserver = std::function<void(const StepRecord&)>;

/// Tabular two-level agent. The high level scores candidate subgoal cells
/// with Q_h(state, subgoal) updated from K-step windows; the low level is
/// Q-learning over (state, subgoal, move).
class HierAgent {
 public:
  HierAgent(const GridEnv& env, const AgentConfig& config);

  Cell select_subgoal(Cell state, std::span<const Cell> candidates, double epsilon, Rng& rng) const;
  Move select_move(Cell state, Cell subgoal, double epsilon, Rng& rng) const;

  void update_low(Cell s, Cell g, Move a, double r, Cell next, bool terminal);
  /// SMDP update: target = window_reward + gamma^k * max_g' Q_h(next, g').
  void update_high(Cell s, Cell g, double window_reward, std::size_t k, Cell next,
                   std::span<const Cell> next_candidates, bool terminal);

  double q_high(Cell s, Cell g) const { return q_high_[pair_index(s, g)]; }
  double q_low(Cell s, Cell g, Move a) const {
    return q_low_[pair_index(s, g) * kMoveCount + static_cast<std::size_t>(a)];
  }

 private:
  std::size_t pair_index(Cell s, Cell g) const { return cells_ * env_->index(s) + env_->index(g); }

  const GridEnv* env_;
  AgentConfig config_;
  std::size_t cells_;
  std::vector<double> q_high_;
  std::vector<double> q_low_;
};

/// Runs the full hierarchical loop for `episodes` episodes. Deterministic
/// for a given seed except for the wallclock column.
MetricsTable run_experiment(const GridEnv& env, const ShapingConfig& shaping, Variant variant,
                            std::size_t episodes, std::uint64_t seed,
                            const AgentConfig& agent = {}, const StepObserver& observer = {});

}  // namespace denserew::g4rl
