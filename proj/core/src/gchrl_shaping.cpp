#include "denserew/gchrl_shaping.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>

#include "denserew/error.hpp"

namespace denserew::g4rl {

namespace {

void require_same_dim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(Errc::DimensionError, "state feature and subgoal differ in dimension (" +
                                          std::to_string(a.size()) + " vs " +
                                          std::to_string(b.size()) + ")");
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

double high_level_reward(double r_ext, std::span<const double> phi_s, std::span<const double> g,
                         const graph::EncoderParams& params, double alpha_h) {
  require_same_dim(phi_s, g);
  return r_ext + alpha_h * graph::decode(graph::encode(params, phi_s), graph::encode(params, g));
}

double low_level_reward(std::span<const double> phi_next, std::span<const double> g,
                        const graph::EncoderParams& params, double alpha_l) {
  require_same_dim(phi_next, g);
  return -squared_distance(phi_next, g) +
         alpha_l * graph::decode(graph::encode(params, phi_next), graph::encode(params, g));
}

void ShapingConfig::validate() const {
  if (!(alpha_h >= 0.0) || !std::isfinite(alpha_h))
    throw Error(Errc::InvalidArgument, "alpha_h must be a finite value >= 0");
  if (!(alpha_l >= 0.0) || !std::isfinite(alpha_l))
    throw Error(Errc::InvalidArgument, "alpha_l must be a finite value >= 0");
  if (K == 0) throw Error(Errc::InvalidArgument, "subgoal horizon K must be positive");
  if (!(beta > 0.0)) throw Error(Errc::InvalidTolerance, "beta must be positive");
}

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::Both: return "both";
    case Variant::HighOnly: return "high-only";
    case Variant::LowOnly: return "low-only";
    case Variant::Vanilla: return "vanilla";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::Both, Variant::HighOnly, Variant::LowOnly, Variant::Vanilla})
    if (variant_name(v) == name) return v;
  throw Error(Errc::InvalidArgument, "unknown variant '" + std::string(name) +
                                         "' (expected both, high-only, low-only or vanilla)");
}

void AgentConfig::validate() const {
  if (max_steps == 0) throw Error(Errc::InvalidArgument, "max_steps must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw Error(Errc::InvalidArgument, "gamma must lie in [0, 1)");
  if (!(low_learning_rate > 0.0 && low_learning_rate <= 1.0) ||
      !(high_learning_rate > 0.0 && high_learning_rate <= 1.0))
    throw Error(Errc::InvalidArgument, "learning rates must lie in (0, 1]");
  auto unit = [](double e) { return e >= 0.0 && e <= 1.0; };
  if (!unit(epsilon_start) || !unit(epsilon_end) || !unit(high_epsilon_start) || !unit(high_epsilon_end))
    throw Error(Errc::InvalidArgument, "exploration rates must lie in [0, 1]");
  if (!std::isfinite(high_initial_value)) throw Error(Errc::InvalidArgument, "high_initial_value must be finite");
  if (graph_capacity < 2) throw Error(Errc::InvalidCapacity, "graph capacity must be >= 2");
  if (!(epsilon_d >= 0.0) || !std::isfinite(epsilon_d))
    throw Error(Errc::InvalidArgument, "epsilon_d must be finite and nonnegative");
  if (sample_interval == 0) throw Error(Errc::InvalidArgument, "sample interval must be positive");
  train.validate();
}

void MetricsTable::write_csv(std::ostream& out) const {
  out << "episode,success,return,steps,wallclock_ms\n";
  const auto old_precision = out.precision(17);
  for (const auto& r : rows)
    out << r.episode << ',' << (r.success ? 1 : 0) << ',' << r.ret << ',' << r.steps << ','
        << r.wallclock_ms << '\n';
  out.precision(old_precision);
}

double MetricsTable::final_success(std::size_t window) const {
  if (rows.empty()) return 0.0;
  const std::size_t n = std::min(std::max<std::size_t>(window, 1), rows.size());
  double s = 0.0;
  for (std::size_t i = rows.size() - n; i < rows.size(); ++i) s += rows[i].success ? 1.0 : 0.0;
  return s / static_cast<double>(n);
}

double MetricsTable::success_auc() const {
  double s = 0.0;
  for (const auto& r : rows) s += r.success ? 1.0 : 0.0;
  return s;
}

HierAgent::HierAgent(const GridEnv& env, const AgentConfig& config)
    : env_(&env), config_(config), cells_(env.cell_count()) {
  config_.validate();
  q_high_.assign(cells_ * cells_, config_.high_initial_value);
  q_low_.assign(cells_ * cells_ * kMoveCount, 0.0);
}

Cell HierAgent::select_subgoal(Cell state, std::span<const Cell> candidates, double epsilon,
                               Rng& rng) const {
  if (candidates.empty()) throw Error(Errc::InvalidArgument, "no subgoal candidates");
  if (uniform01(rng) < epsilon) return candidates[uniform_index(rng, candidates.size())];
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> ties;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double q = q_high(state, candidates[i]);
    if (q > best) {
      best = q;
      ties.assign(1, i);
    } else if (q == best) {
      ties.push_back(i);
    }
  }
  if (ties.empty()) throw Error(Errc::InvalidArgument, "high-level values are not finite");
  return candidates[ties.size() == 1 ? ties[0] : ties[uniform_index(rng, ties.size())]];
}

Move HierAgent::select_move(Cell state, Cell subgoal, double epsilon, Rng& rng) const {
  if (uniform01(rng) < epsilon) return static_cast<Move>(uniform_index(rng, kMoveCount));
  double best = -std::numeric_limits<double>::infinity();
  std::size_t ties[kMoveCount];
  std::size_t n = 0;
  for (std::size_t a = 0; a < kMoveCount; ++a) {
    const double q = q_low(state, subgoal, static_cast<Move>(a));
    if (q > best) {
      best = q;
      n = 0;
      ties[n++] = a;
    } else if (q == best) {
      ties[n++] = a;
    }
  }
  if (n == 0) throw Error(Errc::InvalidArgument, "low-level values are not finite");
  return static_cast<Move>(n == 1 ? ties[0] : ties[uniform_index(rng, n)]);
}

void HierAgent::update_low(Cell s, Cell g, Move a, double r, Cell next, bool terminal) {
  double target = r;
  if (!terminal) {
    double best = q_low(next, g, Move::Up);
    for (std::size_t b = 1; b < kMoveCount; ++b) best = std::max(best, q_low(next, g, static_cast<Move>(b)));
    target += config_.gamma * best;
  }
  double& q = q_low_[pair_index(s, g) * kMoveCount + static_cast<std::size_t>(a)];
  q += config_.low_learning_rate * (target - q);
}

void HierAgent::update_high(Cell s, Cell g, double window_reward, std::size_t k, Cell next,
                            std::span<const Cell> next_candidates, bool terminal) {
  double target = window_reward;
  if (!terminal && !next_candidates.empty()) {
    double best = -std::numeric_limits<double>::infinity();
    for (const Cell& c : next_candidates) best = std::max(best, q_high(next, c));
    target += std::pow(config_.gamma, static_cast<double>(k)) * best;
  }
  double& q = q_high_[pair_index(s, g)];
  q += config_.high_learning_rate * (target - q);
}

namespace {

/// Distinct cells behind the current graph nodes, plus the goal, minus the
/// current cell (a subgoal the agent already stands on is a no-op).
std::vector<Cell> subgoal_candidates(const GridEnv& env, const graph::StateGraph& graph, Cell here) {
  std::vector<Cell> out;
  for (std::size_t id : graph.occupied_slots()) out.push_back(env.cell_of_feature(graph.slot(id).feature));
  out.push_back(env.goal());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  std::erase(out, here);
  return out;
}

}  // namespace

MetricsTable run_experiment(const GridEnv& env, const ShapingConfig& shaping, Variant variant,
                            std::size_t episodes, std::uint64_t seed, const AgentConfig& agent_cfg,
                            const StepObserver& observer) {
  shaping.validate();
  agent_cfg.validate();
  if (episodes == 0) throw Error(Errc::InvalidArgument, "episodes must be >= 1");
  if (!env.goal_reachable()) throw Error(Errc::InvalidEnv, "goal is not reachable from the start");

  const bool use_high = variant == Variant::Both || variant == Variant::HighOnly;
  const bool use_low = variant == Variant::Both || variant == Variant::LowOnly;
  const double alpha_h = use_high ? shaping.alpha_h : 0.0;
  const double alpha_l = use_low ? shaping.alpha_l : 0.0;

  Rng rng(derive_seed(seed, 0));
  Rng train_rng(derive_seed(seed, 2));

  auto graph = graph::create_graph(agent_cfg.graph_capacity, agent_cfg.epsilon_d, agent_cfg.eviction,
                                   agent_cfg.sample_interval);
  const std::size_t d = 2;
  std::vector<std::size_t> dims{d};
  dims.insert(dims.end(), agent_cfg.hidden_layers.begin(), agent_cfg.hidden_layers.end());
  dims.push_back(agent_cfg.embedding_dim == 0 ? d : agent_cfg.embedding_dim);
  auto encoder = graph::init_encoder(dims, derive_seed(seed, 1));

  // Embeddings only change when the encoder is retrained, so cache them per cell.
  std::vector<std::vector<double>> features(env.cell_count());
  std::vector<std::vector<double>> emb(env.cell_count());
  for (const Cell& c : env.free_cells()) features[env.index(c)] = env.feature(c);
  auto refresh_embeddings = [&] {
    for (const Cell& c : env.free_cells()) emb[env.index(c)] = graph::encode(encoder, features[env.index(c)]);
  };
  refresh_embeddings();
  auto similarity = [&](Cell a, Cell b) { return graph::decode(emb[env.index(a)], emb[env.index(b)]); };

  HierAgent agent(env, agent_cfg);
  MetricsTable table;
  table.rows.reserve(episodes);

  for (std::size_t ep = 0; ep < episodes; ++ep) {
    const auto t0 = std::chrono::steady_clock::now();
    const double frac = episodes > 1 ? static_cast<double>(ep) / static_cast<double>(episodes - 1) : 1.0;
    const double epsilon = agent_cfg.epsilon_start + (agent_cfg.epsilon_end - agent_cfg.epsilon_start) * frac;
    const double high_epsilon =
        agent_cfg.high_epsilon_start + (agent_cfg.high_epsilon_end - agent_cfg.high_epsilon_start) * frac;

    EpisodeMetrics row;
    row.episode = ep;
    Cell s = env.start();
    std::optional<graph::NodeRef> prev = graph.observe_transition(std::nullopt, features[env.index(s)]).node;

    if (s == env.goal()) {
      row.success = true;
      row.wallclock_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      table.rows.push_back(row);
      continue;
    }

    Cell window_start = s;
    Cell g = s;
    double window_reward = 0.0;
    std::size_t window_len = 0;

    for (std::size_t t = 0; t < agent_cfg.max_steps; ++t) {
      bool selected = false;
      if (t % shaping.K == 0) {
        const auto candidates = subgoal_candidates(env, graph, s);
        if (t > 0) agent.update_high(window_start, g, window_reward, window_len, s, candidates, false);
        g = agent.select_subgoal(s, candidates, high_epsilon, rng);
        window_start = s;
        window_reward = 0.0;
        window_len = 0;
        selected = true;
      }

      const Move a = agent.select_move(s, g, epsilon, rng);
      const auto step = env.step(s, a);

      graph.advance_step();
      const auto outcome = graph.observe_transition(prev, features[env.index(step.next)]);
      if (outcome.node) prev = outcome.node;
      if (graph.should_train_and_reset(shaping.beta) && graph.occupied_count() >= 2) {
        encoder = graph::train_phase(std::move(encoder), graph, agent_cfg.train, train_rng);
        ++table.training_phases;
        refresh_embeddings();
      }

      const auto& fn = features[env.index(step.next)];
      const auto& fg = features[env.index(g)];
      const double r_high = step.reward + alpha_h * similarity(s, g);
      const double r_low = -squared_distance(fn, fg) + alpha_l * similarity(step.next, g);

      agent.update_low(s, g, a, r_low, step.next, step.done || step.next == g);
      if (agent_cfg.relabel_subgoals) {
        // The low-level reward is known for any subgoal, so the same
        // transition also trains every other candidate.
        for (const Cell& other : subgoal_candidates(env, graph, g)) {
          const double r = -squared_distance(fn, features[env.index(other)]) + alpha_l * similarity(step.next, other);
          agent.update_low(s, other, a, r, step.next, step.done || step.next == other);
        }
      }
      window_reward += r_high;
      ++window_len;
      row.ret += step.reward;
      row.steps = t + 1;

      if (observer)
        observer(StepRecord{ep, t, s, step.next, g, selected, step.reward, r_high, r_low});

      s = step.next;
      if (step.done) {
        row.success = true;
        agent.update_high(window_start, g, window_reward, window_len, s, {}, true);
        break;
      }
    }
    if (!row.success) {
      const auto candidates = subgoal_candidates(env, graph, s);
      agent.update_high(window_start, g, window_reward, window_len, s, candidates, false);
    }
    row.wallclock_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace denserew::g4rl
