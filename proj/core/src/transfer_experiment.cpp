#include "denserew/transfer_experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <set>

#include "denserew/error.hpp"
#include "denserew/random.hpp"

namespace denserew::spectral {

graph::StateGraph survey_graph(const GridEnv& env, double epsilon_d) {
  const auto cells = env.free_cells();
  auto g = graph::create_graph(std::max<std::size_t>(cells.size(), 2), epsilon_d,
                               graph::EvictionPolicy::Oldest, 1);
  for (const Cell& c : cells) {
    for (std::size_t m = 0; m < g4rl::kMoveCount; ++m) {
      const Cell to = env.move_target(c, static_cast<g4rl::Move>(m));
      if (to == c) continue;
      const auto from = g.observe_transition(std::nullopt, env.feature(c)).node;
      g.observe_transition(from, env.feature(to));
    }
  }
  return g;
}

GridEnv mirrored(const GridEnv& env) {
  const int w = env.width();
  auto flip = [w](Cell c) { return Cell{w - 1 - c.x, c.y}; };
  std::set<Cell> walls;
  for (int y = 0; y < env.height(); ++y)
    for (int x = 0; x < w; ++x)
      if (env.is_wall({x, y})) walls.insert(flip({x, y}));
  std::map<Cell, g4rl::Move> doors;
  for (const auto& [c, m] : env.one_way_doors()) {
    g4rl::Move fm = m;
    if (m == g4rl::Move::Left) fm = g4rl::Move::Right;
    if (m == g4rl::Move::Right) fm = g4rl::Move::Left;
    doors[flip(c)] = fm;
  }
  return GridEnv(w, env.height(), std::move(walls), flip(env.start()), flip(env.goal()),
                 env.reward_mode(), std::move(doors));
}

std::string_view transfer_maze_map() {
  return "#########\n"
         "#S.#...##\n"
         "##.#....#\n"
         "#....#..#\n"
         "#...#.#.#\n"
         "#..#....#\n"
         "##.#...##\n"
         "#......G#\n"
         "#########\n";
}

double FlatQResult::state_value(const GridEnv& env, Cell c) const {
  const std::size_t base = env.index(c) * g4rl::kMoveCount;
  return *std::max_element(q.begin() + static_cast<std::ptrdiff_t>(base),
                           q.begin() + static_cast<std::ptrdiff_t>(base + g4rl::kMoveCount));
}

void FlatQConfig::validate() const {
  if (episodes == 0 || max_steps == 0)
    throw Error(Errc::InvalidArgument, "episodes and max_steps must be positive");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0))
    throw Error(Errc::InvalidArgument, "learning rate must lie in (0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw Error(Errc::InvalidArgument, "gamma must lie in [0, 1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error(Errc::InvalidArgument, "epsilon must lie in [0, 1]");
}

void TransferConfig::validate() const {
  source.validate();
  target.validate();
  if (!(beta_transfer >= 0.0) || !std::isfinite(beta_transfer))
    throw Error(Errc::InvalidArgument, "beta_transfer must be a finite value >= 0");
  if (!(tolerances.eps_lambda > 0.0) || !(tolerances.eps_v > 0.0))
    throw Error(Errc::InvalidTolerance, "eps_lambda and eps_v must be positive");
  if (!(epsilon_d > 0.0)) throw Error(Errc::InvalidTolerance, "epsilon_d must be positive");
  if (window == 0) throw Error(Errc::InvalidArgument, "window must be positive");
  if (!(threshold > 0.0 && threshold <= 1.0)) throw Error(Errc::InvalidArgument, "threshold must lie in (0, 1]");
}

FlatQResult run_flat_q(const GridEnv& env, const FlatQConfig& cfg, std::uint64_t seed,
                       const IntrinsicFn& intrinsic) {
  cfg.validate();
  if (!env.goal_reachable()) throw Error(Errc::InvalidEnv, "goal is not reachable from the start");
  constexpr std::size_t A = g4rl::kMoveCount;
  FlatQResult out;
  out.q.assign(env.cell_count() * A, 0.0);
  out.success.reserve(cfg.episodes);
  Rng rng(seed);

  auto greedy = [&](Cell s) {
    const double* q = &out.q[env.index(s) * A];
    double best = -std::numeric_limits<double>::infinity();
    std::size_t ties[A];
    std::size_t n = 0;
    for (std::size_t a = 0; a < A; ++a) {
      if (q[a] > best) {
        best = q[a];
        n = 0;
        ties[n++] = a;
      } else if (q[a] == best) {
        ties[n++] = a;
      }
    }
    return n == 1 ? ties[0] : ties[uniform_index(rng, n)];
  };

  for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
    Cell s = env.start();
    bool ok = s == env.goal();
    for (std::size_t t = 0; t < cfg.max_steps && !ok; ++t) {
      const std::size_t a = uniform01(rng) < cfg.epsilon ? uniform_index(rng, A) : greedy(s);
      const auto step = env.step(s, static_cast<g4rl::Move>(a));
      double r = step.reward;
      if (intrinsic) r += intrinsic(step.next);
      double target = r;
      if (!step.done) target += cfg.gamma * out.state_value(env, step.next);
      double& q = out.q[env.index(s) * A + a];
      q += cfg.learning_rate * (target - q);
      s = step.next;
      ok = step.done;
    }
    out.success.push_back(ok);
  }
  return out;
}

std::size_t episodes_to_threshold(const std::vector<bool>& success, std::size_t window, double threshold) {
  if (window == 0) throw Error(Errc::InvalidArgument, "window must be positive");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < success.size(); ++i) {
    hits += success[i] ? 1 : 0;
    if (i >= window) hits -= success[i - window] ? 1 : 0;
    if (i + 1 >= window && static_cast<double>(hits) >= threshold * static_cast<double>(window)) return i + 1;
  }
  return success.size() + 1;
}

TransferOutcome run_transfer(const GridEnv& maze1, const GridEnv& maze2, const TransferConfig& cfg,
                             std::uint64_t seed) {
  cfg.validate();
  TransferOutcome out;

  const auto source = run_flat_q(maze1, cfg.source, derive_seed(seed, 10));
  auto g1 = survey_graph(maze1, cfg.epsilon_d);
  for (std::size_t id : g1.occupied_slots()) {
    const Cell c = maze1.cell_of_feature(g1.slot(id).feature);
    label_value(g1, g1.ref(id), source.state_value(maze1, c));
  }
  const auto g2 = survey_graph(maze2, cfg.epsilon_d);

  const auto s1 = graph_spectrum(g1);
  const auto s2 = graph_spectrum(g2);
  out.spectrum_distance = s1.size() == s2.size() ? spectrum_distance(s1, s2)
                                                 : std::numeric_limits<double>::infinity();
  out.spectra_match = s1.size() == s2.size() && spectra_match(s1, s2, cfg.tolerances.eps_lambda);
  out.match = match_nodes(s1, s2, cfg.tolerances);

  IntrinsicFn shaping;
  if (const auto* m = std::get_if<Matched>(&out.match)) {
    const auto labels = node_labels(g1);
    shaping = [&, pairing = *m, labels](Cell next) {
      return transfer_intrinsic(g2, pairing, labels, maze2.feature(next), cfg.beta_transfer);
    };
  }
  const std::uint64_t target_seed = derive_seed(seed, 11);
  out.shaped_success = run_flat_q(maze2, cfg.target, target_seed, shaping).success;
  out.baseline_success = run_flat_q(maze2, cfg.target, target_seed).success;
  out.shaped_episodes = episodes_to_threshold(out.shaped_success, cfg.window, cfg.threshold);
  out.baseline_episodes = episodes_to_threshold(out.baseline_success, cfg.window, cfg.threshold);
  return out;
}

void write_transfer_csv_header(std::ostream& out) {
  out << "seed,spectrum_distance,spectra_match,match,shaped_episodes,baseline_episodes\n";
}

void write_transfer_csv_row(std::ostream& out, std::uint64_t seed, const TransferOutcome& o) {
  const auto p = out.precision(17);
  out << seed << ',' << o.spectrum_distance << ',' << (o.spectra_match ? 1 : 0) << ','
      << match_kind(o.match) << ',' << o.shaped_episodes << ',' << o.baseline_episodes << '\n';
  out.precision(p);
}

}  // namespace denserew::spectral
