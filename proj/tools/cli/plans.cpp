#include "plans.hpp"

#include <algorithm>
#include <sstream>
#include <string>

#include "denserew/error.hpp"

namespace denserew::cli {

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) {
    const auto b = part.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(part.substr(b, part.find_last_not_of(" \t") - b + 1));
  }
  return out;
}

g4rl::RewardMode parse_reward_mode(const std::string& name) {
  if (name == "sparse") return g4rl::RewardMode::Sparse;
  if (name == "dense") return g4rl::RewardMode::Dense;
  throw Error(Errc::InvalidArgument, "unknown reward mode '" + name + "' (expected sparse or dense)");
}

graph::EvictionPolicy parse_eviction(const std::string& name) {
  if (name == "oldest") return graph::EvictionPolicy::Oldest;
  if (name == "weakest") return graph::EvictionPolicy::WeakestConnected;
  throw Error(Errc::InvalidArgument, "unknown eviction policy '" + name + "' (expected oldest or weakest)");
}

g4rl::GridEnv load_env(const std::string& path, std::string_view builtin, g4rl::RewardMode mode) {
  return path.empty() ? g4rl::GridEnv::parse(builtin, mode) : g4rl::GridEnv::load_map_file(path, mode);
}

std::size_t positive(const harness::Config& cfg, const std::string& key, std::size_t fallback) {
  const auto v = cfg.get_uint(key, fallback);
  if (v == 0) throw Error(Errc::InvalidArgument, key + " must be positive");
  return v;
}

}  // namespace

std::vector<std::uint64_t> sorted_seeds(const std::string& text) {
  auto seeds = harness::parse_seed_list(text);
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  return seeds;
}

void require_reachable(const g4rl::GridEnv& env, const std::string& what) {
  if (!env.goal_reachable()) throw Error(Errc::InvalidEnv, what + ": goal is not reachable from the start");
}

void bind_g4rl_options(CLI::App* app, Settings& s) {
  s.bind(app, "--map", "g4rl.map", "Map file (default: built-in four-room map)");
  s.bind(app, "--reward", "g4rl.reward", "sparse or dense");
  s.bind(app, "--seeds", "g4rl.seeds", "Seed count N (0..N-1), range a..b or list a,b,c");
  s.bind(app, "--episodes", "g4rl.episodes", "Episodes per run");
  s.bind(app, "--window", "g4rl.window", "Trailing window for final success and smoothing");
  s.bind(app, "--variants", "g4rl.variants", "Comma list of both, high-only, low-only, vanilla");
  s.bind(app, "--alpha-h", "g4rl.alpha_h", "High-level shaping coefficient");
  s.bind(app, "--alpha-l", "g4rl.alpha_l", "Low-level shaping coefficient");
  s.bind(app, "--horizon", "g4rl.horizon", "Subgoal horizon K");
  s.bind(app, "--beta", "g4rl.beta", "Encoder training tolerance");
  s.bind(app, "--max-steps", "g4rl.max_steps", "Step limit per episode");
  s.bind(app, "--gamma", "g4rl.gamma", "Discount factor");
  s.bind(app, "--capacity", "g4rl.capacity", "State-graph capacity N");
  s.bind(app, "--epsilon-d", "g4rl.epsilon_d", "Node distance threshold");
  s.bind(app, "--sample-interval", "g4rl.sample_interval", "Observe every t_c-th step");
  s.bind(app, "--eviction", "g4rl.eviction", "oldest or weakest");
  s.bind(app, "--encoder-lr", "g4rl.encoder_lr", "Encoder learning rate");
  s.bind(app, "--steps-per-phase", "g4rl.steps_per_phase", "Gradient steps per training phase");
  s.bind(app, "--pair-fraction", "g4rl.pair_fraction", "Fraction of node pairs per gradient step");
  s.bind(app, "--high-initial-value", "g4rl.high_initial_value", "Initial high-level value");
}

G4rlPlan make_g4rl_plan(const harness::Config& c) {
  G4rlPlan p(load_env(c.get_string("g4rl.map", ""), g4rl::four_room_map(),
                      parse_reward_mode(c.get_string("g4rl.reward", "sparse"))));
  require_reachable(p.env, "g4rl map");

  p.shaping.alpha_h = c.get_double("g4rl.alpha_h", p.shaping.alpha_h);
  p.shaping.alpha_l = c.get_double("g4rl.alpha_l", p.shaping.alpha_l);
  p.shaping.K = c.get_uint("g4rl.horizon", p.shaping.K);
  p.shaping.beta = c.get_double("g4rl.beta", p.shaping.beta);
  p.shaping.validate();

  auto& a = p.agent;
  a.max_steps = c.get_uint("g4rl.max_steps", a.max_steps);
  a.gamma = c.get_double("g4rl.gamma", a.gamma);
  a.graph_capacity = c.get_uint("g4rl.capacity", a.graph_capacity);
  a.epsilon_d = c.get_double("g4rl.epsilon_d", a.epsilon_d);
  a.sample_interval = c.get_uint("g4rl.sample_interval", a.sample_interval);
  a.eviction = parse_eviction(c.get_string("g4rl.eviction", "oldest"));
  a.train.learning_rate = c.get_double("g4rl.encoder_lr", a.train.learning_rate);
  a.train.steps_per_phase = c.get_uint("g4rl.steps_per_phase", a.train.steps_per_phase);
  a.train.pair_fraction = c.get_double("g4rl.pair_fraction", a.train.pair_fraction);
  a.high_initial_value = c.get_double("g4rl.high_initial_value", a.high_initial_value);
  a.validate();

  for (const auto& name : split_list(c.get_string("g4rl.variants", "both,high-only,low-only,vanilla")))
    p.variants.push_back(g4rl::parse_variant(name));
  if (p.variants.empty()) throw Error(Errc::InvalidArgument, "no variants selected");
  p.episodes = positive(c, "g4rl.episodes", p.episodes);
  p.window = positive(c, "g4rl.window", p.window);
  p.seeds = sorted_seeds(c.get_string("g4rl.seeds", "20"));
  return p;
}

void bind_transfer_options(CLI::App* app, Settings& s) {
  s.bind(app, "--map1", "transfer.map1", "Source maze (default: built-in transfer maze)");
  s.bind(app, "--map2", "transfer.map2", "Target maze (default: mirror of the source)");
  s.bind(app, "--seeds", "transfer.seeds", "Seed count N (0..N-1), range a..b or list a,b,c");
  s.bind(app, "--beta-transfer", "transfer.beta_transfer", "Transferred intrinsic coefficient");
  s.bind(app, "--eps-lambda", "transfer.eps_lambda", "Spectrum match tolerance");
  s.bind(app, "--eps-v", "transfer.eps_v", "Eigenvector row match tolerance");
  s.bind(app, "--epsilon-d", "transfer.epsilon_d", "Node distance threshold of the survey graphs");
  s.bind(app, "--window", "transfer.window", "Trailing window for the success threshold");
  s.bind(app, "--threshold", "transfer.threshold", "Success rate that counts as learned");
  s.bind(app, "--source-episodes", "transfer.source_episodes", "Episodes in the source maze");
  s.bind(app, "--source-max-steps", "transfer.source_max_steps", "Step limit in the source maze");
  s.bind(app, "--source-gamma", "transfer.source_gamma", "Discount in the source maze");
  s.bind(app, "--target-episodes", "transfer.target_episodes", "Episodes in the target maze");
  s.bind(app, "--target-max-steps", "transfer.target_max_steps", "Step limit in the target maze");
  s.bind(app, "--target-gamma", "transfer.target_gamma", "Discount in the target maze");
  s.bind(app, "--learning-rate", "transfer.learning_rate", "Q-learning rate in both mazes");
  s.bind(app, "--exploration", "transfer.exploration", "Epsilon-greedy rate in both mazes");
}

TransferPlan make_transfer_plan(const harness::Config& c) {
  auto m1 = load_env(c.get_string("transfer.map1", ""), spectral::transfer_maze_map(), g4rl::RewardMode::Sparse);
  const auto map2 = c.get_string("transfer.map2", "");
  auto m2 = map2.empty() ? spectral::mirrored(m1) : g4rl::GridEnv::load_map_file(map2, g4rl::RewardMode::Sparse);
  require_reachable(m1, "source maze");
  require_reachable(m2, "target maze");
  TransferPlan p(std::move(m1), std::move(m2));

  auto& t = p.config;
  t.beta_transfer = c.get_double("transfer.beta_transfer", t.beta_transfer);
  t.tolerances.eps_lambda = c.get_double("transfer.eps_lambda", t.tolerances.eps_lambda);
  t.tolerances.eps_v = c.get_double("transfer.eps_v", t.tolerances.eps_v);
  t.epsilon_d = c.get_double("transfer.epsilon_d", t.epsilon_d);
  t.window = c.get_uint("transfer.window", t.window);
  t.threshold = c.get_double("transfer.threshold", t.threshold);
  t.source.episodes = c.get_uint("transfer.source_episodes", t.source.episodes);
  t.source.max_steps = c.get_uint("transfer.source_max_steps", t.source.max_steps);
  t.source.gamma = c.get_double("transfer.source_gamma", t.source.gamma);
  t.target.episodes = c.get_uint("transfer.target_episodes", t.target.episodes);
  t.target.max_steps = c.get_uint("transfer.target_max_steps", t.target.max_steps);
  t.target.gamma = c.get_double("transfer.target_gamma", t.target.gamma);
  for (auto* q : {&t.source, &t.target}) {
    q->learning_rate = c.get_double("transfer.learning_rate", q->learning_rate);
    q->epsilon = c.get_double("transfer.exploration", q->epsilon);
  }
  t.validate();
  p.seeds = sorted_seeds(c.get_string("transfer.seeds", "20"));
  return p;
}

}  // namespace denserew::cli
