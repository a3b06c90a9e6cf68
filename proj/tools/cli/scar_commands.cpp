#include <algorithm>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "denserew/error.hpp"
#include "denserew/harness/game_dump.hpp"
#include "denserew/policy_invariance.hpp"
#include "denserew/random.hpp"
#include "denserew/shapley_credit.hpp"
#include "settings.hpp"

namespace denserew::cli {

namespace {

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// ---------------------------------------------------------------------------
// scar-credit

enum class Method { Exact, Owen, Hierarchical };

struct CreditPlan {
  harness::GameDump dump;
  Method method = Method::Exact;
  std::string method_name;
  std::size_t cap = scar::kDefaultExactCap;
  scar::CoalitionStructure structure;
  double alpha = 0.5;
  double beta_kl = 0.0;
  std::vector<double> kl_terms;
};

Method parse_method(const std::string& name) {
  if (name == "exact") return Method::Exact;
  if (name == "owen") return Method::Owen;
  if (name == "hierarchical") return Method::Hierarchical;
  throw Error(Errc::InvalidArgument, "unknown method '" + name + "' (expected exact, owen or hierarchical)");
}

// A union ends at a unit whose last token is a delimiter, so recorded
// evaluations keep their unit indices.
std::vector<std::vector<std::size_t>> sentence_unions(const harness::GameDump& dump,
                                                      const std::vector<std::string>& delimiters) {
  std::vector<std::vector<std::size_t>> unions(1);
  for (std::size_t u = 0; u < dump.units.size(); ++u) {
    unions.back().push_back(u);
    const auto& unit = dump.units[u];
    const bool ends = !unit.empty() &&
                      std::find(delimiters.begin(), delimiters.end(), unit.back()) != delimiters.end();
    if (ends && u + 1 < dump.units.size()) unions.emplace_back();
  }
  return unions;
}

scar::HierarchyNode group_of(const std::vector<std::size_t>& members) {
  if (members.size() == 1) return scar::HierarchyNode::leaf(members.front());
  std::vector<scar::HierarchyNode> kids;
  for (std::size_t u : members) kids.push_back(scar::HierarchyNode::leaf(u));
  return scar::HierarchyNode::group(std::move(kids));
}

CreditPlan make_credit_plan(const harness::Config& c) {
  CreditPlan p;
  p.method_name = c.get_string("scar.method", "exact");
  p.method = parse_method(p.method_name);
  const auto partition = c.get_string("scar.partition", "units");
  if (partition != "units" && partition != "sentences" && partition != "tree")
    throw Error(Errc::InvalidArgument, "unknown partition '" + partition + "' (expected units, sentences or tree)");
  p.alpha = c.get_double("scar.alpha", p.alpha);
  scar::validate_alpha(p.alpha);
  p.beta_kl = c.get_double("scar.beta_kl", p.beta_kl);
  if (!(p.beta_kl >= 0.0)) throw Error(Errc::InvalidArgument, "beta_kl must be nonnegative");
  p.cap = c.get_uint("scar.cap", p.cap);
  std::optional<scar::HierarchyNode> tree;
  if (const auto text = c.get_string("scar.tree", ""); !text.empty()) tree = scar::parse_bracketing(text);

  const auto path = c.get_string("scar.game", "");
  if (path.empty()) throw Error(Errc::InvalidArgument, "scar-credit needs --game");
  p.dump = harness::GameDump::load_file(path);
  const std::size_t n = p.dump.units.size();
  if (n == 0) throw Error(Errc::EmptySequence, "game has no units");
  if (n > scar::kMaxPlayers) throw Error(Errc::TooManyPlayers, std::to_string(n) + " units exceed 64 players");
  if (p.method == Method::Exact && n > p.cap)
    throw Error(Errc::TooManyPlayers, std::to_string(n) + " units exceed the exact cap of " + std::to_string(p.cap));

  if (partition == "units") {
    p.structure = scar::CoalitionStructure::singletons(n);
    p.structure.hierarchy = scar::balanced_hierarchy(n);
  } else if (partition == "sentences") {
    p.structure.unions = sentence_unions(p.dump, split_words(c.get_string("scar.delimiters", ". ! ?")));
    std::vector<scar::HierarchyNode> kids;
    for (const auto& u : p.structure.unions) kids.push_back(group_of(u));
    p.structure.hierarchy = kids.size() == 1 ? kids.front() : scar::HierarchyNode::group(std::move(kids));
  } else {
    p.structure.hierarchy = tree ? *tree : scar::balanced_hierarchy(n);
    const auto& root = *p.structure.hierarchy;
    if (root.is_leaf()) {
      p.structure.unions = {{*root.unit}};
    } else {
      for (const auto& child : root.children) p.structure.unions.push_back(child.leaves());
    }
  }
  p.structure.validate_hierarchy(n);
  p.structure.validate_unions(n);

  const std::size_t horizon = p.dump.tokens().size();
  const auto logp_policy = c.get_doubles("scar.logp_policy", {});
  const auto logp_ref = c.get_doubles("scar.logp_ref", {});
  if (logp_policy.empty() && logp_ref.empty()) {
    p.kl_terms.assign(horizon, 0.0);
  } else {
    if (logp_policy.size() != horizon || logp_ref.size() != horizon)
      throw Error(Errc::SizeMismatch, "log-probability lists need one entry per token (" +
                                          std::to_string(horizon) + ")");
    p.kl_terms = scar::kl_penalty(logp_policy, logp_ref, p.beta_kl);
  }
  return p;
}

void run_credit(const CreditPlan& p, const RunContext& ctx) {
  const auto game = p.dump.game();
  scar::CreditVector credits;
  switch (p.method) {
    case Method::Exact: credits = scar::exact_shapley(game, p.cap); break;
    case Method::Owen: credits = scar::owen_value(game, p.structure); break;
    case Method::Hierarchical: credits = scar::hierarchical_owen(game, p.structure); break;
  }
  const auto units = p.dump.unit_ranges();

  scar::RewardTrace trace;
  trace.horizon = p.dump.tokens().size();
  trace.unit_end_times = scar::unit_end_times(units);
  trace.kl_terms = p.kl_terms;
  trace.terminal_reward = game.raw_value(scar::full_coalition(game.players()));
  trace.alpha = p.alpha;
  trace.kl_coefficient = p.beta_kl;
  trace.baseline = game.baseline();
  const auto placed = scar::place_rewards(credits, trace);
  const auto rewards = scar::total_reward(trace, placed);

  write_file(ctx.out / "credits.csv", [&](std::ostream& out) { scar::write_credit_csv(out, units, credits); });
  write_file(ctx.out / "rewards.csv", [&](std::ostream& out) {
    out.precision(17);
    out << "t,kl,shap,reward\n";
    for (std::size_t t = 0; t < trace.horizon; ++t)
      out << t + 1 << ',' << trace.kl_terms[t] << ',' << placed[t] << ',' << rewards[t] << '\n';
  });
  write_file(ctx.out / "game_evaluated.json", [&](std::ostream& out) { p.dump.write(out, &game); });

  std::cout << p.method_name << " credit over " << units.size() << " units: v(N) = " << game.grand_value()
            << ", sum of credits = " << credits.total << ", oracle calls " << game.oracle_calls() << '\n';
}

// ---------------------------------------------------------------------------
// scar-invariance

struct InvariancePlan {
  std::size_t mdps = 20;
  std::size_t states = 6;
  std::size_t actions = 2;
  double kl_scale = 0.05;
  std::vector<double> alphas;
  std::uint64_t seed = 2024;
  std::vector<scar::Token> vocabulary;
};

InvariancePlan make_invariance_plan(const harness::Config& c) {
  InvariancePlan p;
  p.mdps = c.get_uint("invariance.mdps", p.mdps);
  p.states = c.get_uint("invariance.states", p.states);
  p.actions = c.get_uint("invariance.actions", p.actions);
  p.kl_scale = c.get_double("invariance.kl_scale", p.kl_scale);
  p.alphas = c.get_doubles("invariance.alphas", {0.25, 0.5, 1.0});
  p.seed = c.get_uint("invariance.seed", p.seed);
  p.vocabulary = split_words(c.get_string("invariance.vocabulary", "alpha beta gamma delta eps"));
  if (p.mdps == 0 || p.states == 0 || p.actions == 0)
    throw Error(Errc::InvalidArgument, "mdps, states and actions must be positive");
  if (!(p.kl_scale >= 0.0)) throw Error(Errc::InvalidArgument, "kl_scale must be nonnegative");
  if (p.alphas.empty()) throw Error(Errc::InvalidArgument, "no alphas given");
  for (double a : p.alphas) scar::validate_alpha(a);
  if (p.vocabulary.empty()) throw Error(Errc::InvalidArgument, "empty vocabulary");
  if (std::find(p.vocabulary.begin(), p.vocabulary.end(), harness::kDefaultPlaceholder) != p.vocabulary.end())
    throw Error(Errc::InvalidArgument, "vocabulary must not contain the placeholder token");
  return p;
}

harness::ToyRewardOracle random_oracle(Rng& rng, const std::vector<scar::Token>& vocab) {
  harness::ToyRewardOracle o;
  for (const auto& w : vocab) o.weights[w] = uniform(rng, -1, 1);
  for (int k = 0; k < 4; ++k)
    o.set_bonus(vocab[uniform_index(rng, vocab.size())], vocab[uniform_index(rng, vocab.size())],
                uniform(rng, -1.5, 1.5));
  o.length_penalty = uniform(rng, 0, 0.1);
  return o;
}

void run_invariance(const InvariancePlan& p, const RunContext& ctx) {
  struct Row {
    std::uint64_t mdp_seed = 0;
    bool invariant = false;
    bool loo_flipped = false;
  };
  std::vector<Row> rows(p.mdps);
  const auto& pad = harness::kDefaultPlaceholder;
  parallel_for(p.mdps, ctx.jobs, [&](std::size_t k) {
    Row& r = rows[k];
    r.mdp_seed = derive_seed(p.seed, 2 * k);
    Rng rng(derive_seed(p.seed, 2 * k + 1));
    const auto mdp = scar::random_token_mdp(r.mdp_seed, p.vocabulary, p.states, p.actions, p.kl_scale);
    const auto oracle = random_oracle(rng, p.vocabulary);
    r.invariant = scar::verify_policy_invariance(mdp, oracle.scorer(), p.alphas, pad);
    std::vector<scar::TrajectoryRewarder> loo{scar::scar_rewarder(oracle.scorer(), 0.0, pad)};
    for (double a : p.alphas) loo.push_back(scar::leave_one_out_rewarder(oracle.scorer(), a, pad));
    r.loo_flipped = !scar::same_optimal_actions(mdp, loo);
  });

  std::size_t invariant = 0, flipped = 0;
  write_file(ctx.out / "invariance.csv", [&](std::ostream& out) {
    out << "mdp,mdp_seed,invariant,loo_flipped\n";
    for (std::size_t k = 0; k < rows.size(); ++k) {
      out << k << ',' << rows[k].mdp_seed << ',' << rows[k].invariant << ',' << rows[k].loo_flipped << '\n';
      invariant += rows[k].invariant;
      flipped += rows[k].loo_flipped;
    }
  });
  std::cout << "optimal actions unchanged in " << invariant << '/' << p.mdps
            << " MDPs; leave-one-out control changed them in " << flipped << '/' << p.mdps << '\n';
}

}  // namespace

Command scar_credit_command(CLI::App& root, Settings& s, std::string& config_path) {
  auto* app = root.add_subcommand("scar-credit", "Shapley-family credit for a recorded sequence game");
  bind_common(app, s, config_path);
  s.bind(app, "--game", "scar.game", "Game dump JSON");
  s.bind(app, "--method", "scar.method", "exact, owen or hierarchical");
  s.bind(app, "--partition", "scar.partition", "units, sentences or tree");
  s.bind(app, "--tree", "scar.tree", "Bracketing over unit indices, e.g. \"((0 1) (2 3))\"");
  s.bind(app, "--delimiters", "scar.delimiters", "Space-separated sentence delimiters");
  s.bind(app, "--alpha", "scar.alpha", "Weight of the dense credit term, in [0, 1]");
  s.bind(app, "--beta-kl", "scar.beta_kl", "KL penalty coefficient");
  s.bind(app, "--logp-policy", "scar.logp_policy", "Comma list of per-token policy log-probabilities");
  s.bind(app, "--logp-ref", "scar.logp_ref", "Comma list of per-token reference log-probabilities");
  s.bind(app, "--cap", "scar.cap", "Largest unit count for exact Shapley");
  return {app, [](const harness::Config& cfg) -> Runner {
            auto plan = std::make_shared<CreditPlan>(make_credit_plan(cfg));
            return [plan](const RunContext& ctx) { run_credit(*plan, ctx); };
          }};
}

Command scar_invariance_command(CLI::App& root, Settings& s, std::string& config_path) {
  auto* app = root.add_subcommand("scar-invariance", "Optimal-policy invariance check on random token MDPs");
  bind_common(app, s, config_path);
  s.bind(app, "--mdps", "invariance.mdps", "Number of random MDPs");
  s.bind(app, "--states", "invariance.states", "States per MDP");
  s.bind(app, "--actions", "invariance.actions", "Actions per state");
  s.bind(app, "--alphas", "invariance.alphas", "Comma list of alphas compared against 0");
  s.bind(app, "--seed", "invariance.seed", "Base seed");
  s.bind(app, "--vocabulary", "invariance.vocabulary", "Space-separated token vocabulary");
  s.bind(app, "--kl-scale", "invariance.kl_scale", "KL terms are drawn from [-kl_scale, 0]");
  return {app, [](const harness::Config& cfg) -> Runner {
            auto plan = std::make_shared<InvariancePlan>(make_invariance_plan(cfg));
            return [plan](const RunContext& ctx) { run_invariance(*plan, ctx); };
          }};
}

}  // namespace denserew::cli
