#include "denserew/shapley_credit.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "denserew/error.hpp"

namespace denserew::scar {

// ---------------------------------------------------------------------------
// Hierarchies and coalition structures

std::vector<std::size_t> HierarchyNode::leaves() const {
  std::vector<std::size_t> out;
  std::vector<const HierarchyNode*> stack{this};
  while (!stack.empty()) {
    const HierarchyNode* n = stack.back();
    stack.pop_back();
    if (n->is_leaf()) {
      out.push_back(*n->unit);
      continue;
    }
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) stack.push_back(&*it);
  }
  return out;
}

std::string HierarchyNode::to_string() const {
  if (is_leaf()) return std::to_string(*unit);
  std::string s = "(";
  for (std::size_t i = 0; i < children.size(); ++i) {
    if (i) s += ' ';
    s += children[i].to_string();
  }
  return s + ")";
}

namespace {

struct BracketParser {
  const std::string& text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  HierarchyNode parse_node() {
    skip_ws();
    if (pos >= text.size()) throw Error(Errc::InvalidTree, "unexpected end of bracketing");
    if (text[pos] == '(') {
      ++pos;
      std::vector<HierarchyNode> kids;
      for (;;) {
        skip_ws();
        if (pos >= text.size()) throw Error(Errc::InvalidTree, "unbalanced '(' in bracketing");
        if (text[pos] == ')') {
          ++pos;
          break;
        }
        kids.push_back(parse_node());
      }
      if (kids.empty()) throw Error(Errc::InvalidTree, "empty group '()' in bracketing");
      if (kids.size() == 1) return std::move(kids.front());
      return HierarchyNode::group(std::move(kids));
    }
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (start == pos)
      throw Error(Errc::InvalidTree, std::string("unexpected character '") + text[pos] + "' in bracketing");
    return HierarchyNode::leaf(std::stoul(text.substr(start, pos - start)));
  }
};

}  // namespace

HierarchyNode parse_bracketing(const std::string& text) {
  BracketParser p{text};
  HierarchyNode root = p.parse_node();
  p.skip_ws();
  if (p.pos != text.size()) throw Error(Errc::InvalidTree, "trailing characters after bracketing");
  return root;
}

HierarchyNode balanced_hierarchy(std::size_t count, std::size_t first) {
  if (count == 0) throw Error(Errc::InvalidTree, "empty hierarchy");
  if (count == 1) return HierarchyNode::leaf(first);
  const std::size_t left = (count + 1) / 2;
  return HierarchyNode::group(
      {balanced_hierarchy(left, first), balanced_hierarchy(count - left, first + left)});
}

CoalitionStructure CoalitionStructure::singletons(std::size_t n) {
  CoalitionStructure s;
  for (std::size_t i = 0; i < n; ++i) s.unions.push_back({i});
  return s;
}

CoalitionStructure CoalitionStructure::grand(std::size_t n) {
  CoalitionStructure s;
  s.unions.emplace_back(n);
  std::iota(s.unions.front().begin(), s.unions.front().end(), std::size_t{0});
  return s;
}

void CoalitionStructure::validate_unions(std::size_t n) const {
  std::vector<int> seen(n, 0);
  for (const auto& u : unions) {
    if (u.empty()) throw Error(Errc::InvalidPartition, "empty union in coalition structure");
    for (auto p : u) {
      if (p >= n) throw Error(Errc::InvalidPartition, "union member out of range");
      if (seen[p]++) throw Error(Errc::InvalidPartition, "player " + std::to_string(p) + " appears twice");
    }
  }
  for (std::size_t p = 0; p < n; ++p)
    if (!seen[p]) throw Error(Errc::InvalidPartition, "player " + std::to_string(p) + " is in no union");
}

void CoalitionStructure::validate_hierarchy(std::size_t n) const {
  if (!hierarchy) throw Error(Errc::InvalidTree, "coalition structure has no hierarchy");
  std::vector<const HierarchyNode*> stack{&*hierarchy};
  while (!stack.empty()) {
    const HierarchyNode* node = stack.back();
    stack.pop_back();
    if (node->is_leaf()) {
      if (!node->children.empty()) throw Error(Errc::InvalidTree, "leaf with children");
      continue;
    }
    if (node->children.empty()) throw Error(Errc::InvalidTree, "inner node without children");
    for (const auto& c : node->children) stack.push_back(&c);
  }
  auto leaves = hierarchy->leaves();
  std::vector<int> seen(n, 0);
  for (auto l : leaves) {
    if (l >= n) throw Error(Errc::InvalidTree, "hierarchy leaf " + std::to_string(l) + " out of range");
    if (seen[l]++) throw Error(Errc::InvalidTree, "hierarchy leaf " + std::to_string(l) + " repeated");
  }
  if (leaves.size() != n) throw Error(Errc::InvalidTree, "hierarchy does not cover every unit");
}

// ---------------------------------------------------------------------------
// Segmentation and rendering

Segmentation segment(std::span<const Token> tokens, const SegmentStrategy& strategy) {
  if (tokens.empty()) throw Error(Errc::EmptySequence, "cannot segment an empty token sequence");
  Segmentation seg;
  const std::size_t n = tokens.size();

  if (std::holds_alternative<TokenLevel>(strategy)) {
    for (std::size_t i = 0; i < n; ++i) seg.units.push_back({i, i + 1});
    seg.structure = CoalitionStructure::singletons(n);
  } else if (const auto* s = std::get_if<SentenceLevel>(&strategy)) {
    std::size_t start = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool delim = std::find(s->delimiters.begin(), s->delimiters.end(), tokens[i]) != s->delimiters.end();
      if (delim) {
        seg.units.push_back({start, i + 1});
        start = i + 1;
      }
    }
    if (start < n) seg.units.push_back({start, n});
    seg.structure = CoalitionStructure::singletons(seg.units.size());
  } else {
    const auto& span = std::get<SpanLevel>(strategy);
    for (std::size_t i = 0; i < n; ++i) seg.units.push_back({i, i + 1});
    seg.structure.hierarchy = span.tree ? *span.tree : balanced_hierarchy(n);
    seg.structure.validate_hierarchy(n);
    const auto& root = *seg.structure.hierarchy;
    if (root.is_leaf()) {
      seg.structure.unions.push_back({*root.unit});
    } else {
      for (const auto& child : root.children) seg.structure.unions.push_back(child.leaves());
    }
  }
  return seg;
}

std::vector<Token> render_coalition(std::span<const Token> tokens, std::span<const Unit> units,
                                    Coalition members, const Token& placeholder) {
  std::vector<Token> out(tokens.begin(), tokens.end());
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (i < 64 && (members >> i) & 1U) continue;
    for (std::size_t t = units[i].begin; t < units[i].end && t < out.size(); ++t) out[t] = placeholder;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Games

CoalitionGame::CoalitionGame(std::size_t players, Worth raw_worth)
    : players_(players), worth_(std::move(raw_worth)), cache_(std::make_shared<Cache>()) {
  if (players == 0) throw Error(Errc::EmptySequence, "a game needs at least one player");
  if (players > kMaxPlayers)
    throw Error(Errc::TooManyPlayers, "at most " + std::to_string(kMaxPlayers) + " players supported");
  baseline_ = raw_value(0);
}

double CoalitionGame::raw_value(Coalition members) const {
  std::lock_guard lock(cache_->mutex);
  auto it = cache_->values.find(members);
  if (it != cache_->values.end()) return it->second;
  const double v = worth_(members);
  cache_->values.emplace(members, v);
  return v;
}

double CoalitionGame::value(Coalition members) const {
  return raw_value(members) - baseline_;
}

std::size_t CoalitionGame::oracle_calls() const {
  std::lock_guard lock(cache_->mutex);
  return cache_->values.size();
}

std::vector<std::pair<Coalition, double>> CoalitionGame::evaluations() const {
  std::vector<std::pair<Coalition, double>> out;
  {
    std::lock_guard lock(cache_->mutex);
    out.assign(cache_->values.begin(), cache_->values.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

CoalitionGame make_text_game(std::vector<Token> tokens, std::vector<Unit> units, Token placeholder,
                             SequenceScorer scorer) {
  if (tokens.empty()) throw Error(Errc::EmptySequence, "empty token sequence");
  if (units.empty()) throw Error(Errc::EmptySequence, "no units");
  const std::size_t n = units.size();
  return CoalitionGame(n, [tokens = std::move(tokens), units = std::move(units),
                           placeholder = std::move(placeholder),
                           scorer = std::move(scorer)](Coalition s) {
    const auto rendered = render_coalition(tokens, units, s, placeholder);
    return scorer(rendered);
  });
}

// ---------------------------------------------------------------------------
// Credit computations

CreditVector CreditVector::from(std::vector<double> v) {
  CreditVector c;
  c.total = std::accumulate(v.begin(), v.end(), 0.0);
  c.values = std::move(v);
  return c;
}

namespace {

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

/// |S|! (n - |S| - 1)! / n!  ==  1 / (n * C(n-1, |S|)).
std::vector<double> shapley_weights(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k)
    w[k] = 1.0 / (static_cast<double>(n) * binomial(n - 1, k));
  return w;
}

/// Iterates every subset of `mask` (including empty and mask itself).
template <typename F>
void for_each_subset(Coalition mask, F&& f) {
  Coalition s = mask;
  for (;;) {
    f(s);
    if (s == 0) break;
    s = (s - 1) & mask;
  }
}

/// Sum that does not depend on the order the terms were produced in, so
/// games that are symmetric in two players give bit-identical credits.
double order_free_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

}  // namespace

CreditVector exact_shapley(const CoalitionGame& game, std::size_t cap) {
  const std::size_t n = game.players();
  if (n > cap || n > 30)
    throw Error(Errc::TooManyPlayers, std::to_string(n) + " players exceed the exact Shapley cap of " +
                                          std::to_string(std::min<std::size_t>(cap, 30)));
  const Coalition full = full_coalition(n);
  std::vector<double> v(std::size_t{1} << n);
  for (Coalition s = 0; s <= full; ++s) v[s] = game.value(s);

  const auto w = shapley_weights(n);
  std::vector<double> credits(n);
  std::vector<double> terms;
  terms.reserve(std::size_t{1} << (n - 1));
  for (std::size_t i = 0; i < n; ++i) {
    const Coalition bit = Coalition{1} << i;
    terms.clear();
    for (Coalition s = 0; s <= full; ++s) {
      if (s & bit) continue;
      terms.push_back(w[std::popcount(s)] * (v[s | bit] - v[s]));
    }
    credits[i] = order_free_sum(terms);
  }
  return CreditVector::from(std::move(credits));
}

CreditVector owen_value(const CoalitionGame& game, const CoalitionStructure& structure) {
  const std::size_t n = game.players();
  structure.validate_unions(n);
  const std::size_t m = structure.unions.size();

  std::vector<Coalition> union_mask(m, 0);
  std::vector<std::size_t> union_of(n);
  std::size_t widest = 0;
  for (std::size_t k = 0; k < m; ++k) {
    for (auto p : structure.unions[k]) {
      union_mask[k] |= Coalition{1} << p;
      union_of[p] = k;
    }
    widest = std::max(widest, structure.unions[k].size());
  }
  if (m - 1 + widest - 1 > 26)
    throw Error(Errc::TooManyPlayers, "coalition structure too large for exact Owen values");

  const auto outer_w = shapley_weights(m);
  std::vector<double> credits(n);
  std::vector<double> terms;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = union_of[i];
    const Coalition bit = Coalition{1} << i;
    const Coalition own_rest = union_mask[k] & ~bit;
    const auto inner_w = shapley_weights(structure.unions[k].size());

    std::vector<Coalition> others;
    for (std::size_t j = 0; j < m; ++j)
      if (j != k) others.push_back(union_mask[j]);

    terms.clear();
    const std::size_t outer_count = std::size_t{1} << others.size();
    for (std::size_t r = 0; r < outer_count; ++r) {
      Coalition q = 0;
      for (std::size_t j = 0; j < others.size(); ++j)
        if ((r >> j) & 1U) q |= others[j];
      const double wo = outer_w[std::popcount(r)];
      for_each_subset(own_rest, [&](Coalition s) {
        const double wi = inner_w[std::popcount(s)];
        terms.push_back(wo * wi * (game.value(q | s | bit) - game.value(q | s)));
      });
    }
    credits[i] = order_free_sum(terms);
  }
  return CreditVector::from(std::move(credits));
}

namespace {

struct Level {
  std::vector<Coalition> siblings;
  std::vector<double> weights;  // Shapley weights for a game of siblings+1 blocks
};

Coalition leaf_mask(const HierarchyNode& node) {
  Coalition m = 0;
  for (auto l : node.leaves()) m |= Coalition{1} << l;
  return m;
}

void winter_recurse(const CoalitionGame& game, const HierarchyNode& node, std::vector<Level>& path,
                    std::vector<double>& credits) {
  if (node.is_leaf()) {
    const Coalition bit = Coalition{1} << *node.unit;
    std::size_t combos_log2 = 0;
    for (const auto& lvl : path) combos_log2 += lvl.siblings.size();
    if (combos_log2 > 26) throw Error(Errc::TooManyPlayers, "hierarchy too wide for nested Owen values");

    // Enumerate every choice of sibling blocks along the path as one
    // combined bit pattern, level by level.
    std::vector<double> terms;
    const std::size_t total = std::size_t{1} << combos_log2;
    terms.reserve(total);
    for (std::size_t pattern = 0; pattern < total; ++pattern) {
      Coalition q = 0;
      double weight = 1.0;
      std::size_t shift = 0;
      for (const auto& lvl : path) {
        std::size_t chosen = 0;
        for (std::size_t j = 0; j < lvl.siblings.size(); ++j)
          if ((pattern >> (shift + j)) & 1U) {
            q |= lvl.siblings[j];
            ++chosen;
          }
        weight *= lvl.weights[chosen];
        shift += lvl.siblings.size();
      }
      terms.push_back(weight * (game.value(q | bit) - game.value(q)));
    }
    credits[*node.unit] = order_free_sum(terms);
    return;
  }

  std::vector<Coalition> masks;
  masks.reserve(node.children.size());
  for (const auto& c : node.children) masks.push_back(leaf_mask(c));
  const auto w = shapley_weights(node.children.size());
  for (std::size_t c = 0; c < node.children.size(); ++c) {
    Level lvl;
    lvl.weights = w;
    for (std::size_t j = 0; j < masks.size(); ++j)
      if (j != c) lvl.siblings.push_back(masks[j]);
    path.push_back(std::move(lvl));
    winter_recurse(game, node.children[c], path, credits);
    path.pop_back();
  }
}

}  // namespace

CreditVector hierarchical_owen(const CoalitionGame& game, const CoalitionStructure& structure) {
  const std::size_t n = game.players();
  structure.validate_hierarchy(n);
  std::vector<double> credits(n, 0.0);
  std::vector<Level> path;
  winter_recurse(game, *structure.hierarchy, path, credits);
  return CreditVector::from(std::move(credits));
}

// ---------------------------------------------------------------------------
// Reward assembly

void validate_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw Error(Errc::InvalidAlpha, "alpha must lie in [0, 1], got " + std::to_string(alpha));
}

void RewardTrace::validate() const {
  validate_alpha(alpha);
  if (kl_coefficient < 0.0) throw Error(Errc::InvalidArgument, "KL coefficient must be nonnegative");
  if (horizon == 0) throw Error(Errc::BoundaryError, "horizon must be positive");
  if (unit_end_times.empty()) throw Error(Errc::BoundaryError, "no unit boundaries");
  for (std::size_t i = 0; i < unit_end_times.size(); ++i) {
    if (unit_end_times[i] == 0) throw Error(Errc::BoundaryError, "unit end times are 1-based");
    if (i && unit_end_times[i] <= unit_end_times[i - 1])
      throw Error(Errc::BoundaryError, "unit end times must be strictly increasing");
  }
  if (unit_end_times.back() != horizon)
    throw Error(Errc::BoundaryError, "last unit must end at the horizon");
  if (kl_terms.size() != horizon)
    throw Error(Errc::DimensionError, "KL terms must have one entry per timestep");
}

std::vector<std::size_t> unit_end_times(std::span<const Unit> units) {
  std::vector<std::size_t> ends;
  ends.reserve(units.size());
  for (const auto& u : units) ends.push_back(u.end);
  return ends;
}

std::vector<double> place_rewards(const CreditVector& credits, const RewardTrace& trace) {
  if (credits.values.size() != trace.unit_end_times.size())
    throw Error(Errc::BoundaryError, std::to_string(credits.values.size()) + " credits for " +
                                         std::to_string(trace.unit_end_times.size()) + " unit boundaries");
  if (trace.horizon == 0 || trace.unit_end_times.empty() || trace.unit_end_times.back() != trace.horizon)
    throw Error(Errc::BoundaryError, "last unit must end at the horizon");
  std::vector<double> out(trace.horizon, 0.0);
  for (std::size_t i = 0; i < credits.values.size(); ++i) {
    const std::size_t t = trace.unit_end_times[i];
    if (t == 0 || t > trace.horizon || (i && t <= trace.unit_end_times[i - 1]))
      throw Error(Errc::BoundaryError, "unit end times must be strictly increasing within [1, T]");
    out[t - 1] = credits.values[i];
  }
  return out;
}

std::vector<double> total_reward(const RewardTrace& trace, std::span<const double> shap_rewards) {
  trace.validate();
  if (shap_rewards.size() != trace.horizon)
    throw Error(Errc::DimensionError, "Shapley reward vector must have one entry per timestep");
  const double a = trace.alpha;
  std::vector<double> r(trace.horizon);
  for (std::size_t t = 0; t < trace.horizon; ++t) r[t] = trace.kl_terms[t] + a * shap_rewards[t];
  r.back() += (1.0 - a) * trace.terminal_reward + a * trace.baseline;
  return r;
}

std::vector<double> kl_penalty(std::span<const double> logp_policy, std::span<const double> logp_ref,
                               double beta_kl) {
  if (logp_policy.size() != logp_ref.size())
    throw Error(Errc::DimensionError, "log-probability vectors differ in length");
  if (beta_kl < 0.0) throw Error(Errc::InvalidArgument, "KL coefficient must be nonnegative");
  std::vector<double> out(logp_policy.size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = -beta_kl * (logp_policy[t] - logp_ref[t]);
  return out;
}

void write_credit_csv(std::ostream& out, std::span<const Unit> units, const CreditVector& credits) {
  if (units.size() != credits.values.size())
    throw Error(Errc::BoundaryError, "credit count does not match unit count");
  out << "unit_index,start_t,end_t,credit\n";
  std::ostringstream line;
  line.precision(17);
  for (std::size_t i = 0; i < units.size(); ++i) {
    line.str("");
    line << i << ',' << units[i].begin + 1 << ',' << units[i].end << ',' << credits.values[i] << '\n';
    out << line.str();
  }
}

}  // namespace denserew::scar
