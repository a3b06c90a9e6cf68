#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace denserew::scar {

using Token = std::string;

/// Players are indexed 0..N-1 and coalitions are bitmasks over them.
using Coalition = std::uint64_t;
inline constexpr std::size_t kMaxPlayers = 64;
inline constexpr std::size_t kDefaultExactCap = 20;

inline Coalition full_coalition(std::size_t n) {
  return n >= 64 ? ~Coalition{0} : (Coalition{1} << n) - 1;
}

/// Token index range [begin, end) of one text unit.
struct Unit {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t length() const noexcept { return end - begin; }
  friend bool operator==(const Unit&, const Unit&) = default;
};

/// Nested grouping of units; a leaf carries a unit index, an inner node
/// carries children.
struct HierarchyNode {
  std::optional<std::size_t> unit;
  std::vector<HierarchyNode> children;

  static HierarchyNode leaf(std::size_t u) { return HierarchyNode{u, {}}; }
  static HierarchyNode group(std::vector<HierarchyNode> kids) {
    return HierarchyNode{std::nullopt, std::move(kids)};
  }
  bool is_leaf() const noexcept { return unit.has_value(); }
  /// Leaf unit indices in left-to-right order.
  std::vector<std::size_t> leaves() const;
  /// Bracketed form such as "((0 1) (2 3))".
  std::string to_string() const;
  friend bool operator==(const HierarchyNode&, const HierarchyNode&) = default;
};

/// Parses "((0 1) (2 3))"; a bare leaf is just "0".
HierarchyNode parse_bracketing(const std::string& text);

/// Balanced binary hierarchy over units [first, first + count).
HierarchyNode balanced_hierarchy(std::size_t count, std::size_t first = 0);

struct CoalitionStructure {
  std::vector<std::vector<std::size_t>> unions;
  std::optional<HierarchyNode> hierarchy;

  /// Singleton unions {0}, {1}, ...
  static CoalitionStructure singletons(std::size_t n);
  /// One union holding every player.
  static CoalitionStructure grand(std::size_t n);

  /// Throws InvalidPartition if the unions are not a partition of 0..n-1.
  void validate_unions(std::size_t n) const;
  /// Throws InvalidTree if the hierarchy leaves are not 0..n-1 exactly once.
  void validate_hierarchy(std::size_t n) const;
};

struct TokenLevel {};
struct SentenceLevel {
  std::vector<Token> delimiters{".", "!", "?"};
};
struct SpanLevel {
  /// Bracketing over token indices; a balanced binary tree is used if absent.
  std::optional<HierarchyNode> tree;
};
using SegmentStrategy = std::variant<TokenLevel, SentenceLevel, SpanLevel>;

struct Segmentation {
  std::vector<Unit> units;
  CoalitionStructure structure;
};

Segmentation segment(std::span<const Token> tokens, const SegmentStrategy& strategy);

/// Keeps the tokens of units in `members`; every other unit is replaced by
/// the placeholder repeated to the unit's length.
std::vector<Token> render_coalition(std::span<const Token> tokens, std::span<const Unit> units,
                                    Coalition members, const Token& placeholder);

/// Characteristic function with memoisation and baseline subtraction:
/// value(S) = raw(S) - raw(empty), so value(0) is exactly zero.
class CoalitionGame {
 public:
  using Worth = std::function<double(Coalition)>;

  CoalitionGame(std::size_t players, Worth raw_worth);

  std::size_t players() const noexcept { return players_; }
  double value(Coalition members) const;
  double raw_value(Coalition members) const;
  double baseline() const noexcept { return baseline_; }
  double grand_value() const { return value(full_coalition(players_)); }

  /// Number of distinct coalitions the underlying oracle was asked about.
  std::size_t oracle_calls() const;
  /// Every raw evaluation made so far, sorted by coalition.
  std::vector<std::pair<Coalition, double>> evaluations() const;

 private:
  struct Cache {
    std::mutex mutex;
    std::unordered_map<Coalition, double> values;
  };

  std::size_t players_;
  Worth worth_;
  std::shared_ptr<Cache> cache_;
  double baseline_ = 0.0;
};

using SequenceScorer = std::function<double(std::span<const Token>)>;

/// v(S) = scorer(render(S)) - scorer(render(empty)).
CoalitionGame make_text_game(std::vector<Token> tokens, std::vector<Unit> units,
                             Token placeholder, SequenceScorer scorer);

struct CreditVector {
  std::vector<double> values;
  double total = 0.0;

  static CreditVector from(std::vector<double> v);
};

CreditVector exact_shapley(const CoalitionGame& game, std::size_t cap = kDefaultExactCap);
CreditVector owen_value(const CoalitionGame& game, const CoalitionStructure& structure);
/// Nested Owen (Winter) value over the structure's hierarchy.
CreditVector hierarchical_owen(const CoalitionGame& game, const CoalitionStructure& structure);

/// Throws InvalidAlpha unless alpha lies in [0, 1].
void validate_alpha(double alpha);

struct RewardTrace {
  std::size_t horizon = 0;
  /// Completion timestep of every unit, 1-based, strictly increasing, last == horizon.
  std::vector<std::size_t> unit_end_times;
  std::vector<double> kl_terms;
  double terminal_reward = 0.0;
  double alpha = 0.0;
  double kl_coefficient = 0.0;
  /// Raw score of the all-placeholder sequence removed by the game.
  double baseline = 0.0;

  void validate() const;
};

/// Unit completion times t_i = units[i].end for a unit list covering the sequence.
std::vector<std::size_t> unit_end_times(std::span<const Unit> units);

/// Element t-1 holds the Shapley-based reward at timestep t.
std::vector<double> place_rewards(const CreditVector& credits, const RewardTrace& trace);

/// R_t = KL_t + alpha * shap_t + (1 - alpha) * [t = T] * r, plus alpha * baseline at T.
std::vector<double> total_reward(const RewardTrace& trace, std::span<const double> shap_rewards);

std::vector<double> kl_penalty(std::span<const double> logp_policy,
                               std::span<const double> logp_ref, double beta_kl);

/// Header `unit_index,start_t,end_t,credit`.
void write_credit_csv(std::ostream& out, std::span<const Unit> units, const CreditVector& credits);

}  // namespace denserew::scar
