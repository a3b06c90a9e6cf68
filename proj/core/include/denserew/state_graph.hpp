#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "denserew/matrix.hpp"

namespace denserew::graph {

enum class EvictionPolicy { Oldest, WeakestConnected };

/// Handle to an occupied slot. The age doubles as a generation stamp: once
/// a slot is evicted and refilled, old handles to it become stale.
struct NodeRef {
  std::size_t slot = 0;
  std::uint64_t age = 0;
  friend bool operator==(const NodeRef&, const NodeRef&) = default;
};

struct ObservationOutcome {
  enum class Kind { InsertedNew, Relabeled, EvictedAndInserted, SkippedByInterval };

  Kind kind = Kind::SkippedByInterval;
  /// Node now representing the observation (absent when skipped).
  std::optional<NodeRef> node;
  /// Slot that was evicted to make room (EvictedAndInserted only).
  std::optional<std::size_t> evicted_slot;
  /// Edge whose weight changed, as (slot, slot).
  std::optional<std::pair<std::size_t, std::size_t>> edge_updated;
};

struct GraphOptions {
  std::size_t capacity = 0;
  double epsilon_d = 0.0;
  EvictionPolicy eviction = EvictionPolicy::Oldest;
  std::uint64_t sample_interval = 1;
  /// Per-dimension weights of the distance; empty means plain Euclidean.
  std::vector<double> feature_weights;
};

/// Fixed-capacity undirected graph over visited state features.
///
/// Observations either relabel the nearest node within epsilon_d, fill a
/// free slot, or evict a node according to the eviction policy. Edge
/// weights count observed transitions. The change counter accumulates
/// N-1 per node insertion/replacement and 1 per edge increment; it drives
/// the encoder training schedule through should_train_and_reset().
class StateGraph {
 public:
  struct Slot {
    bool occupied = false;
    std::vector<double> feature;
    std::optional<double> label;
    std::uint64_t age = 0;
  };

  explicit StateGraph(GraphOptions options);

  std::size_t capacity() const noexcept { return slots_.size(); }
  /// Feature dimension, 0 until fixed by the weights or the first insert.
  std::size_t dimension() const noexcept { return dim_; }
  double epsilon_d() const noexcept { return epsilon_d_; }
  EvictionPolicy eviction_policy() const noexcept { return eviction_; }
  std::uint64_t sample_interval() const noexcept { return sample_interval_; }
  std::span<const double> feature_weights() const noexcept { return weights_; }

  double change_counter() const noexcept { return change_counter_; }
  std::uint64_t step_counter() const noexcept { return step_counter_; }
  /// Called by the environment loop once per step.
  void advance_step() noexcept { ++step_counter_; }

  std::size_t occupied_count() const noexcept { return occupied_; }
  bool full() const noexcept { return occupied_ == slots_.size(); }
  /// Occupied slot ids in ascending order.
  std::vector<std::size_t> occupied_slots() const;

  const Slot& slot(std::size_t id) const { return slots_.at(id); }
  bool is_current(const NodeRef& ref) const noexcept;
  NodeRef ref(std::size_t slot_id) const;

  double adjacency(std::size_t u, std::size_t v) const { return adjacency_(u, v); }
  const Matrix& adjacency_matrix() const noexcept { return adjacency_; }

  /// Weighted Euclidean distance sqrt(sum_i w_i (a_i - b_i)^2).
  double distance(std::span<const double> a, std::span<const double> b) const;

  /// Nearest occupied node to `feature` (lowest slot id on ties).
  std::optional<NodeRef> nearest(std::span<const double> feature) const;

  ObservationOutcome observe_transition(std::optional<NodeRef> prev,
                                        std::span<const double> feature);

  /// True (and resets the counter) iff c >= beta * (N^2 - N).
  bool should_train_and_reset(double beta);

  /// Adjacency divided by its largest off-diagonal entry; all zeros if the
  /// graph has no edges.
  Matrix normalized_adjacency() const;

  /// Stores a value label on an occupied node (overwrites).
  void set_label(const NodeRef& node, double value);
  std::optional<double> label(std::size_t slot_id) const { return slots_.at(slot_id).label; }

  /// Textual snapshot: every double is written as a hex float so the
  /// round trip is bit-exact.
  void save(std::ostream& out) const;
  static StateGraph load(std::istream& in);
  void save_file(const std::string& path) const;
  static StateGraph load_file(const std::string& path);

  friend bool operator==(const StateGraph& a, const StateGraph& b);

 private:
  void check_dimension(std::size_t n) const;
  std::size_t pick_victim() const;
  std::size_t insert_into(std::size_t slot_id, std::span<const double> feature);
  void clear_edges(std::size_t slot_id);
  bool far_from_others(std::size_t self, std::span<const double> feature) const;

  double epsilon_d_ = 0.0;
  EvictionPolicy eviction_ = EvictionPolicy::Oldest;
  std::uint64_t sample_interval_ = 1;
  std::vector<double> weights_;
  std::size_t dim_ = 0;

  std::vector<Slot> slots_;
  Matrix adjacency_;
  std::size_t occupied_ = 0;
  std::uint64_t next_age_ = 0;
  double change_counter_ = 0.0;
  std::uint64_t step_counter_ = 0;
};

/// Convenience factory mirroring GraphOptions field order.
StateGraph create_graph(std::size_t capacity, double epsilon_d, EvictionPolicy policy,
                        std::uint64_t sample_interval,
                        std::vector<double> feature_weights = {});

}  // namespace denserew::graph
