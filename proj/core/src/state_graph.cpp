#include "denserew/state_graph.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "denserew/error.hpp"

namespace denserew::graph {

namespace {

std::string hex(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

double parse_hex(const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0')
    throw Error(Errc::ParseError, "bad number '" + token + "' in graph snapshot");
  return v;
}

void expect(std::istream& in, const std::string& keyword) {
  std::string word;
  if (!(in >> word) || word != keyword)
    throw Error(Errc::ParseError, "expected '" + keyword + "' in graph snapshot, got '" + word + "'");
}

template <typename T>
T read_value(std::istream& in, const char* what) {
  T v{};
  if (!(in >> v)) throw Error(Errc::ParseError, std::string("missing ") + what + " in graph snapshot");
  return v;
}

double read_hex(std::istream& in, const char* what) {
  return parse_hex(read_value<std::string>(in, what));
}

}  // namespace

StateGraph::StateGraph(GraphOptions options)
    : epsilon_d_(options.epsilon_d),
      eviction_(options.eviction),
      sample_interval_(options.sample_interval),
      weights_(std::move(options.feature_weights)),
      dim_(weights_.size()),
      slots_(options.capacity),
      adjacency_(options.capacity, options.capacity) {
  if (options.capacity < 2)
    throw Error(Errc::InvalidCapacity, "graph capacity must be at least 2");
  if (!(epsilon_d_ >= 0.0) || !std::isfinite(epsilon_d_))
    throw Error(Errc::InvalidArgument, "epsilon_d must be finite and nonnegative");
  if (sample_interval_ == 0)
    throw Error(Errc::InvalidArgument, "sample interval must be positive");
  for (double w : weights_)
    if (!(w > 0.0) || !std::isfinite(w))
      throw Error(Errc::InvalidWeights, "feature weights must be finite and positive");
}

StateGraph create_graph(std::size_t capacity, double epsilon_d, EvictionPolicy policy,
                        std::uint64_t sample_interval, std::vector<double> feature_weights) {
  return StateGraph(GraphOptions{capacity, epsilon_d, policy, sample_interval,
                                 std::move(feature_weights)});
}

std::vector<std::size_t> StateGraph::occupied_slots() const {
  std::vector<std::size_t> ids;
  ids.reserve(occupied_);
  for (std::size_t i = 0; i < slots_.size(); ++i)
    if (slots_[i].occupied) ids.push_back(i);
  return ids;
}

bool StateGraph::is_current(const NodeRef& ref) const noexcept {
  return ref.slot < slots_.size() && slots_[ref.slot].occupied &&
         slots_[ref.slot].age == ref.age;
}

NodeRef StateGraph::ref(std::size_t slot_id) const {
  if (slot_id >= slots_.size() || !slots_[slot_id].occupied)
    throw Error(Errc::StaleNode, "slot " + std::to_string(slot_id) + " is not occupied");
  return NodeRef{slot_id, slots_[slot_id].age};
}

void StateGraph::check_dimension(std::size_t n) const {
  if (n == 0) throw Error(Errc::DimensionError, "empty feature vector");
  if (dim_ != 0 && n != dim_)
    throw Error(Errc::DimensionError, "feature has dimension " + std::to_string(n) +
                                          ", graph expects " + std::to_string(dim_));
}

double StateGraph::distance(std::span<const double> a, std::span<const double> b) const {
  if (a.size() != b.size())
    throw Error(Errc::DimensionError, "distance between vectors of different dimension");
  if (!weights_.empty() && a.size() != weights_.size())
    throw Error(Errc::DimensionError, "vector dimension does not match feature weights");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += (weights_.empty() ? 1.0 : weights_[i]) * diff * diff;
  }
  return std::sqrt(s);
}

std::optional<NodeRef> StateGraph::nearest(std::span<const double> feature) const {
  check_dimension(feature.size());
  std::optional<NodeRef> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (!slots_[i].occupied) continue;
    const double d = distance(feature, slots_[i].feature);
    if (d < best_d) {
      best_d = d;
      best = NodeRef{i, slots_[i].age};
    }
  }
  return best;
}

bool StateGraph::far_from_others(std::size_t self, std::span<const double> feature) const {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (i == self || !slots_[i].occupied) continue;
    if (distance(feature, slots_[i].feature) <= epsilon_d_) return false;
  }
  return true;
}

std::size_t StateGraph::pick_victim() const {
  std::size_t victim = slots_.size();
  if (eviction_ == EvictionPolicy::Oldest) {
    std::uint64_t oldest = std::numeric_limits<std::uint64_t>::max();
    for (std::size_t i = 0; i < slots_.size(); ++i)
      if (slots_[i].occupied && slots_[i].age < oldest) {
        oldest = slots_[i].age;
        victim = i;
      }
  } else {
    double weakest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (!slots_[i].occupied) continue;
      double strength = 0.0;
      for (double w : adjacency_.row(i)) strength += w;
      if (strength < weakest) {
        weakest = strength;
        victim = i;
      }
    }
  }
  return victim;
}

void StateGraph::clear_edges(std::size_t slot_id) {
  for (std::size_t j = 0; j < slots_.size(); ++j) {
    adjacency_(slot_id, j) = 0.0;
    adjacency_(j, slot_id) = 0.0;
  }
}

std::size_t StateGraph::insert_into(std::size_t slot_id, std::span<const double> feature) {
  Slot& s = slots_[slot_id];
  if (!s.occupied) ++occupied_;
  s.occupied = true;
  s.feature.assign(feature.begin(), feature.end());
  s.label.reset();
  s.age = next_age_++;
  if (dim_ == 0) dim_ = feature.size();
  change_counter_ += static_cast<double>(slots_.size() - 1);
  return slot_id;
}

ObservationOutcome StateGraph::observe_transition(std::optional<NodeRef> prev,
                                                  std::span<const double> feature) {
  check_dimension(feature.size());
  if (prev && !is_current(*prev))
    throw Error(Errc::StaleNode, "previous node (slot " + std::to_string(prev->slot) +
                                     ") was evicted or never existed");

  ObservationOutcome out;
  if (step_counter_ % sample_interval_ != 0) return out;

  // Relabel case: nearest node within epsilon_d, lowest id on ties.
  std::optional<std::size_t> hit;
  double hit_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (!slots_[i].occupied) continue;
    const double d = distance(feature, slots_[i].feature);
    if (d <= epsilon_d_ && d < hit_d) {
      hit_d = d;
      hit = i;
    }
  }

  if (hit) {
    const std::size_t v = *hit;
    // The node takes the new feature unless that would bring it within
    // epsilon_d of another node.
    if (far_from_others(v, feature)) slots_[v].feature.assign(feature.begin(), feature.end());
    out.kind = ObservationOutcome::Kind::Relabeled;
    out.node = NodeRef{v, slots_[v].age};
    if (prev && prev->slot != v) {
      adjacency_(prev->slot, v) += 1.0;
      adjacency_(v, prev->slot) += 1.0;
      change_counter_ += 1.0;
      out.edge_updated = std::pair{prev->slot, v};
    }
    return out;
  }

  std::size_t target = slots_.size();
  for (std::size_t i = 0; i < slots_.size(); ++i)
    if (!slots_[i].occupied) {
      target = i;
      break;
    }

  if (target == slots_.size()) {
    target = pick_victim();
    clear_edges(target);
    if (prev && prev->slot == target) prev.reset();
    out.kind = ObservationOutcome::Kind::EvictedAndInserted;
    out.evicted_slot = target;
  } else {
    out.kind = ObservationOutcome::Kind::InsertedNew;
  }

  insert_into(target, feature);
  out.node = NodeRef{target, slots_[target].age};
  if (prev) {
    adjacency_(prev->slot, target) = 1.0;
    adjacency_(target, prev->slot) = 1.0;
    out.edge_updated = std::pair{prev->slot, target};
  }
  return out;
}

bool StateGraph::should_train_and_reset(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw Error(Errc::InvalidTolerance, "training tolerance beta must be positive");
  const double n = static_cast<double>(slots_.size());
  if (change_counter_ >= beta * (n * n - n)) {
    change_counter_ = 0.0;
    return true;
  }
  return false;
}

Matrix StateGraph::normalized_adjacency() const {
  const std::size_t n = slots_.size();
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && adjacency_(i, j) > peak) peak = adjacency_(i, j);
  Matrix out(n, n);
  if (peak == 0.0) return out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = adjacency_(i, j) / peak;
  return out;
}

void StateGraph::set_label(const NodeRef& node, double value) {
  if (!is_current(node))
    throw Error(Errc::StaleNode, "cannot label slot " + std::to_string(node.slot) +
                                     ": node was evicted or never existed");
  slots_[node.slot].label = value;
}

void StateGraph::save(std::ostream& out) const {
  const std::size_t n = slots_.size();
  out << "denserew-state-graph 1\n";
  out << "capacity " << n << "\n";
  out << "dimension " << dim_ << "\n";
  out << "epsilon_d " << hex(epsilon_d_) << "\n";
  out << "eviction " << (eviction_ == EvictionPolicy::Oldest ? "oldest" : "weakest") << "\n";
  out << "sample_interval " << sample_interval_ << "\n";
  out << "weights " << weights_.size();
  for (double w : weights_) out << ' ' << hex(w);
  out << "\n";
  out << "counters " << next_age_ << ' ' << step_counter_ << ' ' << hex(change_counter_) << "\n";
  out << "occupied " << occupied_ << "\n";
  for (std::size_t i = 0; i < n; ++i) {
    const Slot& s = slots_[i];
    if (!s.occupied) continue;
    out << "slot " << i << ' ' << s.age << ' ' << (s.label ? hex(*s.label) : std::string("-"));
    for (double f : s.feature) out << ' ' << hex(f);
    out << "\n";
  }
  out << "adjacency\n";
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out << (j ? " " : "") << hex(adjacency_(i, j));
    out << "\n";
  }
}

StateGraph StateGraph::load(std::istream& in) {
  expect(in, "denserew-state-graph");
  if (read_value<int>(in, "version") != 1)
    throw Error(Errc::ParseError, "unsupported graph snapshot version");
  GraphOptions opts;
  expect(in, "capacity");
  opts.capacity = read_value<std::size_t>(in, "capacity");
  expect(in, "dimension");
  const auto dim = read_value<std::size_t>(in, "dimension");
  expect(in, "epsilon_d");
  opts.epsilon_d = read_hex(in, "epsilon_d");
  expect(in, "eviction");
  const auto policy = read_value<std::string>(in, "eviction");
  if (policy == "oldest") opts.eviction = EvictionPolicy::Oldest;
  else if (policy == "weakest") opts.eviction = EvictionPolicy::WeakestConnected;
  else throw Error(Errc::ParseError, "unknown eviction policy '" + policy + "'");
  expect(in, "sample_interval");
  opts.sample_interval = read_value<std::uint64_t>(in, "sample_interval");
  expect(in, "weights");
  const auto nw = read_value<std::size_t>(in, "weight count");
  for (std::size_t i = 0; i < nw; ++i) opts.feature_weights.push_back(read_hex(in, "weight"));

  StateGraph g(std::move(opts));
  g.dim_ = dim;
  expect(in, "counters");
  g.next_age_ = read_value<std::uint64_t>(in, "next age");
  g.step_counter_ = read_value<std::uint64_t>(in, "step counter");
  g.change_counter_ = read_hex(in, "change counter");
  expect(in, "occupied");
  const auto occupied = read_value<std::size_t>(in, "occupied count");
  for (std::size_t k = 0; k < occupied; ++k) {
    expect(in, "slot");
    const auto id = read_value<std::size_t>(in, "slot id");
    if (id >= g.slots_.size()) throw Error(Errc::ParseError, "slot id out of range");
    Slot& s = g.slots_[id];
    s.occupied = true;
    s.age = read_value<std::uint64_t>(in, "age");
    const auto label = read_value<std::string>(in, "label");
    if (label != "-") s.label = parse_hex(label);
    s.feature.resize(dim);
    for (auto& f : s.feature) f = read_hex(in, "feature");
  }
  g.occupied_ = occupied;
  expect(in, "adjacency");
  for (double& a : g.adjacency_.data()) a = read_hex(in, "adjacency entry");
  return g;
}

void StateGraph::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path);
  save(out);
}

StateGraph StateGraph::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read " + path);
  return load(in);
}

bool operator==(const StateGraph& a, const StateGraph& b) {
  if (a.epsilon_d_ != b.epsilon_d_ || a.eviction_ != b.eviction_ ||
      a.sample_interval_ != b.sample_interval_ || a.weights_ != b.weights_ || a.dim_ != b.dim_ ||
      a.occupied_ != b.occupied_ || a.next_age_ != b.next_age_ ||
      a.change_counter_ != b.change_counter_ || a.step_counter_ != b.step_counter_ ||
      !(a.adjacency_ == b.adjacency_) || a.slots_.size() != b.slots_.size())
    return false;
  for (std::size_t i = 0; i < a.slots_.size(); ++i) {
    const auto& x = a.slots_[i];
    const auto& y = b.slots_[i];
    if (x.occupied != y.occupied) return false;
    if (x.occupied && (x.age != y.age || x.label != y.label || x.feature != y.feature)) return false;
  }
  return true;
}

}  // namespace denserew::graph
