#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "denserew/matrix.hpp"
#include "denserew/random.hpp"
#include "denserew/state_graph.hpp"

namespace denserew::graph {

/// One affine layer, weights stored row-major as (out x in).
struct DenseLayer {
  Matrix weights;
  std::vector<double> bias;

  std::size_t inputs() const noexcept { return weights.cols(); }
  std::size_t outputs() const noexcept { return weights.rows(); }
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Feed-forward encoder: tanh between layers, linear output.
struct EncoderParams {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const { return layers.front().inputs(); }
  std::size_t output_dim() const { return layers.back().outputs(); }
  std::vector<std::size_t> layer_dims() const;
  std::size_t parameter_count() const;

  /// Each layer in turn: row-major weights, then bias (the checkpoint order).
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> values);

  /// Throws DimensionError when consecutive layer shapes do not chain.
  void validate() const;

  friend bool operator==(const EncoderParams&, const EncoderParams&) = default;
};

/// Layer widths [d, h_1, ..., h_L, m]; weights uniform in +-1/sqrt(fan_in),
/// zero biases.
EncoderParams init_encoder(std::span<const std::size_t> layer_dims, std::uint64_t seed);

/// Default architecture: two hidden layers of width 64, output dim = input dim.
EncoderParams default_encoder(std::size_t feature_dim, std::uint64_t seed,
                              std::size_t embedding_dim = 0);

std::vector<double> encode(const EncoderParams& params, std::span<const double> feature);

/// Inner-product decoder.
double decode(std::span<const double> gu, std::span<const double> gv);

using NodePair = std::pair<std::size_t, std::size_t>;

/// All unordered pairs (u < v) of occupied slots.
std::vector<NodePair> all_occupied_pairs(const StateGraph& graph);

/// Sum over the given unordered pairs of (D(E(phi_u), E(phi_v)) - Ahat_uv)^2.
double reconstruction_loss(const EncoderParams& params, const StateGraph& graph,
                           std::span<const NodePair> pairs);

struct LossGradient {
  double loss = 0.0;
  /// Same shapes as the parameters.
  EncoderParams gradient;
};

/// Loss and its analytic gradient by backpropagation.
LossGradient reconstruction_loss_gradient(const EncoderParams& params, const StateGraph& graph,
                                          std::span<const NodePair> pairs);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t steps_per_phase = 1;
  /// Fraction of all occupied pairs sampled per step, in (0, 1].
  double pair_fraction = 1.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Runs steps_per_phase plain gradient-descent steps starting from `params`.
/// Each step samples a fresh subset of pairs using `rng`.
EncoderParams train_phase(EncoderParams params, const StateGraph& graph,
                          const TrainConfig& config, Rng& rng);

/// Same, with the pair sampler seeded from config.rng_seed.
EncoderParams train_phase(EncoderParams params, const StateGraph& graph,
                          const TrainConfig& config);

// Checkpoint: one text header line "denserew-encoder 1 <k> <d_0> ... <d_k>"
// followed by the raw little-endian float64 payload in flatten() order.
void save_checkpoint(const EncoderParams& params, std::ostream& out);
EncoderParams load_checkpoint(std::istream& in);
void save_checkpoint_file(const EncoderParams& params, const std::string& path);
EncoderParams load_checkpoint_file(const std::string& path);

}  // namespace denserew::graph
