#include "denserew/graph_autoencoder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "denserew/error.hpp"

namespace denserew::graph {

std::vector<std::size_t> EncoderParams::layer_dims() const {
  std::vector<std::size_t> dims;
  if (layers.empty()) return dims;
  dims.push_back(layers.front().inputs());
  for (const auto& l : layers) dims.push_back(l.outputs());
  return dims;
}

std::size_t EncoderParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.data().size() + l.bias.size();
  return n;
}

std::vector<double> EncoderParams::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& l : layers) {
    out.insert(out.end(), l.weights.data().begin(), l.weights.data().end());
    out.insert(out.end(), l.bias.begin(), l.bias.end());
  }
  return out;
}

void EncoderParams::unflatten(std::span<const double> values) {
  if (values.size() != parameter_count())
    throw Error(Errc::DimensionError, "parameter vector has the wrong length");
  std::size_t k = 0;
  for (auto& l : layers) {
    for (double& w : l.weights.data()) w = values[k++];
    for (double& b : l.bias) b = values[k++];
  }
}

void EncoderParams::validate() const {
  if (layers.empty()) throw Error(Errc::DimensionError, "encoder has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.inputs() == 0 || l.outputs() == 0 || l.bias.size() != l.outputs())
      throw Error(Errc::DimensionError, "malformed encoder layer " + std::to_string(i));
    if (i > 0 && layers[i - 1].outputs() != l.inputs())
      throw Error(Errc::DimensionError, "encoder layers " + std::to_string(i - 1) + " and " +
                                            std::to_string(i) + " do not chain");
  }
}

EncoderParams init_encoder(std::span<const std::size_t> layer_dims, std::uint64_t seed) {
  if (layer_dims.size() < 2) throw Error(Errc::DimensionError, "need at least input and output dims");
  for (auto d : layer_dims)
    if (d == 0) throw Error(Errc::DimensionError, "layer widths must be positive");
  Rng rng(seed);
  EncoderParams p;
  for (std::size_t i = 1; i < layer_dims.size(); ++i) {
    DenseLayer l{Matrix(layer_dims[i], layer_dims[i - 1]), std::vector<double>(layer_dims[i], 0.0)};
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer_dims[i - 1]));
    for (double& w : l.weights.data()) w = uniform(rng, -scale, scale);
    p.layers.push_back(std::move(l));
  }
  return p;
}

EncoderParams default_encoder(std::size_t feature_dim, std::uint64_t seed,
                              std::size_t embedding_dim) {
  const std::size_t m = embedding_dim == 0 ? feature_dim : embedding_dim;
  const std::size_t dims[] = {feature_dim, 64, 64, m};
  return init_encoder(dims, seed);
}

namespace {

// Activations of every layer for one input; acts[0] is the input itself.
struct ForwardTrace {
  std::vector<std::vector<double>> acts;
};

ForwardTrace forward(const EncoderParams& params, std::span<const double> x) {
  ForwardTrace t;
  t.acts.reserve(params.layers.size() + 1);
  t.acts.emplace_back(x.begin(), x.end());
  for (std::size_t li = 0; li < params.layers.size(); ++li) {
    const auto& l = params.layers[li];
    const auto& in = t.acts.back();
    std::vector<double> out(l.outputs());
    for (std::size_t r = 0; r < l.outputs(); ++r) out[r] = l.bias[r] + dot(l.weights.row(r), in);
    if (li + 1 < params.layers.size())
      for (double& v : out) v = std::tanh(v);
    t.acts.push_back(std::move(out));
  }
  return t;
}

void backward(const EncoderParams& params, const ForwardTrace& t, std::vector<double> delta,
              EncoderParams& grad) {
  for (std::size_t li = params.layers.size(); li-- > 0;) {
    const auto& l = params.layers[li];
    auto& g = grad.layers[li];
    const auto& in = t.acts[li];
    for (std::size_t r = 0; r < l.outputs(); ++r) {
      const double d = delta[r];
      if (d == 0.0) continue;
      g.bias[r] += d;
      auto grow = g.weights.row(r);
      for (std::size_t c = 0; c < in.size(); ++c) grow[c] += d * in[c];
    }
    if (li == 0) break;
    std::vector<double> prev(l.inputs(), 0.0);
    for (std::size_t r = 0; r < l.outputs(); ++r) {
      const double d = delta[r];
      if (d == 0.0) continue;
      auto wrow = l.weights.row(r);
      for (std::size_t c = 0; c < prev.size(); ++c) prev[c] += wrow[c] * d;
    }
    for (std::size_t c = 0; c < prev.size(); ++c) prev[c] *= 1.0 - in[c] * in[c];
    delta = std::move(prev);
  }
}

void check_pairs(const StateGraph& graph, std::span<const NodePair> pairs) {
  if (pairs.empty()) throw Error(Errc::EmptySample, "no node pairs to evaluate");
  for (const auto& [u, v] : pairs) {
    if (u == v) throw Error(Errc::InvalidArgument, "diagonal pair in reconstruction sample");
    if (u >= graph.capacity() || v >= graph.capacity() || !graph.slot(u).occupied ||
        !graph.slot(v).occupied)
      throw Error(Errc::StaleNode, "reconstruction pair refers to an empty slot");
  }
}

EncoderParams zeros_like(const EncoderParams& p) {
  EncoderParams z = p;
  for (auto& l : z.layers) {
    std::fill(l.weights.data().begin(), l.weights.data().end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
  return z;
}

}  // namespace

std::vector<double> encode(const EncoderParams& params, std::span<const double> feature) {
  if (params.layers.empty() || feature.size() != params.input_dim())
    throw Error(Errc::DimensionError, "encoder expects input dimension " +
                                          std::to_string(params.layers.empty() ? 0 : params.input_dim()) +
                                          ", got " + std::to_string(feature.size()));
  return std::move(forward(params, feature).acts.back());
}

double decode(std::span<const double> gu, std::span<const double> gv) {
  if (gu.size() != gv.size())
    throw Error(Errc::DimensionError, "decoder inputs have different dimensions");
  return dot(gu, gv);
}

std::vector<NodePair> all_occupied_pairs(const StateGraph& graph) {
  const auto ids = graph.occupied_slots();
  std::vector<NodePair> pairs;
  pairs.reserve(ids.size() * (ids.size() - (ids.empty() ? 0 : 1)) / 2);
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j) pairs.emplace_back(ids[i], ids[j]);
  return pairs;
}

double reconstruction_loss(const EncoderParams& params, const StateGraph& graph,
                           std::span<const NodePair> pairs) {
  check_pairs(graph, pairs);
  const Matrix target = graph.normalized_adjacency();
  std::vector<std::vector<double>> emb(graph.capacity());
  auto embedding = [&](std::size_t id) -> const std::vector<double>& {
    if (emb[id].empty()) emb[id] = encode(params, graph.slot(id).feature);
    return emb[id];
  };
  double loss = 0.0;
  for (const auto& [u, v] : pairs) {
    const double r = decode(embedding(u), embedding(v)) - target(u, v);
    loss += r * r;
  }
  return loss;
}

LossGradient reconstruction_loss_gradient(const EncoderParams& params, const StateGraph& graph,
                                          std::span<const NodePair> pairs) {
  check_pairs(graph, pairs);
  params.validate();
  const Matrix target = graph.normalized_adjacency();
  const std::size_t n = graph.capacity();

  std::vector<ForwardTrace> traces(n);
  std::vector<bool> used(n, false);
  for (const auto& [u, v] : pairs) used[u] = used[v] = true;
  for (std::size_t i = 0; i < n; ++i)
    if (used[i]) {
      const auto& f = graph.slot(i).feature;
      if (f.size() != params.input_dim())
        throw Error(Errc::DimensionError, "node feature does not match encoder input");
      traces[i] = forward(params, f);
    }

  // dL/dg for each node: sum over its pairs of 2 r g_other.
  const std::size_t m = params.output_dim();
  std::vector<std::vector<double>> dg(n);
  LossGradient out{0.0, zeros_like(params)};
  for (const auto& [u, v] : pairs) {
    const auto& gu = traces[u].acts.back();
    const auto& gv = traces[v].acts.back();
    const double r = dot(gu, gv) - target(u, v);
    out.loss += r * r;
    if (dg[u].empty()) dg[u].assign(m, 0.0);
    if (dg[v].empty()) dg[v].assign(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      dg[u][k] += 2.0 * r * gv[k];
      dg[v][k] += 2.0 * r * gu[k];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (used[i]) backward(params, traces[i], std::move(dg[i]), out.gradient);
  return out;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw Error(Errc::InvalidArgument, "learning rate must be positive");
  if (steps_per_phase == 0) throw Error(Errc::InvalidArgument, "steps_per_phase must be positive");
  if (!(pair_fraction > 0.0 && pair_fraction <= 1.0))
    throw Error(Errc::InvalidArgument, "pair fraction must lie in (0, 1]");
}

EncoderParams train_phase(EncoderParams params, const StateGraph& graph,
                          const TrainConfig& config, Rng& rng) {
  config.validate();
  if (graph.occupied_count() < 2)
    throw Error(Errc::InsufficientData, "training needs at least two occupied nodes");
  const auto all = all_occupied_pairs(graph);
  const std::size_t take = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(config.pair_fraction * static_cast<double>(all.size()))),
      1, all.size());

  std::vector<NodePair> sample = all;
  for (std::size_t step = 0; step < config.steps_per_phase; ++step) {
    std::span<const NodePair> batch = all;
    if (take < all.size()) {
      // Partial Fisher-Yates: the first `take` entries become the sample.
      sample = all;
      for (std::size_t i = 0; i < take; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_index(rng, sample.size() - i));
        std::swap(sample[i], sample[j]);
      }
      batch = std::span<const NodePair>(sample.data(), take);
    }
    const auto lg = reconstruction_loss_gradient(params, graph, batch);
    for (std::size_t li = 0; li < params.layers.size(); ++li) {
      auto w = params.layers[li].weights.data();
      auto gw = lg.gradient.layers[li].weights.data();
      for (std::size_t k = 0; k < w.size(); ++k) w[k] -= config.learning_rate * gw[k];
      auto& b = params.layers[li].bias;
      const auto& gb = lg.gradient.layers[li].bias;
      for (std::size_t k = 0; k < b.size(); ++k) b[k] -= config.learning_rate * gb[k];
    }
  }
  return params;
}

EncoderParams train_phase(EncoderParams params, const StateGraph& graph,
                          const TrainConfig& config) {
  Rng rng(config.rng_seed);
  return train_phase(std::move(params), graph, config, rng);
}

namespace {

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r = (r << 8) | ((v >> (8 * i)) & 0xFF);
    return r;
  }
  return v;
}

}  // namespace

void save_checkpoint(const EncoderParams& params, std::ostream& out) {
  params.validate();
  const auto dims = params.layer_dims();
  out << "denserew-encoder 1 " << params.layers.size();
  for (auto d : dims) out << ' ' << d;
  out << '\n';
  for (double v : params.flatten()) {
    const auto bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.write(buf, 8);
  }
  if (!out) throw Error(Errc::IoError, "failed writing encoder checkpoint");
}

EncoderParams load_checkpoint(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw Error(Errc::ParseError, "empty checkpoint");
  std::istringstream hs(header);
  std::string magic;
  int version = 0;
  std::size_t nlayers = 0;
  if (!(hs >> magic >> version >> nlayers) || magic != "denserew-encoder" || version != 1 ||
      nlayers == 0)
    throw Error(Errc::ParseError, "not a denserew encoder checkpoint");
  std::vector<std::size_t> dims(nlayers + 1);
  for (auto& d : dims)
    if (!(hs >> d) || d == 0) throw Error(Errc::ParseError, "bad layer dims in checkpoint header");

  EncoderParams p;
  for (std::size_t i = 1; i < dims.size(); ++i)
    p.layers.push_back({Matrix(dims[i], dims[i - 1]), std::vector<double>(dims[i])});
  std::vector<double> values(p.parameter_count());
  for (double& v : values) {
    char buf[8];
    if (!in.read(buf, 8)) throw Error(Errc::ParseError, "truncated checkpoint payload");
    std::uint64_t bits = 0;
    std::memcpy(&bits, buf, 8);
    v = std::bit_cast<double>(to_little_endian(bits));
  }
  p.unflatten(values);
  return p;
}

void save_checkpoint_file(const EncoderParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path);
  save_checkpoint(params, out);
}

EncoderParams load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read " + path);
  return load_checkpoint(in);
}

}  // namespace denserew::graph
