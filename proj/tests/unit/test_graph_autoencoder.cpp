#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "denserew/error.hpp"
#include "denserew/graph_autoencoder.hpp"
#include "oracles.hpp"

using namespace denserew;
using namespace denserew::graph;

namespace {

EncoderParams identity_encoder(std::size_t d) {
  EncoderParams p;
  p.layers.push_back(DenseLayer{Matrix::identity(d), std::vector<double>(d, 0.0)});
  return p;
}

StateGraph three_node_graph() {
  // Features (1,0), (0,1), (1,1); edges 0-1 twice, 1-2 once, 0-2 never.
  auto g = create_graph(3, 0.1, EvictionPolicy::Oldest, 1);
  const std::vector<double> a{1, 0}, b{0, 1}, c{1, 1};
  const auto n0 = *g.observe_transition(std::nullopt, a).node;
  const auto n1 = *g.observe_transition(n0, b).node;
  g.observe_transition(n1, a);
  g.observe_transition(n1, c);
  return g;
}

}  // namespace

TEST(GraphAutoencoder, EncodeTrivialNetworks) {
  const std::vector<double> phi{0.3, -1.5, 2.0};
  EXPECT_EQ(encode(identity_encoder(3), phi), phi);

  EncoderParams zero;
  zero.layers.push_back(DenseLayer{Matrix(4, 3), std::vector<double>(4, 0.0)});
  zero.layers.push_back(DenseLayer{Matrix(2, 4), std::vector<double>(2, 0.0)});
  EXPECT_EQ(encode(zero, phi), (std::vector<double>{0.0, 0.0}));

  try {
    encode(identity_encoder(2), phi);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DimensionError);
  }
}

TEST(GraphAutoencoder, Decode) {
  EXPECT_EQ(decode(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
  EXPECT_EQ(decode(std::vector<double>{1, 2}, std::vector<double>{3, 4}), 11.0);
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    std::vector<double> a(6), b(6);
    for (auto& x : a) x = uniform(rng, -3, 3);
    for (auto& x : b) x = uniform(rng, -3, 3);
    EXPECT_EQ(decode(a, b), decode(b, a));
  }
  EXPECT_THROW(decode(std::vector<double>{1}, std::vector<double>{1, 2}), Error);
}

TEST(GraphAutoencoder, LossByHand) {
  const auto g = three_node_graph();
  ASSERT_EQ(g.adjacency(0, 1), 2.0);
  ASSERT_EQ(g.adjacency(1, 2), 1.0);
  const auto pairs = all_occupied_pairs(g);
  ASSERT_EQ(pairs.size(), 3u);
  // Identity encoder: D = phi_u . phi_v; Ahat = {01: 1, 12: 0.5, 02: 0}.
  // Residuals: (0 - 1), (1 - 0.5), (1 - 0) -> 1 + 0.25 + 1.
  EXPECT_DOUBLE_EQ(reconstruction_loss(identity_encoder(2), g, pairs), 2.25);

  const std::vector<NodePair> one{{0, 1}};
  EXPECT_DOUBLE_EQ(reconstruction_loss(identity_encoder(2), g, one), 1.0);
  EXPECT_THROW(reconstruction_loss(identity_encoder(2), g, std::vector<NodePair>{}), Error);
}

TEST(GraphAutoencoder, PerfectFitIsStationary) {
  // (1,0).(1,1) = 1 and the single edge normalises to 1.
  auto g = create_graph(2, 0.1, EvictionPolicy::Oldest, 1);
  const auto n0 = *g.observe_transition(std::nullopt, std::vector<double>{1, 0}).node;
  g.observe_transition(n0, std::vector<double>{1, 1});
  const auto p = identity_encoder(2);
  EXPECT_EQ(reconstruction_loss(p, g, all_occupied_pairs(g)), 0.0);
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.steps_per_phase = 3;
  EXPECT_EQ(train_phase(p, g, cfg), p);
}

TEST(GraphAutoencoder, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto g = oracle::random_graph(seed);
    const std::vector<std::size_t> dims{2, 5, 4, 2};
    const auto params = init_encoder(dims, seed * 7);
    const auto lg = reconstruction_loss_gradient(params, g, all_occupied_pairs(g));
    const auto analytic = lg.gradient.flatten();
    const auto theta = params.flatten();
    const auto fd = oracle::fd_gradient(dims, theta, g);
    ASSERT_EQ(analytic.size(), fd.size());
    const std::vector<long double> theta_ld(theta.begin(), theta.end());
    EXPECT_NEAR(lg.loss, static_cast<double>(oracle::loss(dims, theta_ld, g)), 1e-12);
    for (std::size_t i = 0; i < fd.size(); ++i) {
      const double rel = std::abs(analytic[i] - static_cast<double>(fd[i])) / (std::abs(analytic[i]) + 1e-12);
      EXPECT_LT(rel, 1e-5) << "seed " << seed << " parameter " << i;
    }
  }
}

TEST(GraphAutoencoder, FullBatchDescentDoesNotIncreaseLoss) {
  const auto g = oracle::random_graph(3);
  auto p = default_encoder(2, 11);
  const auto pairs = all_occupied_pairs(g);
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  double last = reconstruction_loss(p, g, pairs);
  for (int k = 0; k < 50; ++k) {
    p = train_phase(p, g, cfg);
    const double now = reconstruction_loss(p, g, pairs);
    EXPECT_LE(now, last);
    last = now;
  }
}

TEST(GraphAutoencoder, WarmStartChains) {
  const auto g = oracle::random_graph(4);
  const auto p0 = default_encoder(2, 3);
  TrainConfig one;
  one.learning_rate = 1e-2;
  TrainConfig two = one;
  two.steps_per_phase = 2;
  EXPECT_EQ(train_phase(train_phase(p0, g, one), g, one), train_phase(p0, g, two));

  auto tiny = create_graph(3, 0.1, EvictionPolicy::Oldest, 1);
  tiny.observe_transition(std::nullopt, std::vector<double>{0, 0});
  try {
    train_phase(p0, tiny, one);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InsufficientData);
  }
}

TEST(GraphAutoencoder, PairSubsamplingIsSeeded) {
  const auto g = oracle::random_graph(6);
  const auto p0 = default_encoder(2, 1);
  TrainConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.pair_fraction = 0.5;
  cfg.rng_seed = 42;
  EXPECT_EQ(train_phase(p0, g, cfg), train_phase(p0, g, cfg));
  cfg.pair_fraction = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(GraphAutoencoder, CheckpointRoundTripIsBitExact) {
  const auto p = default_encoder(3, 99, 4);
  EXPECT_EQ(p.layer_dims(), (std::vector<std::size_t>{3, 64, 64, 4}));
  std::stringstream buf;
  save_checkpoint(p, buf);
  EXPECT_EQ(load_checkpoint(buf), p);
  std::istringstream bad("not a checkpoint\n");
  EXPECT_THROW(load_checkpoint(bad), Error);
}
