#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <sstream>
#include <vector>

#include "denserew/error.hpp"
#include "denserew/random.hpp"
#include "denserew/spectral_transfer.hpp"
#include "denserew/transfer_experiment.hpp"

using namespace denserew;
using namespace denserew::spectral;

namespace {

template <class F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no denserew::Error thrown";
  return Errc::InvalidArgument;
}

Matrix random_laplacian(std::size_t n, Rng& rng) {
  Matrix L(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = (j == i + 1 || uniform01(rng) < 0.3) ? uniform(rng, 0.5, 3.0) : 0.0;
      L(i, j) = L(j, i) = -w;
      L(i, i) += w;
      L(j, j) += w;
    }
  return L;
}

Matrix permuted(const Matrix& L, const std::vector<std::size_t>& p) {
  Matrix out(L.rows(), L.cols());
  for (std::size_t i = 0; i < L.rows(); ++i)
    for (std::size_t j = 0; j < L.cols(); ++j) out(i, j) = L(p[i], p[j]);
  return out;
}

graph::StateGraph path3() {
  auto g = graph::create_graph(3, 0.1, graph::EvictionPolicy::Oldest, 1);
  const auto a = *g.observe_transition(std::nullopt, std::vector<double>{0, 0}).node;
  const auto b = *g.observe_transition(a, std::vector<double>{1, 0}).node;
  g.observe_transition(b, std::vector<double>{2, 0});
  return g;
}

graph::StateGraph cycle4() {
  auto g = graph::create_graph(4, 0.1, graph::EvictionPolicy::Oldest, 1);
  const std::vector<std::vector<double>> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  auto prev = g.observe_transition(std::nullopt, pts[0]).node;
  for (int k = 1; k <= 4; ++k) prev = g.observe_transition(prev, pts[k % 4]).node;
  return g;
}

}  // namespace

TEST(Laplacian, PathGraph) {
  const auto g = path3();
  const Matrix L = laplacian(g);
  const Matrix want{[] {
    Matrix m(3, 3);
    m(0, 0) = 1, m(0, 1) = -1;
    m(1, 0) = -1, m(1, 1) = 2, m(1, 2) = -1;
    m(2, 1) = -1, m(2, 2) = 1;
    return m;
  }()};
  EXPECT_EQ(L, want);
  for (std::size_t i = 0; i < 3; ++i) {
    double s = 0.0;
    for (double x : L.row(i)) s += x;
    EXPECT_EQ(s, 0.0);
  }
}

TEST(Laplacian, DoubleEdgeWeight) {
  auto g = graph::create_graph(2, 0.1, graph::EvictionPolicy::Oldest, 1);
  const auto a = *g.observe_transition(std::nullopt, std::vector<double>{0, 0}).node;
  const auto b = *g.observe_transition(a, std::vector<double>{1, 0}).node;
  g.observe_transition(b, std::vector<double>{0, 0});
  const Matrix L = laplacian(g);
  EXPECT_EQ(L(0, 0), 2.0);
  EXPECT_EQ(L(1, 1), 2.0);
  EXPECT_EQ(L(0, 1), -2.0);

  auto lone = graph::create_graph(3, 0.1, graph::EvictionPolicy::Oldest, 1);
  lone.observe_transition(std::nullopt, std::vector<double>{0, 0});
  EXPECT_EQ(code_of([&] { laplacian(lone); }), Errc::InsufficientGraph);
}

TEST(SpectralSummary, DiagonalMatrix) {
  Matrix d(3, 3);
  d(0, 0) = 2, d(1, 1) = 0, d(2, 2) = 5;
  const auto s = spectral_summary(d);
  EXPECT_EQ(s.eigenvalues, (std::vector<double>{5, 2, 0}));
  EXPECT_EQ(s.eigenvectors(2, 0), 1.0);
  EXPECT_EQ(s.eigenvectors(0, 1), 1.0);
  EXPECT_EQ(s.eigenvectors(1, 2), 1.0);
  EXPECT_TRUE(s.distinct);
}

TEST(SpectralSummary, PathSpectrum) {
  const auto s = graph_spectrum(path3());
  ASSERT_EQ(s.size(), 3u);
  EXPECT_NEAR(s.eigenvalues[0], 3.0, 1e-10);
  EXPECT_NEAR(s.eigenvalues[1], 1.0, 1e-10);
  EXPECT_NEAR(s.eigenvalues[2], 0.0, 1e-10);
  EXPECT_EQ(s.node_ids, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(SpectralSummary, SignConvention) {
  Rng rng(2);
  const auto s = spectral_summary(random_laplacian(9, rng));
  for (std::size_t c = 0; c < s.size(); ++c) {
    std::size_t arg = 0;
    for (std::size_t r = 1; r < s.size(); ++r)
      if (std::abs(s.eigenvectors(r, c)) > std::abs(s.eigenvectors(arg, c))) arg = r;
    EXPECT_GT(s.eigenvectors(arg, c), 0.0);
  }
  // Exact tie between |+1/sqrt2| and |-1/sqrt2|: the lower index wins.
  Matrix two(2, 2);
  two(0, 0) = two(1, 1) = 1;
  two(0, 1) = two(1, 0) = -1;
  const auto t = spectral_summary(two);
  EXPECT_GT(t.eigenvectors(0, 0), 0.0);
  EXPECT_GT(t.eigenvectors(0, 1), 0.0);
}

TEST(SpectralSummary, AgreesWithEigen) {
  Rng rng(31);
  for (std::size_t n : {3u, 8u, 20u, 50u}) {
    const Matrix L = random_laplacian(n, rng);
    const auto s = spectral_summary(L);
    Eigen::MatrixXd E(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) E(i, j) = L(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(E);
    const Eigen::VectorXd ev = es.eigenvalues();  // ascending
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(s.eigenvalues[i], ev(n - 1 - i), 1e-9) << n;
  }
}

TEST(SpectralSummary, PsdAndReconstruction) {
  Rng rng(5);
  const std::size_t n = 30;
  const Matrix L = random_laplacian(n, rng);
  const auto s = spectral_summary(L);
  for (double l : s.eigenvalues) EXPECT_GE(l, -1e-10);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double r = 0.0;
      for (std::size_t k = 0; k < n; ++k) r += s.eigenvectors(i, k) * s.eigenvalues[k] * s.eigenvectors(j, k);
      worst = std::max(worst, std::abs(r - L(i, j)));
    }
  EXPECT_LT(worst, 1e-7);
}

TEST(SpectralSummary, Guards) {
  Matrix a(2, 2);
  a(0, 1) = 1.0;
  EXPECT_EQ(code_of([&] { spectral_summary(a); }), Errc::NotSymmetric);
  EXPECT_EQ(code_of([] { spectral_summary(Matrix(2, 3)); }), Errc::NotSymmetric);
}

TEST(Matching, IdentityAndSizeMismatch) {
  Rng rng(9);
  const auto s = spectral_summary(random_laplacian(7, rng));
  EXPECT_EQ(spectrum_distance(s, s), 0.0);
  EXPECT_TRUE(spectra_match(s, s, 1e-12));
  const auto r = match_nodes(s, s, {});
  ASSERT_TRUE(std::holds_alternative<Matched>(r));
  for (const auto& [a, b] : std::get<Matched>(r).pairing) EXPECT_EQ(a, b);

  const auto small = spectral_summary(random_laplacian(4, rng));
  EXPECT_EQ(code_of([&] { spectrum_distance(s, small); }), Errc::SizeMismatch);
}

TEST(Matching, RecoversPermutation) {
  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 5 + uniform_index(rng, 40);
    const Matrix L1 = random_laplacian(n, rng);
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(p[i], p[uniform_index(rng, i + 1)]);
    const auto s1 = spectral_summary(L1);
    const auto s2 = spectral_summary(permuted(L1, p));
    ASSERT_TRUE(s1.distinct);
    EXPECT_LT(spectrum_distance(s1, s2), 1e-12);
    const auto r = match_nodes(s1, s2, {});
    ASSERT_TRUE(std::holds_alternative<Matched>(r)) << match_kind(r);
    const auto& m = std::get<Matched>(r).pairing;
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(m.at(i), p[i]);
  }
}

TEST(Matching, FailureModes) {
  const auto c = graph_spectrum(cycle4());
  EXPECT_FALSE(c.distinct);
  EXPECT_TRUE(std::holds_alternative<RepeatedEigenvalues>(match_nodes(c, c, {})));

  Rng rng(4);
  const auto a = spectral_summary(random_laplacian(6, rng));
  const auto b = spectral_summary(random_laplacian(6, rng));
  const auto r = match_nodes(a, b, {});
  ASSERT_TRUE(std::holds_alternative<SpectraMismatch>(r));
  EXPECT_EQ(std::string(match_kind(r)), "spectra-mismatch");

  // Same spectrum, one eigenvector sign flipped: rows cannot be paired.
  auto flipped = a;
  for (std::size_t r2 = 0; r2 < flipped.size(); ++r2) flipped.eigenvectors(r2, 1) *= -1.0;
  EXPECT_TRUE(std::holds_alternative<RowMatchFailed>(match_nodes(a, flipped, {})));
}

TEST(TransferIntrinsic, LookupChain) {
  auto g1 = path3();
  auto g2 = path3();
  Matched m;
  m.pairing = {{0, 2}, {1, 1}, {2, 0}};
  label_value(g1, g1.ref(2), 3.5);
  const auto labels = node_labels(g1);
  const std::vector<double> at0{0, 0}, at1{1, 0};
  EXPECT_NEAR(transfer_intrinsic(g2, m, labels, at0, 0.2), 0.7, 1e-15);
  EXPECT_EQ(transfer_intrinsic(g2, m, labels, at0, 0.0), 0.0);
  EXPECT_EQ(transfer_intrinsic(g2, m, labels, at1, 0.2), 0.0);
  EXPECT_EQ(code_of([&] { transfer_intrinsic(g2, m, labels, at0, -1.0); }), Errc::InvalidArgument);
}

TEST(LabelValue, OverwriteAndStale) {
  auto g = graph::create_graph(2, 0.1, graph::EvictionPolicy::Oldest, 1);
  const auto a = *g.observe_transition(std::nullopt, std::vector<double>{0, 0}).node;
  label_value(g, a, 1.0);
  EXPECT_EQ(g.label(a.slot), 1.0);
  label_value(g, a, 2.0);
  EXPECT_EQ(g.label(a.slot), 2.0);
  g.observe_transition(a, std::vector<double>{1, 0});
  g.observe_transition(std::nullopt, std::vector<double>{5, 5});  // evicts slot 0
  EXPECT_EQ(code_of([&] { label_value(g, a, 3.0); }), Errc::StaleNode);
}

TEST(TransferExperiment, MazesArePermutationRelated) {
  const auto m1 = GridEnv::parse(transfer_maze_map(), g4rl::RewardMode::Sparse);
  const auto m2 = mirrored(m1);
  EXPECT_EQ(m2.start().x, m1.width() - 1 - m1.start().x);
  const auto s1 = graph_spectrum(survey_graph(m1));
  const auto s2 = graph_spectrum(survey_graph(m2));
  EXPECT_TRUE(s1.distinct);
  EXPECT_LT(spectrum_distance(s1, s2), 1e-12);
  EXPECT_TRUE(std::holds_alternative<Matched>(match_nodes(s1, s2, {})));
}

TEST(TransferExperiment, EpisodesToThreshold) {
  const std::vector<bool> s{false, true, true, true, true};
  EXPECT_EQ(episodes_to_threshold(s, 2, 1.0), 3u);
  EXPECT_EQ(episodes_to_threshold(s, 5, 1.0), 6u);
  EXPECT_EQ(episodes_to_threshold(std::vector<bool>{}, 3, 0.5), 1u);
}

TEST(SpectralCsv, Headers) {
  const auto s = graph_spectrum(path3());
  std::ostringstream ev, vec, mt;
  write_eigenvalues_csv(ev, s);
  write_eigenvectors_csv(vec, s);
  write_match_csv(mt, Matched{{{0, 1}}});
  EXPECT_EQ(ev.str().substr(0, 17), "index,eigenvalue\n");
  EXPECT_EQ(vec.str().substr(0, vec.str().find('\n')), "node_id,v0,v1,v2");
  EXPECT_EQ(mt.str(), "node2_id,node1_id\n0,1\n");
}

TEST(TransferConfig, Validation) {
  TransferConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  auto bad = cfg;
  bad.tolerances.eps_v = 0.0;
  EXPECT_EQ(code_of([&] { bad.validate(); }), Errc::InvalidTolerance);
  bad = cfg;
  bad.beta_transfer = -0.5;
  EXPECT_EQ(code_of([&] { bad.validate(); }), Errc::InvalidArgument);
  bad = cfg;
  bad.target.gamma = 1.0;
  EXPECT_EQ(code_of([&] { bad.validate(); }), Errc::InvalidArgument);
  bad = cfg;
  bad.threshold = 0.0;
  EXPECT_EQ(code_of([&] { bad.validate(); }), Errc::InvalidArgument);
}
