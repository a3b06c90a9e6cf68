#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "denserew/matrix.hpp"
#include "denserew/state_graph.hpp"

namespace denserew::spectral {

/// L = D - A over the occupied slots of `graph`, in ascending slot order,
/// using the raw edge weights.
Matrix laplacian(const graph::StateGraph& graph);

struct SpectralSummary {
  /// Descending.
  std::vector<double> eigenvalues;
  /// Column i pairs with eigenvalues[i]; each column's largest-magnitude
  /// entry is positive (lowest index wins a tie).
  Matrix eigenvectors;
  bool distinct = false;
  /// Graph node behind every row; 0..n-1 when built from a bare matrix.
  std::vector<std::size_t> node_ids;

  std::size_t size() const noexcept { return eigenvalues.size(); }
};

/// Relative gap tolerance used when none is given: 1e-6 times the spectral radius.
inline constexpr double kDefaultRelativeGap = 1e-6;

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. `gap_tol` is
/// absolute; a negative value selects kDefaultRelativeGap * spectral radius.
SpectralSummary spectral_summary(const Matrix& L, double gap_tol = -1.0);

/// Laplacian summary of a graph with node_ids filled from its occupied slots.
SpectralSummary graph_spectrum(const graph::StateGraph& graph, double gap_tol = -1.0);

/// Sum of squared differences of the sorted spectra.
double spectrum_distance(const SpectralSummary& s1, const SpectralSummary& s2);
bool spectra_match(const SpectralSummary& s1, const SpectralSummary& s2, double eps_lambda);

struct Matched {
  /// node in graph 2 -> node in graph 1.
  std::map<std::size_t, std::size_t> pairing;
};
struct SpectraMismatch {
  double distance = 0.0;
};
struct RowMatchFailed {
  /// Graph-2 node whose row had no unmatched partner within eps_v.
  std::size_t node = 0;
  double nearest = 0.0;
};
struct RepeatedEigenvalues {};

using MatchResult = std::variant<Matched, SpectraMismatch, RowMatchFailed, RepeatedEigenvalues>;

struct MatchTolerances {
  double eps_lambda = 1e-6;
  double eps_v = 1e-6;
};

/// Greedy injective row matching of V2 against V1. Spectra are re-checked
/// against tol.eps_lambda first.
MatchResult match_nodes(const SpectralSummary& s1, const SpectralSummary& s2,
                        const MatchTolerances& tol);

const char* match_kind(const MatchResult& r);

/// Labels of every labelled occupied node of `graph`, keyed by slot.
std::map<std::size_t, double> node_labels(const graph::StateGraph& graph);

/// beta * y(s_e1) where s_e2 is the graph-2 node nearest to phi_next and
/// s_e1 its partner; 0 when the partner has no label.
double transfer_intrinsic(const graph::StateGraph& graph2, const Matched& match,
                          const std::map<std::size_t, double>& labels1,
                          std::span<const double> phi_next, double beta_transfer);

/// Overwrites the node's value label.
void label_value(graph::StateGraph& graph, const graph::NodeRef& node, double value);

/// Header `index,eigenvalue`.
void write_eigenvalues_csv(std::ostream& out, const SpectralSummary& s);
/// Header `node_id,v0,...,v{n-1}`; one row of V per line.
void write_eigenvectors_csv(std::ostream& out, const SpectralSummary& s);
/// Header `node2_id,node1_id`.
void write_match_csv(std::ostream& out, const Matched& m);

}  // namespace denserew::spectral
