#include "denserew/spectral_transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "denserew/error.hpp"

namespace denserew::spectral {

Matrix laplacian(const graph::StateGraph& graph) {
  const auto ids = graph.occupied_slots();
  if (ids.size() < 2) throw Error(Errc::InsufficientGraph, "Laplacian needs at least two occupied nodes");
  const std::size_t n = ids.size();
  Matrix L(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double a = graph.adjacency(ids[i], ids[j]);
      L(i, j) = -a;
      L(i, i) += a;
    }
  return L;
}

namespace {

void jacobi(Matrix& A, Matrix& V) {
  const std::size_t n = A.rows();
  double norm2 = 0.0;
  for (double x : A.data()) norm2 += x * x;
  const double stop = norm2 * 1e-32;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * A(p, q) * A(p, q);
    if (off <= stop) return;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        A(p, q) = A(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
  }
}

}  // namespace

SpectralSummary spectral_summary(const Matrix& L, double gap_tol) {
  const std::size_t n = L.rows();
  if (n == 0 || L.cols() != n) throw Error(Errc::NotSymmetric, "matrix must be square and non-empty");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!(std::abs(L(i, j) - L(j, i)) <= 1e-10))
        throw Error(Errc::NotSymmetric, "matrix is not symmetric at (" + std::to_string(i) + ", " +
                                            std::to_string(j) + ")");

  Matrix A = L;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) A(i, j) = A(j, i) = 0.5 * (L(i, j) + L(j, i));
  Matrix V = Matrix::identity(n);
  jacobi(A, V);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return A(a, a) > A(b, b); });

  SpectralSummary s;
  s.eigenvalues.resize(n);
  s.eigenvectors = Matrix(n, n);
  s.node_ids.resize(n);
  std::iota(s.node_ids.begin(), s.node_ids.end(), 0);
  for (std::size_t c = 0; c < n; ++c) {
    s.eigenvalues[c] = A(order[c], order[c]);
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double m = std::abs(V(r, order[c]));
      if (m > best) {
        best = m;
        arg = r;
      }
    }
    const double sign = V(arg, order[c]) < 0.0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < n; ++r) s.eigenvectors(r, c) = sign * V(r, order[c]);
  }

  double radius = 0.0;
  for (double l : s.eigenvalues) radius = std::max(radius, std::abs(l));
  const double tol = gap_tol >= 0.0 ? gap_tol : kDefaultRelativeGap * radius;
  s.distinct = true;
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(s.eigenvalues[i] - s.eigenvalues[i + 1] > tol)) s.distinct = false;
  return s;
}

SpectralSummary graph_spectrum(const graph::StateGraph& graph, double gap_tol) {
  auto s = spectral_summary(laplacian(graph), gap_tol);
  s.node_ids = graph.occupied_slots();
  return s;
}

double spectrum_distance(const SpectralSummary& s1, const SpectralSummary& s2) {
  if (s1.size() != s2.size())
    throw Error(Errc::SizeMismatch, "spectra have different sizes (" + std::to_string(s1.size()) +
                                        " vs " + std::to_string(s2.size()) + ")");
  double d = 0.0;
  for (std::size_t i = 0; i < s1.size(); ++i) {
    const double diff = s1.eigenvalues[i] - s2.eigenvalues[i];
    d += diff * diff;
  }
  return d;
}

bool spectra_match(const SpectralSummary& s1, const SpectralSummary& s2, double eps_lambda) {
  return spectrum_distance(s1, s2) <= eps_lambda;
}

MatchResult match_nodes(const SpectralSummary& s1, const SpectralSummary& s2, const MatchTolerances& tol) {
  if (s1.size() != s2.size()) return SpectraMismatch{std::numeric_limits<double>::infinity()};
  const double dist = spectrum_distance(s1, s2);
  if (!(dist <= tol.eps_lambda)) return SpectraMismatch{dist};
  if (!s1.distinct || !s2.distinct) return RepeatedEigenvalues{};

  const std::size_t n = s1.size();
  std::vector<bool> taken(n, false);
  Matched m;
  for (std::size_t r2 = 0; r2 < n; ++r2) {
    const auto row2 = s2.eigenvectors.row(r2);
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = n;
    for (std::size_t r1 = 0; r1 < n; ++r1) {
      if (taken[r1]) continue;
      const auto row1 = s1.eigenvectors.row(r1);
      double d2 = 0.0;
      for (std::size_t k = 0; k < n; ++k) d2 += (row1[k] - row2[k]) * (row1[k] - row2[k]);
      if (d2 < best) {
        best = d2;
        arg = r1;
      }
    }
    const double d = std::sqrt(best);
    if (arg == n || !(d <= tol.eps_v)) return RowMatchFailed{s2.node_ids[r2], d};
    taken[arg] = true;
    m.pairing[s2.node_ids[r2]] = s1.node_ids[arg];
  }
  return m;
}

const char* match_kind(const MatchResult& r) {
  switch (r.index()) {
    case 0: return "matched";
    case 1: return "spectra-mismatch";
    case 2: return "row-match-failed";
    default: return "repeated-eigenvalues";
  }
}

std::map<std::size_t, double> node_labels(const graph::StateGraph& graph) {
  std::map<std::size_t, double> out;
  for (std::size_t id : graph.occupied_slots())
    if (auto y = graph.label(id)) out[id] = *y;
  return out;
}

double transfer_intrinsic(const graph::StateGraph& graph2, const Matched& match,
                          const std::map<std::size_t, double>& labels1,
                          std::span<const double> phi_next, double beta_transfer) {
  if (!(beta_transfer >= 0.0)) throw Error(Errc::InvalidArgument, "beta_transfer must be >= 0");
  const auto e2 = graph2.nearest(phi_next);
  if (!e2) throw Error(Errc::InsufficientGraph, "graph 2 has no occupied nodes");
  const auto pair = match.pairing.find(e2->slot);
  if (pair == match.pairing.end()) return 0.0;
  const auto y = labels1.find(pair->second);
  if (y == labels1.end()) return 0.0;
  return beta_transfer * y->second;
}

void label_value(graph::StateGraph& graph, const graph::NodeRef& node, double value) {
  graph.set_label(node, value);
}

void write_eigenvalues_csv(std::ostream& out, const SpectralSummary& s) {
  const auto p = out.precision(17);
  out << "index,eigenvalue\n";
  for (std::size_t i = 0; i < s.size(); ++i) out << i << ',' << s.eigenvalues[i] << '\n';
  out.precision(p);
}

void write_eigenvectors_csv(std::ostream& out, const SpectralSummary& s) {
  const auto p = out.precision(17);
  out << "node_id";
  for (std::size_t c = 0; c < s.size(); ++c) out << ",v" << c;
  out << '\n';
  for (std::size_t r = 0; r < s.size(); ++r) {
    out << s.node_ids[r];
    for (double x : s.eigenvectors.row(r)) out << ',' << x;
    out << '\n';
  }
  out.precision(p);
}

void write_match_csv(std::ostream& out, const Matched& m) {
  out << "node2_id,node1_id\n";
  for (const auto& [a, b] : m.pairing) out << a << ',' << b << '\n';
}

}  // namespace denserew::spectral
