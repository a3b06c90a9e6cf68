#pragma once

// Independent reference implementations shared by the unit and acceptance
// tests. Nothing here calls into the library's numerics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <vector>

#include "denserew/graph_autoencoder.hpp"
#include "denserew/random.hpp"
#include "denserew/state_graph.hpp"

namespace oracle {

using ld = long double;

// Forward pass of a tanh MLP with linear output, in long double, over the
// flatten() layout: each layer's row-major (out x in) weights, then its bias.
inline std::vector<ld> encode(const std::vector<std::size_t>& dims, const std::vector<ld>& theta,
                              const std::vector<double>& x) {
  std::size_t off = 0;
  std::vector<ld> h(x.begin(), x.end());
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t in = dims[l], out = dims[l + 1];
    const std::size_t b_off = off + in * out;
    std::vector<ld> z(out);
    for (std::size_t o = 0; o < out; ++o) {
      ld s = theta[b_off + o];
      for (std::size_t i = 0; i < in; ++i) s += theta[off + o * in + i] * h[i];
      z[o] = l + 2 < dims.size() ? std::tanh(s) : s;
    }
    off = b_off + out;
    h = std::move(z);
  }
  return h;
}

// Reconstruction loss over all unordered occupied pairs, with the target
// taken as A / max off-diagonal A straight from the raw adjacency.
inline ld loss(const std::vector<std::size_t>& dims, const std::vector<ld>& theta,
               const denserew::graph::StateGraph& g) {
  const auto ids = g.occupied_slots();
  ld peak = 0;
  for (std::size_t i = 0; i < g.capacity(); ++i)
    for (std::size_t j = 0; j < g.capacity(); ++j)
      if (i != j) peak = std::max<ld>(peak, g.adjacency(i, j));
  ld total = 0;
  for (std::size_t a = 0; a < ids.size(); ++a)
    for (std::size_t b = a + 1; b < ids.size(); ++b) {
      const auto eu = encode(dims, theta, g.slot(ids[a]).feature);
      const auto ev = encode(dims, theta, g.slot(ids[b]).feature);
      ld d = 0;
      for (std::size_t k = 0; k < eu.size(); ++k) d += eu[k] * ev[k];
      const ld target = peak > 0 ? g.adjacency(ids[a], ids[b]) / peak : 0;
      total += (d - target) * (d - target);
    }
  return total;
}

// Central difference with one Richardson step (error O(h^4)).
inline std::vector<ld> fd_gradient(const std::vector<std::size_t>& dims,
                                   const std::vector<double>& theta0,
                                   const denserew::graph::StateGraph& g, ld h = 1e-3L) {
  std::vector<ld> theta(theta0.begin(), theta0.end());
  std::vector<ld> grad(theta.size());
  auto central = [&](std::size_t i, ld step) {
    const ld keep = theta[i];
    theta[i] = keep + step;
    const ld up = loss(dims, theta, g);
    theta[i] = keep - step;
    const ld down = loss(dims, theta, g);
    theta[i] = keep;
    return (up - down) / (2 * step);
  };
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const ld coarse = central(i, h);
    const ld fine = central(i, h / 2);
    grad[i] = (4 * fine - coarse) / 3;
  }
  return grad;
}

// Random connected-ish 4-node graph in 2-D built from a short walk.
inline denserew::graph::StateGraph random_graph(std::uint64_t seed, std::size_t nodes = 4) {
  denserew::Rng rng(seed);
  auto g = denserew::graph::create_graph(nodes, 0.05, denserew::graph::EvictionPolicy::Oldest, 1);
  std::vector<std::vector<double>> pts;
  while (pts.size() < nodes) {
    std::vector<double> p{denserew::uniform(rng, -1, 1), denserew::uniform(rng, -1, 1)};
    bool ok = true;
    for (const auto& q : pts) ok = ok && std::hypot(p[0] - q[0], p[1] - q[1]) > 0.2;
    if (ok) pts.push_back(p);
  }
  std::optional<denserew::graph::NodeRef> prev;
  for (const auto& p : pts) prev = g.observe_transition(prev, p).node;
  for (int k = 0; k < 12; ++k)
    prev = g.observe_transition(prev, pts[denserew::uniform_index(rng, nodes)]).node;
  return g;
}

// Shapley value by averaging marginal contributions over all N! orders.
inline std::vector<double> shapley_by_permutations(std::size_t n,
                                                   const std::function<double(std::uint64_t)>& v) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<long double> acc(n, 0);
  long double count = 0;
  do {
    std::uint64_t s = 0;
    long double before = v(0);
    for (std::size_t p : order) {
      s |= std::uint64_t{1} << p;
      const long double after = v(s);
      acc[p] += after - before;
      before = after;
    }
    count += 1;
  } while (std::next_permutation(order.begin(), order.end()));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(acc[i] / count);
  return out;
}

// Owen value by averaging over orders consistent with the unions: unions
// arrive in every order, and members of each union in every order.
inline std::vector<double> owen_by_orders(std::size_t n,
                                          const std::vector<std::vector<std::size_t>>& unions,
                                          const std::function<double(std::uint64_t)>& v) {
  std::vector<std::size_t> uorder(unions.size());
  std::iota(uorder.begin(), uorder.end(), 0);
  std::vector<long double> acc(n, 0);
  long double count = 0;
  do {
    // Enumerate member orders of each union recursively.
    std::vector<std::vector<std::size_t>> members;
    for (std::size_t u : uorder) {
      auto m = unions[u];
      std::sort(m.begin(), m.end());
      members.push_back(m);
    }
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
      if (k == members.size()) {
        std::uint64_t s = 0;
        long double before = v(0);
        for (const auto& m : members)
          for (std::size_t p : m) {
            s |= std::uint64_t{1} << p;
            const long double after = v(s);
            acc[p] += after - before;
            before = after;
          }
        count += 1;
        return;
      }
      do rec(k + 1);
      while (std::next_permutation(members[k].begin(), members[k].end()));
    };
    rec(0);
  } while (std::next_permutation(uorder.begin(), uorder.end()));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(acc[i] / count);
  return out;
}

}  // namespace oracle
