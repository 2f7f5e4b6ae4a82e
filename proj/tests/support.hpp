#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "netloc/network.hpp"

namespace netloc::testing {

// Two nodes joined by one edge with distance bounds [lower, upper].
inline NetworkInstance two_node(double lower, double upper) {
  return NetworkInstance(2, {{0, 1, lower * lower, upper * upper}});
}

// Exact distance 2 with half-width 1e-3; the minimum-norm realization is
// {(-1, 0), (1, 0)} up to rotation, with f0 = 2.
inline NetworkInstance analytic_pair() { return two_node(2.0 - 1e-3, 2.0 + 1e-3); }

// Connected instance on n nodes: a random spanning tree plus each remaining
// pair with probability extra_p. Bounds bracket random distances in (0.5, 5).
inline NetworkInstance random_instance(std::mt19937_64& rng, std::size_t n, double extra_p = 0.3) {
  std::uniform_real_distribution<double> dist(0.5, 5.0);
  std::uniform_real_distribution<double> width(0.0, 0.5);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<std::vector<bool>> used(n, std::vector<bool>(n, false));
  std::vector<Edge> edges;
  auto add = [&](std::size_t i, std::size_t j) {
    const double d = dist(rng);
    const double lo = std::max(0.05, d - width(rng));
    const double hi = d + width(rng);
    edges.push_back({i, j, lo * lo, hi * hi});
    used[i][j] = used[j][i] = true;
  };
  for (std::size_t v = 1; v < n; ++v) add(std::uniform_int_distribution<std::size_t>(0, v - 1)(rng), v);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!used[i][j] && coin(rng) < extra_p) add(i, j);
  return NetworkInstance(n, std::move(edges));
}

inline Configuration random_configuration(std::mt19937_64& rng, std::size_t n, double lo,
                                          double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Configuration x(n);
  for (double& v : x.coords()) v = u(rng);
  return x;
}

// Central difference of f along coordinate c.
template <typename F>
double central_difference(F&& f, Configuration x, std::size_t c, double h) {
  const double base = x[c];
  x[c] = base + h;
  const double up = f(x);
  x[c] = base - h;
  const double down = f(x);
  return (up - down) / (2.0 * h);
}

}  // namespace netloc::testing
