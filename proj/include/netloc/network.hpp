#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "netloc/errors.hpp"

namespace netloc {

// Only planar networks are supported.
inline constexpr std::size_t kDimension = 2;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline double squared_distance(Point2 a, Point2 b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

/// A point in R^{dn}: node i occupies coords[2i], coords[2i+1].
/// Also used for gradients and search directions, which share the shape.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::size_t node_count) : coords_(kDimension * node_count, 0.0) {}
  explicit Configuration(std::vector<double> coords) : coords_(std::move(coords)) {
    detail::require<ShapeError>(coords_.size() % kDimension == 0,
                                "configuration length must be a multiple of the dimension");
  }
  static Configuration from_points(std::span<const Point2> points) {
    Configuration c(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) c.set_point(i, points[i]);
    return c;
  }

  std::size_t node_count() const { return coords_.size() / kDimension; }
  std::size_t size() const { return coords_.size(); }

  Point2 point(std::size_t i) const { return {coords_[2 * i], coords_[2 * i + 1]}; }
  void set_point(std::size_t i, Point2 p) {
    coords_[2 * i] = p.x;
    coords_[2 * i + 1] = p.y;
  }

  double operator[](std::size_t k) const { return coords_[k]; }
  double& operator[](std::size_t k) { return coords_[k]; }

  std::span<const double> coords() const { return coords_; }
  std::span<double> coords() { return coords_; }

  bool all_finite() const {
    return std::all_of(coords_.begin(), coords_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  std::vector<double> coords_;
};

inline double dot(const Configuration& a, const Configuration& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

inline double norm(const Configuration& a) { return std::sqrt(dot(a, a)); }

/// Returns x + t*d.
inline Configuration axpy(const Configuration& x, double t, const Configuration& d) {
  Configuration out = x;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += t * d[k];
  return out;
}

struct Edge {
  std::size_t i = 0;  // 0-based
  std::size_t j = 0;
  double lower_sq = 0.0;
  double upper_sq = 0.0;
};

/// A noisy-distance network: every edge carries squared bounds
/// lower_sq <= |x_i - x_j|^2 <= upper_sq. Immutable after construction.
///
/// Constraint indices follow the reformulated problem: k = 0 is the objective
/// sum |x_i|^2, k in [1, n0] is the upper-bound constraint of edge k-1, and
/// k in [n0+1, 2*n0] is the reflected lower-bound constraint
/// 2*lower_sq - |x_i - x_j|^2 of edge k-n0-1.
class NetworkInstance {
 public:
  NetworkInstance(std::size_t node_count, std::vector<Edge> edges)
      : node_count_(node_count), edges_(std::move(edges)) {
    detail::require<InvalidNetworkError>(node_count_ >= 1, "node count must be positive");
    detail::require<InvalidNetworkError>(!edges_.empty(), "network needs at least one edge");
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const Edge& e : edges_) {
      const std::string where =
          " (edge " + std::to_string(e.i + 1) + "-" + std::to_string(e.j + 1) + ")";
      detail::require<InvalidNetworkError>(e.i < node_count_ && e.j < node_count_,
                                           "node index out of range" + where);
      detail::require<InvalidNetworkError>(e.i != e.j, "self-loop" + where);
      detail::require<InvalidNetworkError>(
          std::isfinite(e.lower_sq) && std::isfinite(e.upper_sq) && e.lower_sq > 0.0,
          "bounds must be finite and positive" + where);
      detail::require<InvalidNetworkError>(e.lower_sq <= e.upper_sq,
                                           "lower bound exceeds upper bound" + where);
      const auto key = std::minmax(e.i, e.j);
      detail::require<InvalidNetworkError>(seen.insert(key).second, "duplicate edge" + where);
    }
  }

  std::size_t node_count() const { return node_count_; }
  std::size_t dimension() const { return kDimension; }
  std::size_t edge_count() const { return edges_.size(); }
  /// r = 2 * n0, the number of constraints excluding the objective.
  std::size_t constraint_count() const { return 2 * edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(std::size_t e) const { return edges_[e]; }

  void check_shape(const Configuration& x) const {
    detail::require<ShapeError>(x.size() == kDimension * node_count_,
                                "configuration has " + std::to_string(x.size()) +
                                    " coordinates, expected " +
                                    std::to_string(kDimension * node_count_));
  }

  /// Right-hand side c_k of constraint k >= 1.
  double constraint_bound(std::size_t k) const {
    check_index(k);
    detail::require<ConstraintIndexError>(k >= 1, "constraint 0 is the objective");
    const std::size_t n0 = edges_.size();
    return k <= n0 ? edges_[k - 1].upper_sq : edges_[k - n0 - 1].lower_sq;
  }

  void check_index(std::size_t k) const {
    detail::require<ConstraintIndexError>(
        k <= constraint_count(),
        "constraint index " + std::to_string(k) + " exceeds r = " +
            std::to_string(constraint_count()));
  }

  friend bool operator==(const NetworkInstance& a, const NetworkInstance& b) {
    if (a.node_count_ != b.node_count_ || a.edges_.size() != b.edges_.size()) return false;
    for (std::size_t e = 0; e < a.edges_.size(); ++e) {
      const Edge& p = a.edges_[e];
      const Edge& q = b.edges_[e];
      if (p.i != q.i || p.j != q.j || p.lower_sq != q.lower_sq || p.upper_sq != q.upper_sq)
        return false;
    }
    return true;
  }

 private:
  std::size_t node_count_;
  std::vector<Edge> edges_;
};

inline double objective_value(const Configuration& x) { return dot(x, x); }

inline double edge_length_sq(const Edge& e, const Configuration& x) {
  return squared_distance(x.point(e.i), x.point(e.j));
}

/// f_k(x).
inline double constraint_value(const NetworkInstance& net, std::size_t k, const Configuration& x) {
  net.check_shape(x);
  net.check_index(k);
  if (k == 0) return objective_value(x);
  const std::size_t n0 = net.edge_count();
  if (k <= n0) return edge_length_sq(net.edge(k - 1), x);
  const Edge& e = net.edge(k - n0 - 1);
  return 2.0 * e.lower_sq - edge_length_sq(e, x);
}

/// Adds scale * grad |x_i - x_j|^2 into grad.
inline void accumulate_edge_gradient(const Edge& e, const Configuration& x, double scale,
                                     Configuration& grad) {
  const double dx = x[2 * e.i] - x[2 * e.j];
  const double dy = x[2 * e.i + 1] - x[2 * e.j + 1];
  grad[2 * e.i] += 2.0 * scale * dx;
  grad[2 * e.i + 1] += 2.0 * scale * dy;
  grad[2 * e.j] -= 2.0 * scale * dx;
  grad[2 * e.j + 1] -= 2.0 * scale * dy;
}

inline Configuration constraint_gradient(const NetworkInstance& net, std::size_t k,
                                         const Configuration& x) {
  net.check_shape(x);
  net.check_index(k);
  Configuration grad(net.node_count());
  if (k == 0) {
    for (std::size_t c = 0; c < x.size(); ++c) grad[c] = 2.0 * x[c];
    return grad;
  }
  const std::size_t n0 = net.edge_count();
  if (k <= n0) {
    accumulate_edge_gradient(net.edge(k - 1), x, 1.0, grad);
  } else {
    accumulate_edge_gradient(net.edge(k - n0 - 1), x, -1.0, grad);
  }
  return grad;
}

struct FeasibilityReport {
  double max_relative_violation = 0.0;
  std::vector<std::size_t> violating_constraint_indices;
  bool feasible = true;
  double tolerance = 0.0;
};

/// Relative violation of constraint k is max(0, (f_k - c_k) / c_k); every k
/// whose violation exceeds rel_tol is listed.
inline FeasibilityReport feasibility_check(const NetworkInstance& net, const Configuration& x,
                                           double rel_tol) {
  net.check_shape(x);
  detail::require<ParameterError>(rel_tol >= 0.0, "relative tolerance must be non-negative");
  FeasibilityReport report;
  report.tolerance = rel_tol;
  for (std::size_t k = 1; k <= net.constraint_count(); ++k) {
    const double c = net.constraint_bound(k);
    const double violation = std::max(0.0, (constraint_value(net, k, x) - c) / c);
    report.max_relative_violation = std::max(report.max_relative_violation, violation);
    if (violation > rel_tol) report.violating_constraint_indices.push_back(k);
  }
  report.feasible = report.max_relative_violation <= rel_tol;
  return report;
}

inline double network_density(std::size_t node_count, std::size_t edge_count) {
  detail::require<DegenerateNetworkError>(node_count >= 2, "density needs at least two nodes");
  const double n = static_cast<double>(node_count);
  return 2.0 * static_cast<double>(edge_count) / (n * (n - 1.0));
}

inline double network_density(const NetworkInstance& net) {
  return network_density(net.node_count(), net.edge_count());
}

/// Number of connected components of the edge graph (union-find).
inline std::size_t component_count(std::size_t node_count,
                                   std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  std::vector<std::size_t> parent(node_count);
  for (std::size_t v = 0; v < node_count; ++v) parent[v] = v;
  auto find = [&](std::size_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  std::size_t components = node_count;
  for (auto [a, b] : pairs) {
    const std::size_t ra = find(a);
    const std::size_t rb = find(b);
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
  }
  return components;
}

/// Largest finite shortest-path length when every edge is weighted by its
/// upper distance bound. Any realization has all pairwise distances within a
/// component bounded by this value.
inline double weighted_diameter(const NetworkInstance& net) {
  const std::size_t n = net.node_count();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n * n, inf);
  for (std::size_t v = 0; v < n; ++v) dist[v * n + v] = 0.0;
  for (const Edge& e : net.edges()) {
    const double w = std::sqrt(e.upper_sq);
    dist[e.i * n + e.j] = std::min(dist[e.i * n + e.j], w);
    dist[e.j * n + e.i] = std::min(dist[e.j * n + e.i], w);
  }
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        dist[a * n + b] = std::min(dist[a * n + b], dist[a * n + m] + dist[m * n + b]);
  double diameter = 0.0;
  for (double d : dist)
    if (std::isfinite(d)) diameter = std::max(diameter, d);
  return diameter;
}

}  // namespace netloc
