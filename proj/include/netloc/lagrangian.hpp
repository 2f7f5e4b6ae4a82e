#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "netloc/errors.hpp"
#include "netloc/network.hpp"

namespace netloc {

/// c = [c0, c1, ..., cr]. c_k is the squared upper bound for the first n0
/// constraints and the squared lower bound for the reflected ones.
class LagrangianCoefficients {
 public:
  LagrangianCoefficients(const NetworkInstance& net, double c0) : c0_(c0) {
    detail::require<ParameterError>(std::isfinite(c0) && c0 > 0.0, "c0 must be positive");
    edge_coeffs_.reserve(net.constraint_count());
    for (const Edge& e : net.edges()) edge_coeffs_.push_back(e.upper_sq);
    for (const Edge& e : net.edges()) edge_coeffs_.push_back(e.lower_sq);
  }

  double c0() const { return c0_; }
  /// c_k for k in [0, r].
  double operator[](std::size_t k) const { return k == 0 ? c0_ : edge_coeffs_[k - 1]; }
  std::size_t r() const { return edge_coeffs_.size(); }
  std::span<const double> edge_coeffs() const { return edge_coeffs_; }

  void check_consistent(const NetworkInstance& net) const {
    detail::require<ShapeError>(edge_coeffs_.size() == net.constraint_count(),
                                "coefficients built for a different network");
  }

 private:
  double c0_;
  std::vector<double> edge_coeffs_;
};

/// Ratios rho_k = f_k(x) / c_k for k in [0, r], written into out.
inline void constraint_ratios(const NetworkInstance& net, const LagrangianCoefficients& coef,
                              const Configuration& x, std::vector<double>& out) {
  coef.check_consistent(net);
  net.check_shape(x);
  detail::require<NumericError>(x.all_finite(), "configuration has non-finite coordinates");
  const std::size_t n0 = net.edge_count();
  out.resize(2 * n0 + 1);
  out[0] = objective_value(x) / coef.c0();
  for (std::size_t e = 0; e < n0; ++e) {
    const Edge& edge = net.edge(e);
    const double q = edge_length_sq(edge, x);
    out[1 + e] = q / edge.upper_sq;
    out[1 + n0 + e] = (2.0 * edge.lower_sq - q) / edge.lower_sq;
  }
}

/// max_k f_k(x)/c_k, the non-smooth Lagrangian (k = 0 included).
inline double lagrangian_value(const NetworkInstance& net, const LagrangianCoefficients& coef,
                               const Configuration& x) {
  std::vector<double> ratios;
  constraint_ratios(net, coef, x, ratios);
  return *std::max_element(ratios.begin(), ratios.end());
}

namespace detail {

// exp(z) for z <= 0. Below -745.2 the double result is exactly zero; skipping
// the call avoids the slow underflow path in libm.
inline double shifted_exp(double z) { return z < -745.2 ? 0.0 : std::exp(z); }

}  // namespace detail

/// mu * log(sum exp(v_k / mu)), evaluated with the max shift.
inline double smooth_max(std::span<const double> values, double mu) {
  detail::require<ParameterError>(mu > 0.0 && std::isfinite(mu), "mu must be positive");
  detail::require<ParameterError>(!values.empty(), "smooth_max of an empty set");
  const double m = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += detail::shifted_exp((v - m) / mu);
  return m + mu * std::log(sum);
}

/// Softmax weights exp((v_k - M)/mu) / sum_j exp((v_j - M)/mu).
inline std::vector<double> softmax_weights(std::span<const double> values, double mu) {
  detail::require<ParameterError>(mu > 0.0 && std::isfinite(mu), "mu must be positive");
  detail::require<ParameterError>(!values.empty(), "softmax of an empty set");
  const double m = *std::max_element(values.begin(), values.end());
  std::vector<double> w(values.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    w[k] = detail::shifted_exp((values[k] - m) / mu);
    sum += w[k];
  }
  for (double& wk : w) wk /= sum;
  return w;
}

struct SmoothedEvaluation {
  double value = 0.0;
  Configuration gradient;
  std::vector<double> active_weights;  // r+1 softmax weights
};

/// Reusable evaluator for the smoothing and its gradient on one network and
/// coefficient vector. Holds scratch buffers so the solver's inner loop does
/// not allocate.
class SmoothingEvaluator {
 public:
  SmoothingEvaluator(const NetworkInstance& net, const LagrangianCoefficients& coef)
      : net_(net), coef_(coef), ratios_(net.constraint_count() + 1), weights_(ratios_.size()) {
    coef.check_consistent(net);
  }

  const NetworkInstance& network() const { return net_; }
  const LagrangianCoefficients& coefficients() const { return coef_; }
  std::size_t dimension() const { return kDimension * net_.node_count(); }

  /// Smoothed value at x; gradient written into grad when non-empty. The
  /// softmax weights of the last call are available from weights().
  double evaluate(std::span<const double> x, double mu, std::span<double> grad) {
    detail::require<ParameterError>(mu > 0.0 && std::isfinite(mu), "mu must be positive");
    const std::size_t n0 = net_.edge_count();
    double f0 = 0.0;
    for (double v : x) {
      detail::require<NumericError>(std::isfinite(v), "configuration has non-finite coordinates");
      f0 += v * v;
    }
    ratios_[0] = f0 / coef_.c0();
    for (std::size_t e = 0; e < n0; ++e) {
      const Edge& edge = net_.edge(e);
      const double dx = x[2 * edge.i] - x[2 * edge.j];
      const double dy = x[2 * edge.i + 1] - x[2 * edge.j + 1];
      const double q = dx * dx + dy * dy;
      ratios_[1 + e] = q / edge.upper_sq;
      ratios_[1 + n0 + e] = (2.0 * edge.lower_sq - q) / edge.lower_sq;
    }
    const double m = *std::max_element(ratios_.begin(), ratios_.end());
    double sum = 0.0;
    for (std::size_t k = 0; k < ratios_.size(); ++k) {
      weights_[k] = detail::shifted_exp((ratios_[k] - m) / mu);
      sum += weights_[k];
    }
    const double value = m + mu * std::log(sum);
    for (double& w : weights_) w /= sum;

    if (!grad.empty()) {
      const double w0 = 2.0 * weights_[0] / coef_.c0();
      for (std::size_t c = 0; c < x.size(); ++c) grad[c] = w0 * x[c];
      for (std::size_t e = 0; e < n0; ++e) {
        const Edge& edge = net_.edge(e);
        const double s =
            2.0 * (weights_[1 + e] / edge.upper_sq - weights_[1 + n0 + e] / edge.lower_sq);
        const double gx = s * (x[2 * edge.i] - x[2 * edge.j]);
        const double gy = s * (x[2 * edge.i + 1] - x[2 * edge.j + 1]);
        grad[2 * edge.i] += gx;
        grad[2 * edge.i + 1] += gy;
        grad[2 * edge.j] -= gx;
        grad[2 * edge.j + 1] -= gy;
      }
    }
    return value;
  }

  std::span<const double> weights() const { return weights_; }

 private:
  const NetworkInstance& net_;
  const LagrangianCoefficients& coef_;
  std::vector<double> ratios_;
  std::vector<double> weights_;
};

/// Value, gradient and weights of the log-sum-exp smoothing in one pass.
inline SmoothedEvaluation smoothed_evaluate(const NetworkInstance& net,
                                            const LagrangianCoefficients& coef,
                                            const Configuration& x, double mu) {
  net.check_shape(x);
  SmoothingEvaluator eval(net, coef);
  SmoothedEvaluation out;
  out.gradient = Configuration(net.node_count());
  out.value = eval.evaluate(x.coords(), mu, out.gradient.coords());
  out.active_weights.assign(eval.weights().begin(), eval.weights().end());
  return out;
}

inline double smoothed_value(const NetworkInstance& net, const LagrangianCoefficients& coef,
                             const Configuration& x, double mu) {
  std::vector<double> ratios;
  constraint_ratios(net, coef, x, ratios);
  return smooth_max(ratios, mu);
}

inline Configuration smoothed_gradient(const NetworkInstance& net,
                                       const LagrangianCoefficients& coef, const Configuration& x,
                                       double mu) {
  return smoothed_evaluate(net, coef, x, mu).gradient;
}

/// Worst-case excess of the smoothing over the exact max: mu * log(num_terms).
/// Callers pass num_terms = r + 1 since the objective ratio is part of the sum.
inline double smoothing_gap_bound(double mu, std::size_t num_terms) {
  detail::require<ParameterError>(mu > 0.0, "mu must be positive");
  detail::require<ParameterError>(num_terms >= 1, "need at least one term");
  return mu * std::log(static_cast<double>(num_terms));
}

}  // namespace netloc
