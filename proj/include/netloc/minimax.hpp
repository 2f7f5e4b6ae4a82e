#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "netloc/errors.hpp"
#include "netloc/lagrangian.hpp"
#include "netloc/network.hpp"

namespace netloc {

struct SolverConfig {
  double sigma1 = 0.1;   // sufficient decrease, in (0, 0.5)
  double sigma2 = 0.9;   // curvature, in (sigma1, 1)
  double gamma = 1.0;    // mu shrinks once |grad| < gamma * mu
  double gamma1 = 0.5;   // mu shrink factor, in (0, 1)
  double epsilon = 1e-4; // stop once mu < epsilon
  double mu0 = 1.0;
  std::size_t max_outer_iterations = 200000;
  std::size_t max_line_search_iterations = 60;
  std::size_t multistart_count = 5;
  std::uint64_t rng_seed = 1;

  void validate() const {
    using detail::require;
    require<ParameterError>(sigma1 > 0.0 && sigma1 < 0.5, "sigma1 must lie in (0, 0.5)");
    require<ParameterError>(sigma2 > sigma1 && sigma2 < 1.0, "sigma2 must lie in (sigma1, 1)");
    require<ParameterError>(gamma > 0.0, "gamma must be positive");
    require<ParameterError>(gamma1 > 0.0 && gamma1 < 1.0, "gamma1 must lie in (0, 1)");
    require<ParameterError>(epsilon > 0.0, "epsilon must be positive");
    require<ParameterError>(mu0 > 0.0 && std::isfinite(mu0), "mu0 must be positive");
    require<ParameterError>(max_outer_iterations >= 1, "max_outer_iterations must be >= 1");
    require<ParameterError>(max_line_search_iterations >= 1,
                            "max_line_search_iterations must be >= 1");
    require<ParameterError>(multistart_count >= 1, "multistart_count must be >= 1");
  }
};

/// The compact box [lower, upper]^{dn} the search is restricted to.
struct BoxRegion {
  double lower = -1.0;
  double upper = 1.0;

  BoxRegion() = default;
  BoxRegion(double lo, double hi) : lower(lo), upper(hi) {
    detail::require<ParameterError>(std::isfinite(lo) && std::isfinite(hi) && lo < hi,
                                    "box needs finite lower < upper");
  }

  bool contains(const Configuration& x) const {
    for (double v : x.coords())
      if (v < lower || v > upper) return false;
    return true;
  }
  /// Clamps in place; returns true if any coordinate moved.
  bool project(Configuration& x) const {
    bool moved = false;
    for (double& v : x.coords()) {
      const double c = std::clamp(v, lower, upper);
      moved |= (c != v);
      v = c;
    }
    return moved;
  }
};

/// Symmetric box around the origin that holds every realization minimizing the
/// objective: such a realization is centred, so every node lies within the
/// weighted diameter of the origin.
inline BoxRegion default_box(const NetworkInstance& net) {
  const double radius = std::max(weighted_diameter(net), 1e-6);
  return BoxRegion(-radius, radius);
}

struct LineSearchResult {
  double step = 0.0;
  bool verified = false;  // both Wolfe conditions hold at step
  std::size_t iterations = 0;
  double value = 0.0;     // smoothed value at x + step*d
};

namespace detail {

/// Bisection/doubling Wolfe search on raw buffers. Evaluator provides
/// double evaluate(span<const double> x, double mu, span<double> grad). On
/// return trial_x and trial_grad hold the point x + step*d and its gradient.
template <typename Evaluator>
LineSearchResult wolfe_search(Evaluator& eval, std::span<const double> x,
                                     double value_at_x, double slope,
                                     std::span<const double> d, double mu, double sigma1,
                                     double sigma2, std::size_t max_iters,
                                     std::span<double> trial_x, std::span<double> trial_grad) {
  require<DirectionError>(std::isfinite(slope) && slope < 0.0,
                          "search direction is not a descent direction");
  const double inf = std::numeric_limits<double>::infinity();
  auto evaluate_at = [&](double t) {
    for (std::size_t c = 0; c < x.size(); ++c) trial_x[c] = x[c] + t * d[c];
    return eval.evaluate(trial_x, mu, trial_grad);
  };
  auto directional = [&] {
    double s = 0.0;
    for (std::size_t c = 0; c < d.size(); ++c) s += trial_grad[c] * d[c];
    return s;
  };

  double lo = 0.0;
  double hi = inf;
  double t = 1.0;
  double best_t = 0.0;
  double best_value = inf;
  for (std::size_t it = 1; it <= max_iters; ++it) {
    const double value = evaluate_at(t);
    if (value < best_value) {
      best_value = value;
      best_t = t;
    }
    if (value > value_at_x + sigma1 * t * slope) {
      hi = t;
      t = 0.5 * (lo + hi);
    } else if (directional() < sigma2 * slope) {
      lo = t;
      t = (hi == inf) ? 2.0 * lo : 0.5 * (lo + hi);
    } else {
      return {t, true, it, value};
    }
  }
  return {best_t, false, max_iters, evaluate_at(best_t)};
}

}  // namespace detail

/// Bisection/doubling Wolfe search along d from x: a step violating
/// sufficient decrease (sigma1) becomes the upper end of the bracket, one
/// violating the curvature condition (sigma2) the lower end, doubling while
/// no upper end is known. The point x + t*d is not projected. When max_iters
/// is reached the tried step with the lowest smoothed value is returned with
/// verified = false.
inline LineSearchResult wolfe_line_search(const NetworkInstance& net,
                                          const LagrangianCoefficients& coef,
                                          const Configuration& x, const Configuration& d,
                                          double mu, double sigma1, double sigma2,
                                          std::size_t max_iters) {
  net.check_shape(x);
  net.check_shape(d);
  detail::require<DirectionError>(norm(d) > 0.0, "zero search direction");
  SmoothingEvaluator eval(net, coef);
  Configuration grad(net.node_count());
  const double value = eval.evaluate(x.coords(), mu, grad.coords());
  Configuration trial_x(net.node_count());
  Configuration trial_grad(net.node_count());
  return detail::wolfe_search(eval, x.coords(), value, dot(grad, d), d.coords(), mu, sigma1,
                              sigma2, max_iters, trial_x.coords(), trial_grad.coords());
}

/// One outer iteration of the smoothing gradient method.
struct IterationRecord {
  std::size_t iter = 0;
  double mu = 0.0;              // mu used for this step
  double smoothed_value = 0.0;  // at x_{i+1}, with mu
  double grad_norm = 0.0;       // |grad| at x_{i+1}, with mu
  double step = 0.0;            // 0 when the iterate did not move
  bool verified = false;
  bool moved = false;
  bool shrink = false;
  // Filled only when SolverTrace::keep_states is set.
  Configuration x_before;
  Configuration direction;
};

struct SolverTrace {
  bool keep_states = false;
  std::vector<IterationRecord> records;
};

inline void write_solver_trace_csv(std::ostream& os, const SolverTrace& trace) {
  os << "iter,mu,smoothed_value,grad_norm,step\n";
  const auto old = os.precision(17);
  for (const IterationRecord& r : trace.records)
    os << r.iter << ',' << r.mu << ',' << r.smoothed_value << ',' << r.grad_norm << ','
       << r.step << '\n';
  os.precision(old);
}

struct MinimaxSolution {
  Configuration x_star;
  double smoothed_value = 0.0;   // at final_mu
  double exact_max_value = 0.0;  // non-smooth Lagrangian at x_star
  double final_mu = 0.0;
  double final_gradient_norm = 0.0;  // |grad| that triggered the last shrink
  std::size_t outer_iterations = 0;
  std::size_t unverified_steps = 0;
  std::size_t multistart_iterations = 0;  // summed over every start
  bool converged = false;
};

/// Smoothing gradient descent: steepest descent on the log-sum-exp smoothing
/// with a Wolfe step, shrinking mu by gamma1 whenever the gradient at the new
/// iterate drops below gamma * mu. Stops once mu < epsilon.
///
/// Iterates are clamped into box. A step that is unverified or clamped is
/// kept only if it lowers the smoothed value; otherwise the iterate stays put
/// and mu shrinks. When |grad| < gamma * mu already holds at x_i no line
/// search is run and mu shrinks directly.
inline MinimaxSolution smoothing_gradient_solve(const NetworkInstance& net,
                                                const LagrangianCoefficients& coef,
                                                const Configuration& x0, const BoxRegion& box,
                                                const SolverConfig& cfg,
                                                SolverTrace* trace = nullptr) {
  cfg.validate();
  coef.check_consistent(net);
  net.check_shape(x0);
  detail::require<ParameterError>(box.contains(x0), "start point lies outside the box");

  const std::size_t n = net.node_count();
  SmoothingEvaluator eval(net, coef);
  Configuration x = x0;
  Configuration grad(n), dir(n), trial_x(n), trial_grad(n);
  double mu = cfg.mu0;
  double value = eval.evaluate(x.coords(), mu, grad.coords());
  double shrink_grad_norm = norm(grad);
  MinimaxSolution sol;
  std::size_t iter = 0;

  while (mu >= cfg.epsilon && iter < cfg.max_outer_iterations) {
    ++iter;
    IterationRecord rec;
    rec.iter = iter;
    rec.mu = mu;
    bool decreased = true;

    const double g_norm = norm(grad);
    if (g_norm >= cfg.gamma * mu) {
      for (std::size_t c = 0; c < dir.size(); ++c) dir[c] = -grad[c];
      if (trace && trace->keep_states) {
        rec.x_before = x;
        rec.direction = dir;
      }
      const LineSearchResult ls = detail::wolfe_search(
          eval, x.coords(), value, -g_norm * g_norm, dir.coords(), mu, cfg.sigma1, cfg.sigma2,
          cfg.max_line_search_iterations, trial_x.coords(), trial_grad.coords());
      double trial_value = ls.value;
      const bool clamped = box.project(trial_x);
      if (clamped) trial_value = eval.evaluate(trial_x.coords(), mu, trial_grad.coords());
      decreased = (ls.verified && !clamped) ? trial_value <= value : trial_value < value;
      if (decreased) {
        if (!ls.verified) ++sol.unverified_steps;
        std::swap(x, trial_x);
        std::swap(grad, trial_grad);
        value = trial_value;
        rec.step = ls.step;
        rec.verified = ls.verified;
        rec.moved = true;
      }
    }

    const double new_norm = norm(grad);
    rec.smoothed_value = value;
    rec.grad_norm = new_norm;
    if (!decreased || new_norm < cfg.gamma * mu) {
      shrink_grad_norm = new_norm;
      mu *= cfg.gamma1;
      rec.shrink = true;
      value = eval.evaluate(x.coords(), mu, grad.coords());
    }
    if (trace) trace->records.push_back(std::move(rec));
  }

  sol.converged = mu < cfg.epsilon;
  sol.x_star = x;
  sol.final_mu = mu;
  sol.smoothed_value = value;
  sol.exact_max_value = lagrangian_value(net, coef, x);
  sol.final_gradient_norm = sol.converged ? shrink_grad_norm : norm(grad);
  sol.outer_iterations = iter;
  return sol;
}

/// Independent RNG stream for (seed, a, b).
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

/// Uniform start in box for multistart run start_index.
inline Configuration random_start(std::size_t node_count, const BoxRegion& box,
                                  std::uint64_t seed, std::size_t start_index) {
  auto rng = stream_rng(seed, start_index, 0x5747);
  std::uniform_real_distribution<double> u(box.lower, box.upper);
  Configuration x(node_count);
  for (double& v : x.coords()) v = u(rng);
  return x;
}

/// Approximates inf_x max_k f_k/c_k by running the smoothing solver from
/// multistart_count seeded uniform starts (plus any warm starts) and keeping
/// the smallest exact max value. Ties keep the earliest start. Random start s
/// uses stream index first_start + s.
inline MinimaxSolution minimize_lagrangian(const NetworkInstance& net,
                                           const LagrangianCoefficients& coef,
                                           const BoxRegion& box, const SolverConfig& cfg,
                                           std::span<const Configuration> warm_starts = {},
                                           SolverTrace* best_trace = nullptr,
                                           std::size_t first_start = 0) {
  cfg.validate();
  std::optional<MinimaxSolution> best;
  std::string last_error;
  std::size_t total_iterations = 0;
  auto run = [&](const Configuration& start) {
    try {
      SolverTrace local;
      if (best_trace) local.keep_states = best_trace->keep_states;
      MinimaxSolution s =
          smoothing_gradient_solve(net, coef, start, box, cfg, best_trace ? &local : nullptr);
      total_iterations += s.outer_iterations;
      if (!best || s.exact_max_value < best->exact_max_value) {
        best = std::move(s);
        if (best_trace) *best_trace = std::move(local);
      }
    } catch (const Error& e) {
      last_error = e.what();
    }
  };
  for (std::size_t s = 0; s < cfg.multistart_count; ++s)
    run(random_start(net.node_count(), box, cfg.rng_seed, first_start + s));
  for (const Configuration& w : warm_starts) {
    Configuration start = w;
    box.project(start);
    run(start);
  }
  if (!best) throw SolveError("all minimax starts failed: " + last_error);
  best->multistart_iterations = total_iterations;
  return *std::move(best);
}

}  // namespace netloc
