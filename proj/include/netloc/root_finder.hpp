#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "netloc/errors.hpp"
#include "netloc/lagrangian.hpp"
#include "netloc/minimax.hpp"
#include "netloc/network.hpp"

namespace netloc {

/// Estimate of psi(c0) = inf_x max_k f_k(x)/c_k. upper is the exact max at the
/// witness, hence a true upper bound on psi(c0); there is no certified lower
/// bound because the minimax is solved locally.
struct PsiEstimate {
  double c0 = 0.0;
  double upper = 0.0;
  double uncertainty = 0.0;  // smoothing gap final_mu * log(r+1) at the witness
  MinimaxSolution witness;
};

enum class Sign { Positive, Negative, Root };

inline const char* to_string(Sign s) {
  switch (s) {
    case Sign::Positive: return "positive";
    case Sign::Negative: return "negative";
    case Sign::Root: return "root";
  }
  return "?";
}

/// Sign of psi(c0) - 1 read off upper. Negative is certified (psi <= upper);
/// Positive trusts the multistart upper to be near-tight.
inline Sign decide_sign(const PsiEstimate& est, double root_tol) {
  detail::require<ParameterError>(root_tol > 0.0, "root tolerance must be positive");
  const double phi = est.upper - 1.0;
  if (phi < -root_tol) return Sign::Negative;
  if (phi > root_tol) return Sign::Positive;
  return Sign::Root;
}

/// Starting mu for the outer_index-th psi evaluation (1-based): mu0 / i,
/// floored at epsilon.
inline double seeded_mu(const SolverConfig& cfg, std::size_t outer_index) {
  const double i = static_cast<double>(std::max<std::size_t>(outer_index, 1));
  return std::max(cfg.epsilon, cfg.mu0 / i);
}

inline PsiEstimate estimate_psi(const NetworkInstance& net, double c0, const BoxRegion& box,
                                const SolverConfig& cfg, std::size_t outer_index,
                                std::span<const Configuration> warm_starts = {},
                                SolverTrace* trace = nullptr, std::size_t first_start = 0) {
  detail::require<ParameterError>(std::isfinite(c0) && c0 > 0.0, "c0 must be positive");
  const LagrangianCoefficients coef(net, c0);
  SolverConfig run_cfg = cfg;
  run_cfg.mu0 = seeded_mu(cfg, outer_index);
  PsiEstimate est;
  est.c0 = c0;
  try {
    est.witness = minimize_lagrangian(net, coef, box, run_cfg, warm_starts, trace, first_start);
  } catch (const SolveError& e) {
    throw SolveError("psi estimate at c0 = " + std::to_string(c0) + ": " + e.what());
  }
  est.upper = est.witness.exact_max_value;
  est.uncertainty = smoothing_gap_bound(est.witness.final_mu, coef.r() + 1);
  return est;
}

struct Bracket {
  double c_lo = 0.0;
  double c_hi = 0.0;
  PsiEstimate psi_lo;  // decided Positive
  PsiEstimate psi_hi;  // decided Negative
};

struct RootTraceRecord {
  std::size_t step = 0;
  double c_lo = 0.0;
  double c_hi = 0.0;
  double c_mid = 0.0;
  double psi_upper = 0.0;
  Sign sign = Sign::Root;
};

inline void write_root_trace_csv(std::ostream& os, std::span<const RootTraceRecord> trace) {
  os << "step,c_lo,c_hi,c_mid,psi_upper,sign\n";
  const auto old = os.precision(17);
  for (const RootTraceRecord& r : trace)
    os << r.step << ',' << r.c_lo << ',' << r.c_hi << ',' << r.c_mid << ',' << r.psi_upper << ','
       << to_string(r.sign) << '\n';
  os.precision(old);
}

struct LocalizationResult {
  double c0_star = 0.0;
  Configuration x_star;
  double residual = 0.0;  // psi upper - 1 at c0_star
  FeasibilityReport feasibility;
  std::size_t bisection_iterations = 0;
  std::size_t psi_evaluations = 0;
  std::size_t total_solver_iterations = 0;
  std::size_t heuristic_positive_decisions = 0;
  std::size_t bracket_repairs = 0;
  bool converged = false;  // |residual| <= root_tol
};

struct RootFinderOptions {
  double root_tol = 1e-2;
  std::size_t max_bracket_steps = 40;
  std::size_t max_bracket_repairs = 3;
  bool warm_start = true;
};

/// Bracket search and bisection on psi(c0) - 1. Holds the evaluation counter
/// that drives the mu seeding and the previous witness used as a warm start.
class RootFinder {
 public:
  RootFinder(const NetworkInstance& net, BoxRegion box, SolverConfig cfg,
             RootFinderOptions opts = {})
      : net_(net), box_(box), cfg_(cfg), opts_(opts) {
    cfg_.validate();
    detail::require<ParameterError>(opts_.root_tol > 0.0, "root tolerance must be positive");
  }

  /// Default starting point n * M'^2 * d / 4.
  static double default_c_init(const NetworkInstance& net, const BoxRegion& box) {
    const double m = std::max(std::abs(box.lower), std::abs(box.upper));
    return static_cast<double>(net.node_count()) * m * m * static_cast<double>(kDimension) / 4.0;
  }

  /// psi estimate at c0. stream_block selects which block of multistart_count
  /// random starts is used; block 0 is the shared stream.
  PsiEstimate estimate(double c0, std::size_t stream_block = 0) {
    ++evaluations_;
    std::vector<Configuration> warm;
    if (opts_.warm_start && last_witness_) warm.push_back(*last_witness_);
    SolverTrace* trace = keep_solver_trace_ ? &last_solver_trace_ : nullptr;
    if (trace) trace->records.clear();
    PsiEstimate est = estimate_psi(net_, c0, box_, cfg_, evaluations_, warm, trace,
                                   stream_block * cfg_.multistart_count);
    solver_iterations_ += est.witness.multistart_iterations;
    last_witness_ = est.witness.x_star;
    return est;
  }

  Sign sign(const PsiEstimate& est) {
    const Sign s = decide_sign(est, opts_.root_tol);
    if (s == Sign::Positive) ++heuristic_positive_;
    return s;
  }

  /// Either an enclosing bracket or an estimate already within the root band.
  std::variant<Bracket, PsiEstimate> bracket_root(double c_init) {
    detail::require<ParameterError>(std::isfinite(c_init) && c_init > 0.0,
                                    "c_init must be positive");
    const double inf = std::numeric_limits<double>::infinity();
    PsiEstimate first = estimate(c_init);
    const Sign s0 = sign(first);
    record(0.0, inf, first, s0);
    if (s0 == Sign::Root) return first;

    if (s0 == Sign::Positive) {
      PsiEstimate lo = std::move(first);
      double offset = c_init;
      // A Positive sign is only as good as the starts behind it, so every
      // upward step draws a fresh block of starts.
      for (std::size_t step = 0; step < opts_.max_bracket_steps; ++step) {
        PsiEstimate next = estimate(c_init + offset, step + 1);
        const Sign s = sign(next);
        record(lo.c0, inf, next, s);
        if (s == Sign::Root) return next;
        if (s == Sign::Negative) return Bracket{lo.c0, next.c0, std::move(lo), std::move(next)};
        lo = std::move(next);
        offset *= 2.0;
      }
    } else {
      return descend(std::move(first));
    }
    throw no_bracket();
  }

  /// Bisection inside bracket until the root band is hit or the bracket is
  /// narrower than c_tol.
  LocalizationResult find_root(Bracket bracket, double c_tol) {
    detail::require<ParameterError>(bracket.c_lo > 0.0 && bracket.c_lo < bracket.c_hi,
                                    "bracket needs 0 < c_lo < c_hi");
    detail::require<ParameterError>(c_tol > 0.0, "c_tol must be positive");
    std::size_t iterations = 0;
    if (auto root = bisect(bracket, c_tol, iterations)) return finish(std::move(*root), iterations);
    return finish(closer_endpoint(std::move(bracket)), iterations);
  }

  /// Full pipeline: bracket from c_init, then bisect down to c_tol.
  ///
  /// A collapsed bisection means psi jumped across the root band inside a
  /// bracket narrower than c_tol. psi is continuous, so the Positive end was a
  /// local minimum of the minimax; the halving search is then restarted below
  /// the certified Negative end, at most max_bracket_repairs times.
  LocalizationResult localize(double c_init, double c_tol) {
    detail::require<ParameterError>(c_tol > 0.0, "c_tol must be positive");
    auto outcome = bracket_root(c_init);
    std::size_t iterations = 0;
    for (std::size_t repair = 0;; ++repair) {
      if (auto* root = std::get_if<PsiEstimate>(&outcome))
        return finish(std::move(*root), iterations);
      Bracket bracket = std::get<Bracket>(std::move(outcome));
      if (auto root = bisect(bracket, c_tol, iterations))
        return finish(std::move(*root), iterations);
      if (repair == opts_.max_bracket_repairs)
        return finish(closer_endpoint(std::move(bracket)), iterations);
      ++repairs_;
      last_witness_ = bracket.psi_hi.witness.x_star;
      outcome = descend(std::move(bracket.psi_hi));
    }
  }

  LocalizationResult localize() {
    const double c_init = default_c_init(net_, box_);
    return localize(c_init, 1e-3 * c_init);
  }

  const std::vector<RootTraceRecord>& root_trace() const { return trace_; }
  /// Solver trace of the winning start of the most recent psi estimate.
  const SolverTrace& last_solver_trace() const { return last_solver_trace_; }
  void keep_solver_trace(bool keep) { keep_solver_trace_ = keep; }
  std::size_t evaluations() const { return evaluations_; }
  std::size_t repairs() const { return repairs_; }

 private:
  NoBracketError no_bracket() const {
    return NoBracketError("no sign change of psi - 1 after " +
                          std::to_string(opts_.max_bracket_steps) +
                          " bracket steps; the bounds may be infeasible");
  }

  // Halves c0 below a Negative estimate until the sign flips.
  std::variant<Bracket, PsiEstimate> descend(PsiEstimate hi) {
    for (std::size_t step = 0; step < opts_.max_bracket_steps; ++step) {
      PsiEstimate next = estimate(hi.c0 / 2.0);
      const Sign s = sign(next);
      record(0.0, hi.c0, next, s);
      if (s == Sign::Root) return next;
      if (s == Sign::Positive) return Bracket{next.c0, hi.c0, std::move(next), std::move(hi)};
      hi = std::move(next);
    }
    throw no_bracket();
  }

  // Bisects until an estimate lands in the root band or the bracket is
  // narrower than c_tol; the bracket is narrowed in place.
  std::optional<PsiEstimate> bisect(Bracket& bracket, double c_tol, std::size_t& iterations) {
    while (bracket.c_hi - bracket.c_lo >= c_tol) {
      ++iterations;
      const double mid = 0.5 * (bracket.c_lo + bracket.c_hi);
      PsiEstimate est = estimate(mid);
      const Sign s = sign(est);
      record(bracket.c_lo, bracket.c_hi, est, s);
      if (s == Sign::Root) return est;
      if (s == Sign::Positive) {
        bracket.c_lo = mid;
        bracket.psi_lo = std::move(est);
      } else {
        bracket.c_hi = mid;
        bracket.psi_hi = std::move(est);
      }
    }
    return std::nullopt;
  }

  static PsiEstimate closer_endpoint(Bracket bracket) {
    const bool lo_closer =
        std::abs(bracket.psi_lo.upper - 1.0) < std::abs(bracket.psi_hi.upper - 1.0);
    return lo_closer ? std::move(bracket.psi_lo) : std::move(bracket.psi_hi);
  }

  void record(double lo, double hi, const PsiEstimate& est, Sign s) {
    trace_.push_back({trace_.size(), lo, hi, est.c0, est.upper, s});
  }

  LocalizationResult finish(PsiEstimate est, std::size_t iterations) {
    LocalizationResult out;
    out.c0_star = est.c0;
    out.residual = est.upper - 1.0;
    out.x_star = std::move(est.witness.x_star);
    out.feasibility = feasibility_check(net_, out.x_star, opts_.root_tol);
    out.bisection_iterations = iterations;
    out.psi_evaluations = evaluations_;
    out.total_solver_iterations = solver_iterations_;
    out.heuristic_positive_decisions = heuristic_positive_;
    out.bracket_repairs = repairs_;
    out.converged = std::abs(out.residual) <= opts_.root_tol;
    return out;
  }

  const NetworkInstance& net_;
  BoxRegion box_;
  SolverConfig cfg_;
  RootFinderOptions opts_;
  std::size_t evaluations_ = 0;
  std::size_t solver_iterations_ = 0;
  std::size_t heuristic_positive_ = 0;
  std::size_t repairs_ = 0;
  std::optional<Configuration> last_witness_;
  std::vector<RootTraceRecord> trace_;
  bool keep_solver_trace_ = false;
  SolverTrace last_solver_trace_;
};

}  // namespace netloc
