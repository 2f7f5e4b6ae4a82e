#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <thread>
#include <utility>
#include <vector>

#include "netloc/errors.hpp"
#include "netloc/minimax.hpp"
#include "netloc/network.hpp"
#include "netloc/root_finder.hpp"

namespace netloc {

struct GenerationSpec {
  std::size_t n = 10;
  double field_lower = 0.0;
  double field_upper = 10.0;
  double target_density = 0.5;
  double noise_fraction = 0.1;  // noise half-width as a fraction of the field diagonal
  std::uint64_t rng_seed = 1;
  double min_lower = 1e-3;      // floor on a lower distance bound
  std::size_t max_attempts = 1000;

  void validate() const {
    using detail::require;
    require<ParameterError>(n >= 2, "generation needs n >= 2");
    require<ParameterError>(field_lower < field_upper, "field needs lower < upper");
    require<ParameterError>(target_density > 0.0 && target_density <= 1.0,
                            "density must lie in (0, 1]");
    require<ParameterError>(noise_fraction >= 0.0 && noise_fraction <= 0.5,
                            "noise fraction must lie in [0, 0.5]");
    require<ParameterError>(min_lower > 0.0, "min_lower must be positive");
  }

  double diameter() const { return (field_upper - field_lower) * std::sqrt(2.0); }
  double noise_half_width() const { return noise_fraction * diameter(); }

  /// round(density * n(n-1)/2), raised to the n-1 connectivity floor.
  std::size_t edge_target() const {
    const std::size_t pairs = n * (n - 1) / 2;
    const auto e = static_cast<std::size_t>(std::llround(target_density * static_cast<double>(pairs)));
    return std::clamp<std::size_t>(e, n - 1, pairs);
  }
};

struct TruthAndInstance {
  Configuration truth;
  NetworkInstance instance;
};

/// Random network in the square field. Each edge gets one noisy measurement
/// d + e with e ~ U[-eta, eta]; bounds are that measurement -/+ eta, widened
/// where needed so the true positions stay feasible.
inline TruthAndInstance generate_network(const GenerationSpec& spec) {
  spec.validate();
  auto rng = stream_rng(spec.rng_seed, 0x6e6574);
  std::uniform_real_distribution<double> coord(spec.field_lower, spec.field_upper);

  const std::size_t n = spec.n;
  std::vector<std::pair<std::size_t, std::size_t>> all_pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) all_pairs.emplace_back(i, j);
  const std::size_t n0 = spec.edge_target();
  const double eta = spec.noise_half_width();
  std::uniform_real_distribution<double> noise(-eta, eta);

  for (std::size_t attempt = 0; attempt < spec.max_attempts; ++attempt) {
    Configuration truth(n);
    for (double& v : truth.coords()) v = coord(rng);

    // Partial Fisher-Yates: the first n0 entries become the edge set.
    for (std::size_t k = 0; k < n0; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, all_pairs.size() - 1);
      std::swap(all_pairs[k], all_pairs[pick(rng)]);
    }
    const std::span<const std::pair<std::size_t, std::size_t>> chosen(all_pairs.data(), n0);
    if (component_count(n, chosen) != 1) continue;

    std::vector<Edge> edges;
    edges.reserve(n0);
    bool degenerate = false;
    for (auto [i, j] : chosen) {
      const double d_sq = squared_distance(truth.point(i), truth.point(j));
      const double d = std::sqrt(d_sq);
      const double measured = d + noise(rng);
      double lower = std::max(spec.min_lower, measured - eta);
      double upper = measured + eta;
      lower = std::min(lower, d);
      upper = std::max(upper, d);
      if (lower <= 0.0) degenerate = true;
      // Squaring sqrt(d_sq) back can overshoot d_sq by an ulp.
      edges.push_back({i, j, std::min(lower * lower, d_sq), std::max(upper * upper, d_sq)});
    }
    if (degenerate) continue;
    return {std::move(truth), NetworkInstance(n, std::move(edges))};
  }
  throw GenerationError("no connected network after " + std::to_string(spec.max_attempts) +
                        " attempts");
}

/// Rigid motion (rotation, optional reflection, translation) applied to
/// estimate that minimizes sum |truth_i - T(estimate_i)|^2, in closed form.
inline Configuration align(const Configuration& estimate, const Configuration& truth) {
  detail::require<ShapeError>(estimate.size() == truth.size(), "alignment needs equal sizes");
  const std::size_t n = estimate.node_count();
  detail::require<ShapeError>(n >= 2, "alignment needs at least two points");

  Point2 ce, ct;
  for (std::size_t i = 0; i < n; ++i) {
    ce.x += estimate.point(i).x;
    ce.y += estimate.point(i).y;
    ct.x += truth.point(i).x;
    ct.y += truth.point(i).y;
  }
  const double count = static_cast<double>(n);
  ce = {ce.x / count, ce.y / count};
  ct = {ct.x / count, ct.y / count};

  double spread = 0.0;
  double sxx = 0.0, sxy = 0.0, syx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 e{estimate.point(i).x - ce.x, estimate.point(i).y - ce.y};
    const Point2 t{truth.point(i).x - ct.x, truth.point(i).y - ct.y};
    spread += e.x * e.x + e.y * e.y;
    sxx += e.x * t.x;
    sxy += e.x * t.y;
    syx += e.y * t.x;
    syy += e.y * t.y;
  }

  Configuration out(n);
  if (spread == 0.0) {
    for (std::size_t i = 0; i < n; ++i) out.set_point(i, ct);
    return out;
  }

  // Proper rotation maximizes cos*(sxx+syy) + sin*(sxy-syx); the reflected
  // branch (y -> -y first) maximizes cos*(sxx-syy) + sin*(sxy+syx).
  const double a_rot = sxx + syy, b_rot = sxy - syx;
  const double a_ref = sxx - syy, b_ref = sxy + syx;
  const bool reflect = std::hypot(a_ref, b_ref) > std::hypot(a_rot, b_rot);
  const double theta = reflect ? std::atan2(b_ref, a_ref) : std::atan2(b_rot, a_rot);
  const double c = std::cos(theta), s = std::sin(theta);
  const double flip = reflect ? -1.0 : 1.0;
  // x -> R x + t keeps an already aligned estimate bit-identical.
  const Point2 shift{ct.x - (c * ce.x - s * flip * ce.y), ct.y - (s * ce.x + c * flip * ce.y)};
  for (std::size_t i = 0; i < n; ++i) {
    const double ex = estimate.point(i).x;
    const double ey = estimate.point(i).y * flip;
    out.set_point(i, {c * ex - s * ey + shift.x, s * ex + c * ey + shift.y});
  }
  return out;
}

struct ErrorReport {
  double mean_error = 0.0;
  double max_error = 0.0;
  std::vector<double> per_node_offsets;
  double density = 0.0;
  Configuration aligned_estimate;
};

enum class Alignment { Rigid, None };

/// Per-node offsets |truth_i - estimate_i| after alignment, with their mean
/// and max. density is left for the caller to fill in.
inline ErrorReport error_metrics(const Configuration& truth, const Configuration& estimate,
                                 Alignment mode = Alignment::Rigid) {
  detail::require<ShapeError>(truth.size() == estimate.size(), "metrics need equal sizes");
  detail::require<ShapeError>(truth.node_count() >= 1, "metrics need at least one node");
  ErrorReport report;
  report.aligned_estimate =
      (mode == Alignment::Rigid && truth.node_count() >= 2) ? align(estimate, truth) : estimate;
  const std::size_t n = truth.node_count();
  report.per_node_offsets.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double off =
        std::sqrt(squared_distance(truth.point(i), report.aligned_estimate.point(i)));
    report.per_node_offsets[i] = off;
    report.mean_error += off;
    report.max_error = std::max(report.max_error, off);
  }
  report.mean_error /= static_cast<double>(n);
  return report;
}

struct TrialOutcome {
  bool success = false;
  ErrorReport errors;
  LocalizationResult result;
};

/// Generates nothing; localizes a given instance with the default box and
/// starting scale and scores it against truth.
inline TrialOutcome run_trial(const TruthAndInstance& data, const SolverConfig& cfg,
                              const RootFinderOptions& opts = {}) {
  TrialOutcome out;
  try {
    RootFinder finder(data.instance, default_box(data.instance), cfg, opts);
    out.result = finder.localize();
  } catch (const NoBracketError&) {
    return out;
  } catch (const SolveError&) {
    return out;
  }
  if (!out.result.converged) return out;
  out.success = true;
  out.errors = error_metrics(data.truth, out.result.x_star);
  out.errors.density = network_density(data.instance);
  return out;
}

struct SweepRow {
  double density = 0.0;
  double avg_mean_error = 0.0;
  double avg_max_error = 0.0;
  std::size_t trials = 0;
  std::size_t failures = 0;
};

struct SweepOptions {
  std::vector<double> densities;
  std::size_t trials_per_density = 1;
  std::size_t n = 10;
  double noise_fraction = 0.1;
  double field_lower = 0.0;
  double field_upper = 10.0;
  std::uint64_t rng_seed = 1;
  std::size_t jobs = 1;
  RootFinderOptions root;
};

/// For each density, localizes trials_per_density fresh networks and averages
/// the error metrics over the successful runs. Trial (di, t) draws its network
/// seed from stream (rng_seed, di, t), so results do not depend on jobs.
inline std::vector<SweepRow> density_sweep(const SweepOptions& opts, const SolverConfig& cfg) {
  detail::require<ParameterError>(!opts.densities.empty(), "sweep needs at least one density");
  detail::require<ParameterError>(
      std::is_sorted(opts.densities.begin(), opts.densities.end()),
      "densities must be sorted ascending");
  detail::require<ParameterError>(opts.trials_per_density >= 1, "trials must be >= 1");
  cfg.validate();

  const std::size_t total = opts.densities.size() * opts.trials_per_density;
  std::vector<TrialOutcome> outcomes(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t job = next++; job < total; job = next++) {
      const std::size_t di = job / opts.trials_per_density;
      const std::size_t t = job % opts.trials_per_density;
      GenerationSpec spec;
      spec.n = opts.n;
      spec.field_lower = opts.field_lower;
      spec.field_upper = opts.field_upper;
      spec.target_density = opts.densities[di];
      spec.noise_fraction = opts.noise_fraction;
      spec.rng_seed = stream_rng(opts.rng_seed, di, t)();
      SolverConfig trial_cfg = cfg;
      trial_cfg.rng_seed = stream_rng(cfg.rng_seed, di, t)();
      outcomes[job] = run_trial(generate_network(spec), trial_cfg, opts.root);
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(opts.jobs, 1, total);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < jobs; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::vector<SweepRow> rows;
  for (std::size_t di = 0; di < opts.densities.size(); ++di) {
    SweepRow row;
    row.density = opts.densities[di];
    row.trials = opts.trials_per_density;
    std::size_t ok = 0;
    for (std::size_t t = 0; t < opts.trials_per_density; ++t) {
      const TrialOutcome& o = outcomes[di * opts.trials_per_density + t];
      if (!o.success) {
        ++row.failures;
        continue;
      }
      ++ok;
      row.avg_mean_error += o.errors.mean_error;
      row.avg_max_error += o.errors.max_error;
    }
    if (ok > 0) {
      row.avg_mean_error /= static_cast<double>(ok);
      row.avg_max_error /= static_cast<double>(ok);
    } else {
      row.avg_mean_error = row.avg_max_error = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace netloc
