#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "netloc/errors.hpp"
#include "netloc/harness.hpp"
#include "netloc/network.hpp"

namespace netloc {

// Text formats. Node labels are 1-based on disk and 0-based in memory. Reals
// are written with 17 significant digits so a round trip is exact.
//
//   instance:  n d n0        then n0 lines  i j lower_sq upper_sq
//   positions: n lines       i x y

namespace detail {

inline constexpr int kFilePrecision = 17;

// Reads non-blank lines, skipping '#' comments, and tracks line numbers for
// error messages.
class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  bool next(std::istringstream& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      fields.clear();
      fields.str(line);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(source_ + ":" + std::to_string(line_no_) + ": " + what);
  }

  template <typename... T>
  void read_exact(std::istringstream& fields, const char* what, T&... out) {
    if (!(fields >> ... >> out)) fail(std::string("expected ") + what);
    std::string extra;
    if (fields >> extra) fail("unexpected trailing token '" + extra + "'");
  }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_no_ = 0;
};

inline std::size_t to_index(long long label, std::size_t n, const LineReader& r) {
  if (label < 1 || static_cast<unsigned long long>(label) > n)
    r.fail("node label " + std::to_string(label) + " outside 1.." + std::to_string(n));
  return static_cast<std::size_t>(label - 1);
}

template <typename F>
auto with_file(const std::string& path, F&& f) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return f(in);
}

}  // namespace detail

inline NetworkInstance read_instance(std::istream& in, const std::string& source = "<instance>") {
  detail::LineReader r(in, source);
  std::istringstream fields;
  if (!r.next(fields)) r.fail("missing header 'n d n0'");
  long long n = 0, d = 0, n0 = 0;
  r.read_exact(fields, "header 'n d n0'", n, d, n0);
  if (n < 1) r.fail("node count must be positive");
  if (d != static_cast<long long>(kDimension)) r.fail("only dimension 2 is supported");
  if (n0 < 1) r.fail("edge count must be positive");

  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n0));
  for (long long e = 0; e < n0; ++e) {
    if (!r.next(fields))
      r.fail("expected " + std::to_string(n0) + " edges, got " + std::to_string(e));
    long long i = 0, j = 0;
    double lo = 0.0, hi = 0.0;
    r.read_exact(fields, "edge 'i j lower_sq upper_sq'", i, j, lo, hi);
    if (!std::isfinite(lo) || !std::isfinite(hi)) r.fail("bounds must be finite");
    const auto nn = static_cast<std::size_t>(n);
    edges.push_back({detail::to_index(i, nn, r), detail::to_index(j, nn, r), lo, hi});
  }
  if (r.next(fields)) r.fail("more edge lines than n0 = " + std::to_string(n0));
  try {
    return NetworkInstance(static_cast<std::size_t>(n), std::move(edges));
  } catch (const InvalidNetworkError& e) {
    throw ParseError(source + ": " + e.what());
  }
}

inline void write_instance(std::ostream& os, const NetworkInstance& net) {
  const auto old = os.precision(detail::kFilePrecision);
  os << net.node_count() << ' ' << kDimension << ' ' << net.edge_count() << '\n';
  for (const Edge& e : net.edges())
    os << e.i + 1 << ' ' << e.j + 1 << ' ' << e.lower_sq << ' ' << e.upper_sq << '\n';
  os.precision(old);
}

/// Positions file: one line per node, labels 1..n each exactly once, in any
/// order.
inline Configuration read_positions(std::istream& in, const std::string& source = "<positions>") {
  detail::LineReader r(in, source);
  std::istringstream fields;
  std::vector<std::pair<long long, Point2>> rows;
  while (r.next(fields)) {
    long long i = 0;
    Point2 p;
    r.read_exact(fields, "position 'i x y'", i, p.x, p.y);
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) r.fail("coordinates must be finite");
    rows.emplace_back(i, p);
  }
  if (rows.empty()) r.fail("no positions");
  const std::size_t n = rows.size();
  Configuration x(n);
  std::vector<bool> seen(n, false);
  for (const auto& [label, p] : rows) {
    if (label < 1 || static_cast<std::size_t>(label) > n)
      throw ParseError(source + ": node label " + std::to_string(label) + " outside 1.." +
                       std::to_string(n));
    const auto i = static_cast<std::size_t>(label - 1);
    if (seen[i]) throw ParseError(source + ": node " + std::to_string(label) + " listed twice");
    seen[i] = true;
    x.set_point(i, p);
  }
  return x;
}

inline void write_positions(std::ostream& os, const Configuration& x) {
  const auto old = os.precision(detail::kFilePrecision);
  for (std::size_t i = 0; i < x.node_count(); ++i)
    os << i + 1 << ' ' << x.point(i).x << ' ' << x.point(i).y << '\n';
  os.precision(old);
}

inline NetworkInstance load_instance(const std::string& path) {
  return detail::with_file(path, [&](std::istream& in) { return read_instance(in, path); });
}

inline Configuration load_positions(const std::string& path) {
  return detail::with_file(path, [&](std::istream& in) { return read_positions(in, path); });
}

inline void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  const auto old = os.precision(detail::kFilePrecision);
  os << "density,avg_mean_error,avg_max_error,trials,failures\n";
  for (const SweepRow& r : rows)
    os << r.density << ',' << r.avg_mean_error << ',' << r.avg_max_error << ',' << r.trials << ','
       << r.failures << '\n';
  os.precision(old);
}

/// Uses the aligned estimate stored in the report.
inline void write_scatter_csv(std::ostream& os, const Configuration& truth,
                              const ErrorReport& report) {
  const auto old = os.precision(detail::kFilePrecision);
  os << "node,truth_x,truth_y,est_x,est_y,offset\n";
  for (std::size_t i = 0; i < truth.node_count(); ++i) {
    const Point2 t = truth.point(i);
    const Point2 e = report.aligned_estimate.point(i);
    os << i + 1 << ',' << t.x << ',' << t.y << ',' << e.x << ',' << e.y << ','
       << report.per_node_offsets[i] << '\n';
  }
  os.precision(old);
}

/// Static scatter plot: circles at the truth, crosses at the estimate and a
/// line for each offset. y points up.
inline void write_scatter_svg(std::ostream& os, const Configuration& truth,
                              const ErrorReport& report) {
  const Configuration& est = report.aligned_estimate;
  double lo_x = truth.point(0).x, hi_x = lo_x, lo_y = truth.point(0).y, hi_y = lo_y;
  for (const Configuration* c : {&truth, &est})
    for (std::size_t i = 0; i < c->node_count(); ++i) {
      lo_x = std::min(lo_x, c->point(i).x);
      hi_x = std::max(hi_x, c->point(i).x);
      lo_y = std::min(lo_y, c->point(i).y);
      hi_y = std::max(hi_y, c->point(i).y);
    }
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-9});
  const double size = 500.0, pad = 30.0, scale = (size - 2.0 * pad) / span;
  const double r = 5.0;
  auto sx = [&](double x) { return pad + (x - lo_x) * scale; };
  auto sy = [&](double y) { return size - pad - (y - lo_y) * scale; };

  const auto old = os.precision(6);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
     << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<g id=\"offsets\" stroke=\"gray\" stroke-width=\"1\">\n";
  for (std::size_t i = 0; i < truth.node_count(); ++i)
    os << "<line x1=\"" << sx(truth.point(i).x) << "\" y1=\"" << sy(truth.point(i).y)
       << "\" x2=\"" << sx(est.point(i).x) << "\" y2=\"" << sy(est.point(i).y) << "\"/>\n";
  os << "</g>\n<g id=\"truth\" fill=\"none\" stroke=\"blue\" stroke-width=\"1.5\">\n";
  for (std::size_t i = 0; i < truth.node_count(); ++i)
    os << "<circle class=\"truth\" cx=\"" << sx(truth.point(i).x) << "\" cy=\""
       << sy(truth.point(i).y) << "\" r=\"" << r << "\"/>\n";
  os << "</g>\n<g id=\"estimate\" stroke=\"red\" stroke-width=\"1.5\">\n";
  for (std::size_t i = 0; i < est.node_count(); ++i) {
    const double cx = sx(est.point(i).x), cy = sy(est.point(i).y);
    os << "<path class=\"estimate\" d=\"M" << cx - r << ' ' << cy - r << " L" << cx + r << ' '
       << cy + r << " M" << cx - r << ' ' << cy + r << " L" << cx + r << ' ' << cy - r
       << "\"/>\n";
  }
  os << "</g>\n</svg>\n";
  os.precision(old);
}

}  // namespace netloc
