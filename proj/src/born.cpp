#include "cqt/born.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cqt/format.hpp"

namespace cqt {

double born_direct(const StateSpec& spec, double x_r) {
  return std::norm(eval(spec, Complex(x_r, 0)).psi);
}

double trapezoid(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y) {
  const Eigen::Index n = x.size();
  if (n < 2) return 0;
  return 0.5 * ((x.tail(n - 1) - x.head(n - 1)) * (y.tail(n - 1) + y.head(n - 1))).sum();
}

RealLineGrid normalized(RealLineGrid grid) {
  const double total = trapezoid(grid.points, grid.values);
  if (total > 0) grid.values /= total;
  grid.normalized = true;
  return grid;
}

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double fa, double m, double fm, double b,
                    double fb, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15 * tol) return left + right + delta / 15;
  return simpson_step(f, a, fa, lm, flm, m, fm, left, tol / 2, depth - 1) +
         simpson_step(f, m, fm, rm, frm, b, fb, right, tol / 2, depth - 1);
}

std::vector<double> real_nodes(const StateSpec& spec, double lo, double hi) {
  std::vector<double> out;
  for (Complex z : nodes(spec, Window{lo, hi, -1e-300, 1e-300})) {
    if (z.imag() == 0) out.push_back(z.real());
  }
  return out;
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  if (a == b) return 0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  return simpson_step(f, a, fa, m, fm, b, fb, whole, tol, 50);
}

RealLineGrid born_from_velocity(const StateSpec& spec, std::span<const double> points, double anchor,
                                double node_guard) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 2) throw Error(ErrorKind::ValidationError, "born grid needs at least two points");
  for (Eigen::Index j = 1; j < n; ++j) {
    if (!(points[j] > points[j - 1])) throw Error(ErrorKind::ValidationError, "born grid must be strictly increasing");
  }
  for (double x : points) {
    if (node_distance(spec, Complex(x, 0)) < node_guard) {
      throw Error(ErrorKind::NodeOnGrid, "grid point " + format_number(x) + " lies within the node guard");
    }
  }
  const auto anchor_it = std::find(points.begin(), points.end(), anchor);
  if (anchor_it == points.end()) throw Error(ErrorKind::ValidationError, "anchor must be a grid point");

  const double two_m_over_hbar = 2 * spec.units().mass / spec.units().hbar;
  auto xdot_i = [&spec](double x) { return velocity_unchecked<double>(spec, Complex(x, 0)).imag(); };
  // Exponent of P between two points on the same node-free segment.
  auto exponent = [&](double a, double b) { return -two_m_over_hbar * adaptive_simpson(xdot_i, a, b, 1e-13); };

  RealLineGrid out;
  out.points = Eigen::Map<const Eigen::ArrayXd>(points.data(), n);
  out.values.resize(n);

  const auto cuts = real_nodes(spec, points.front(), points.back());
  if (cuts.empty()) {
    const auto ia = static_cast<Eigen::Index>(anchor_it - points.begin());
    Eigen::ArrayXd logp(n);
    logp(ia) = 0;
    for (Eigen::Index j = ia + 1; j < n; ++j) logp(j) = logp(j - 1) + exponent(points[j - 1], points[j]);
    for (Eigen::Index j = ia - 1; j >= 0; --j) logp(j) = logp(j + 1) - exponent(points[j], points[j + 1]);
    out.values = (logp - logp.maxCoeff()).exp();
    return normalized(std::move(out));
  }

  // Segment boundaries: grid indices where a node sits between j-1 and j.
  std::vector<Eigen::Index> starts{0};
  for (Eigen::Index j = 1; j < n; ++j) {
    for (double c : cuts) {
      if (points[j - 1] < c && c < points[j]) {
        starts.push_back(j);
        break;
      }
    }
  }
  starts.push_back(n);
  for (size_t s = 0; s + 1 < starts.size(); ++s) {
    const Eigen::Index b = starts[s], e = starts[s + 1];
    const double mid = 0.5 * (points[b] + points[e - 1]);
    // Grid point nearest the midpoint is the segment's local anchor.
    Eigen::Index ia = b;
    for (Eigen::Index j = b; j < e; ++j) {
      if (std::abs(points[j] - mid) < std::abs(points[ia] - mid)) ia = j;
    }
    const double log_mid = std::log(born_direct(spec, mid));
    Eigen::ArrayXd logp(e - b);
    logp(ia - b) = log_mid + exponent(mid, points[ia]);
    for (Eigen::Index j = ia + 1; j < e; ++j) logp(j - b) = logp(j - 1 - b) + exponent(points[j - 1], points[j]);
    for (Eigen::Index j = ia - 1; j >= b; --j) logp(j - b) = logp(j + 1 - b) - exponent(points[j], points[j + 1]);
    out.values.segment(b, e - b) = logp.exp();
  }
  return normalized(std::move(out));
}

RealLineGrid born_direct_grid(const StateSpec& spec, std::span<const double> points) {
  RealLineGrid out;
  const auto n = static_cast<Eigen::Index>(points.size());
  out.points = Eigen::Map<const Eigen::ArrayXd>(points.data(), n);
  out.values.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) out.values(j) = born_direct(spec, points[j]);
  return normalized(std::move(out));
}

std::pair<double, double> default_real_span(const StateSpec& spec) {
  if (const auto* ho = spec.get_if<HarmonicOscillator>()) {
    return {-8.0 / ho->alpha, 8.0 / ho->alpha};
  }
  if (const auto* well = spec.get_if<InfiniteSquareWell>()) return {0.0, well->width};
  return {0.0, 4 * std::numbers::pi * length_scale(spec)};
}

std::vector<double> real_grid(const StateSpec& spec, std::pair<double, double> span, int count, double node_guard) {
  if (count < 2) throw Error(ErrorKind::ValidationError, "grid count must be at least 2");
  std::vector<double> out(static_cast<size_t>(count));
  const double step = (span.second - span.first) / (count - 1);
  for (int j = 0; j < count; ++j) out[static_cast<size_t>(j)] = span.first + j * step;
  out.back() = span.second;
  const double shift = 1.5 * node_guard;
  const auto cuts = real_nodes(spec, span.first - shift, span.second + shift);
  for (double& x : out) {
    for (double c : cuts) {
      if (std::abs(x - c) < shift) {
        // Stay inside the span; the box edges of the well are nodes.
        if (x - c >= 0 || c - shift < span.first) x = c + shift;
        else x = c - shift;
        if (x > span.second) x = c - shift;
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double born_norm(const StateSpec& spec) {
  const auto span = default_real_span(spec);
  const int count = 4001;
  Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(count, span.first, span.second);
  Eigen::ArrayXd p(count);
  for (int j = 0; j < count; ++j) p(j) = born_direct(spec, x(j));
  return trapezoid(x, p);
}

Complex expectation(const StateSpec& spec, const Observable& observable, const RealLineGrid& grid, double node_guard) {
  if (!grid.normalized) throw Error(ErrorKind::ValidationError, "expectation requires a normalized grid");
  const Eigen::Index n = grid.points.size();
  Eigen::ArrayXd re(n), im(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double x = grid.points(j);
    if (node_distance(spec, Complex(x, 0)) < node_guard) {
      throw Error(ErrorKind::NodeOnGrid, "observable needs the velocity at a node, x = " + format_number(x));
    }
    const Complex value = observable(x, velocity_unchecked<double>(spec, Complex(x, 0))) * grid.values(j);
    re(j) = value.real();
    im(j) = value.imag();
  }
  return {trapezoid(grid.points, re), trapezoid(grid.points, im)};
}

}  // namespace cqt
