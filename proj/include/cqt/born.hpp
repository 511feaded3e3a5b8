#pragma once

// Born density on the real line, recovered from the imaginary part of the
// complex velocity: P(x_r) = N exp(-(2m/ħ) ∫ ẋ_i(x_r, 0) dx_r).

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "cqt/dynamics.hpp"

namespace cqt {

struct RealLineGrid {
  Eigen::ArrayXd points;
  Eigen::ArrayXd values;
  bool normalized = false;
};

/// |Ψ(x_r + 0i)|², unnormalized.
double born_direct(const StateSpec& spec, double x_r);

/// Trapezoid rule over a (possibly non-uniform) grid.
double trapezoid(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y);

/// Copy of `grid` scaled to unit trapezoid integral.
RealLineGrid normalized(RealLineGrid grid);

/// Born density from the velocity field on `points` (strictly increasing,
/// at least node_guard away from every real zero of Ψ).
///
/// Between consecutive points ẋ_i is integrated by adaptive Simpson. On a
/// node-free line the exponent is anchored at `anchor` (a grid point). When
/// real nodes split the grid, each node-free segment gets its constant by
/// matching born_direct at the segment midpoint, since the exponent diverges
/// logarithmically at every node. The result is normalized.
RealLineGrid born_from_velocity(const StateSpec& spec, std::span<const double> points, double anchor,
                                double node_guard = kDefaultNodeGuard);

/// Normalized |Ψ|² on the same points.
RealLineGrid born_direct_grid(const StateSpec& spec, std::span<const double> points);

/// Default truncation of the real line: ±8/α for the oscillator, the box
/// for the well, four periods of |Ψ|² for step and plane wave.
std::pair<double, double> default_real_span(const StateSpec& spec);

/// Uniform grid of `count` points on `span`; points closer than 1.5·guard to
/// a real node are moved to node ± 1.5·guard.
std::vector<double> real_grid(const StateSpec& spec, std::pair<double, double> span, int count,
                              double node_guard = kDefaultNodeGuard);

/// ∫ P dx over the default span on a 4001-point grid; converts the
/// unnormalized closed forms to densities.
double born_norm(const StateSpec& spec);

using Observable = std::function<Complex(double x, Complex xdot)>;

/// ⟨O⟩ = ∫ O(x_r, ẋ(x_r, 0)) P(x_r) dx_r by the trapezoid rule over a
/// normalized grid. Complex observables give complex averages.
Complex expectation(const StateSpec& spec, const Observable& observable, const RealLineGrid& grid,
                    double node_guard = kDefaultNodeGuard);

/// Adaptive Simpson quadrature of a real function to absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol);

}  // namespace cqt
