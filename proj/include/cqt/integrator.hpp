#pragma once

// Explicit Runge-Kutta drivers on fixed-size Eigen vectors: Dormand-Prince
// 5(4) with its continuous extension, and classical RK4 with cubic Hermite
// interpolation. Both hand each accepted step to an observer as a DenseStep.

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "cqt/dynamics.hpp"
#include "cqt/error.hpp"

namespace cqt::ode {

template <int N>
using Vec = Eigen::Matrix<double, N, 1>;

/// One accepted step with interpolant
///   y(θ) = y0 + θ(r1 + (1-θ)(r2 + θ(r3 + (1-θ) r4))),  θ = (t - t0)/h.
/// With r4 = 0 this is the cubic Hermite interpolant.
template <int N>
struct DenseStep {
  double t0 = 0;
  double h = 0;
  Vec<N> y0, y1;
  Vec<N> r1, r2, r3, r4;

  double t1() const { return t0 + h; }

  Vec<N> operator()(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    return y0 + th * (r1 + th1 * (r2 + th * (r3 + th1 * r4)));
  }
};

enum class Admission { Accept, Reject };

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                        a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                        d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                        d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

template <int N>
bool all_finite(const Vec<N>& v) {
  return v.allFinite();
}

}  // namespace detail

/// Single Dormand-Prince step of size h from (t, y) with k1 = f(t, y).
/// Returns the dense step and writes the scaled error norm and k7 = f(t+h, y1).
template <int N, class Rhs>
DenseStep<N> dopri_step(Rhs& f, double t, const Vec<N>& y, const Vec<N>& k1, double h,
                        const IntegratorSettings& s, double& err, Vec<N>& k7) {
  using namespace detail;
  const Vec<N> k2 = f(t + c2 * h, Vec<N>(y + h * a21 * k1));
  const Vec<N> k3 = f(t + c3 * h, Vec<N>(y + h * (a31 * k1 + a32 * k2)));
  const Vec<N> k4 = f(t + c4 * h, Vec<N>(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
  const Vec<N> k5 = f(t + c5 * h, Vec<N>(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
  const Vec<N> k6 = f(t + h, Vec<N>(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
  const Vec<N> y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
  k7 = f(t + h, y1);

  const Vec<N> delta = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  const Vec<N> scale = (s.abs_tol + s.rel_tol * y.cwiseAbs().cwiseMax(y1.cwiseAbs()).array()).matrix();
  err = (delta.array() / scale.array()).abs().maxCoeff();
  if (!all_finite<N>(y1) || !std::isfinite(err)) err = std::numeric_limits<double>::infinity();

  DenseStep<N> step;
  step.t0 = t;
  step.h = h;
  step.y0 = y;
  step.y1 = y1;
  step.r1 = y1 - y;
  step.r2 = h * k1 - step.r1;
  step.r3 = step.r1 - h * k7 - step.r2;
  step.r4 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
  return step;
}

template <int N, class Rhs>
DenseStep<N> rk4_step(Rhs& f, double t, const Vec<N>& y, const Vec<N>& k1, double h, Vec<N>& f1) {
  const Vec<N> k2 = f(t + h / 2, Vec<N>(y + h / 2 * k1));
  const Vec<N> k3 = f(t + h / 2, Vec<N>(y + h / 2 * k2));
  const Vec<N> k4 = f(t + h, Vec<N>(y + h * k3));
  const Vec<N> y1 = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  f1 = f(t + h, y1);
  DenseStep<N> step;
  step.t0 = t;
  step.h = h;
  step.y0 = y;
  step.y1 = y1;
  step.r1 = y1 - y;
  step.r2 = h * k1 - step.r1;
  step.r3 = step.r1 - h * f1 - step.r2;
  step.r4.setZero();
  return step;
}

struct DriveStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t inadmissible = 0;
};

/// Integrates y' = f(t, y) from t0 toward t_end (> t0).
///
/// `admit(step)` may veto an otherwise accurate step (for example when the
/// interpolant enters a node guard); vetoed steps are halved. A veto that
/// persists down to the minimum step raises NodeProximity.
/// `observe(step)` receives each accepted step and returns false to stop.
template <int N, class Rhs, class Admit, class Observe>
DriveStats drive(Rhs&& f, double t0, Vec<N> y, double t_end, const IntegratorSettings& s, Admit&& admit,
                 Observe&& observe) {
  DriveStats stats;
  double t = t0;
  Vec<N> k1 = f(t, y);
  double h = std::min({s.max_step, (t_end - t0) / 16, 1e-2});
  const double h_min = 1e-13 * std::max(1.0, std::abs(t_end));
  const bool adaptive = s.method == IntegratorMethod::AdaptiveRK45;
  if (!adaptive) h = s.max_step;

  while (t < t_end) {
    if (stats.accepted + stats.rejected >= s.max_steps) {
      throw Error(ErrorKind::HorizonExceeded, "step budget exhausted before t = " + std::to_string(t_end));
    }
    const bool last = t + h >= t_end;
    const double h_try = last ? t_end - t : h;
    Vec<N> k_next;
    double err = 0;
    DenseStep<N> step = adaptive ? dopri_step<N>(f, t, y, k1, h_try, s, err, k_next)
                                 : rk4_step<N>(f, t, y, k1, h_try, k_next);
    if (!adaptive && !detail::all_finite<N>(step.y1)) err = std::numeric_limits<double>::infinity();

    if (err > 1.0) {
      ++stats.rejected;
      if (!adaptive && !std::isfinite(err)) {
        throw Error(ErrorKind::StepFailure, "non-finite state in fixed-step integration");
      }
      h = std::isfinite(err) ? h_try * std::max(0.2, 0.9 * std::pow(err, -0.2)) : h_try / 4;
      if (h < h_min) throw Error(ErrorKind::StepFailure, "tolerance unattainable at t = " + std::to_string(t));
      continue;
    }
    if (admit(step) == Admission::Reject) {
      ++stats.rejected;
      ++stats.inadmissible;
      h = h_try / 2;
      if (h < h_min) {
        throw Error(ErrorKind::NodeProximity, "trajectory driven into the node guard at t = " + std::to_string(t));
      }
      continue;
    }

    ++stats.accepted;
    t = last ? t_end : t + h_try;
    y = step.y1;
    k1 = k_next;
    if (!observe(step)) break;
    if (adaptive) {
      const double fac = err > 0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2))) : 5.0;
      h = std::min(s.max_step, h_try * fac);
    }
  }
  return stats;
}

}  // namespace cqt::ode
