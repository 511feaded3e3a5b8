#pragma once

// Complex velocity field mẋ = (ħ/i) Ψ'/Ψ and the trajectories it generates.

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "cqt/error.hpp"
#include "cqt/states.hpp"

namespace cqt {

inline constexpr double kDefaultNodeGuard = 1e-3;

enum class IntegratorMethod { FixedRK4, AdaptiveRK45 };

struct IntegratorSettings {
  IntegratorMethod method = IntegratorMethod::AdaptiveRK45;
  double rel_tol = 1e-10;
  double abs_tol = 1e-10;
  /// Largest accepted step; also the fixed step of FixedRK4.
  double max_step = 0.05;
  /// Minimum allowed distance between the solution and any zero of Ψ.
  double node_guard = kDefaultNodeGuard;
  std::size_t max_steps = 5'000'000;

  /// Throws Error(ValidationError) on non-positive tolerances or guard.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Pointwise field quantities. Templated on the real scalar so identities can
// be checked in extended precision.

template <typename Real>
std::complex<Real> velocity_unchecked(const StateSpec& spec, std::complex<Real> x) {
  const auto s = eval<Real>(spec, x);
  const Real hbar_over_m = Real(spec.units().hbar / spec.units().mass);
  return std::complex<Real>(0, -1) * hbar_over_m * s.dpsi / s.psi;
}

/// ẋ = (ħ/(i m)) Ψ'/Ψ. Throws NodeProximity within `guard` of a zero of Ψ.
template <typename Real = double>
std::complex<Real> velocity(const StateSpec& spec, std::complex<Real> x, double guard = kDefaultNodeGuard) {
  const Complex xd(static_cast<double>(x.real()), static_cast<double>(x.imag()));
  if (node_distance(spec, xd) < guard) {
    throw Error(ErrorKind::NodeProximity, "velocity requested within node guard at " + std::to_string(xd.real()) +
                                              (xd.imag() < 0 ? "" : "+") + std::to_string(xd.imag()) + "i");
  }
  return velocity_unchecked<Real>(spec, x);
}

/// ẋ = (2i(E-V)/ħ) χ/χ' with χ = Ψ' and χ' = -(2m/ħ²)(E-V)Ψ.
template <typename Real = double>
std::complex<Real> velocity_alt(const StateSpec& spec, std::complex<Real> x) {
  const auto s = eval<Real>(spec, x);
  const Real hbar = Real(spec.units().hbar);
  const Real mass = Real(spec.units().mass);
  const std::complex<Real> kinetic = s.energy - s.potential;
  if (s.psi == std::complex<Real>(0) || kinetic == std::complex<Real>(0)) {
    throw Error(ErrorKind::DegeneratePoint, "velocity_alt needs Psi != 0 and E != V");
  }
  const std::complex<Real> chi = s.dpsi;
  const std::complex<Real> dchi = -(Real(2) * mass / (hbar * hbar)) * kinetic * s.psi;
  return std::complex<Real>(0, 2) * kinetic / hbar * chi / dchi;
}

/// dẋ/dx = (ħ/(i m)) (Ψ''/Ψ - (Ψ'/Ψ)²), using the closed-form Ψ''.
template <typename Real = double>
std::complex<Real> velocity_derivative(const StateSpec& spec, std::complex<Real> x) {
  const auto s = eval<Real>(spec, x);
  const Real hbar_over_m = Real(spec.units().hbar / spec.units().mass);
  const std::complex<Real> log_d = s.dpsi / s.psi;
  return std::complex<Real>(0, -1) * hbar_over_m * (s.d2psi / s.psi - log_d * log_d);
}

/// ½mẋ² + V + (ħ/2i) dẋ/dx. Equals E + 0i for an exact eigenstate.
template <typename Real = double>
std::complex<Real> complex_energy(const StateSpec& spec, std::complex<Real> x, double guard = kDefaultNodeGuard) {
  const auto v = velocity<Real>(spec, x, guard);
  const auto s = eval<Real>(spec, x);
  const Real hbar = Real(spec.units().hbar);
  const Real mass = Real(spec.units().mass);
  return Real(0.5) * mass * v * v + s.potential +
         hbar / std::complex<Real>(0, 2) * velocity_derivative<Real>(spec, x);
}

/// Rate of the log of the extended density along a trajectory:
/// d ln ρ/dt = -(4/ħ) Im(½mẋ² + V).
inline double log_density_rate(const StateSpec& spec, Complex x, Complex xdot) {
  const double mass = spec.units().mass;
  const auto s = eval(spec, x);
  return -4.0 / spec.units().hbar * (0.5 * mass * xdot * xdot + s.potential).imag();
}

/// Quantity conserved along every trajectory (|A| for the catalog states):
///   HO n=0   α|x|
///   HO n=1   |α²x² - 1|
///   HO n≥2   Π_j |αx - y_j|^{-(n+1)c_j}  (partial fractions of Ψ/Ψ')
///   well     √(cosh(2nπx_i/a) + cos(2nπx_r/a))
///   step     √(e^{-2kx_i} + r²e^{2kx_i} - 2r cos(2kx_r))
///   wave     e^{-kx_i}
double path_constant(const StateSpec& spec, Complex x);

// ---------------------------------------------------------------------------
// Trajectories

struct IntegratorDiagnostics {
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t node_rejections = 0;
  double min_node_distance = 0;
};

struct TrajectorySample {
  double t;
  Complex x;
  Complex xdot;
};

struct Trajectory {
  StateSpec state;
  std::vector<TrajectorySample> samples;
  /// Path constant at the initial point.
  double path_constant = 0;
  /// max |A(t) - A(0)| / max(A(0), tiny) over the stored samples.
  double path_constant_drift = 0;
  /// Set when the trajectory closed; the final sample is then at t0 + period.
  std::optional<double> period;
  /// |x(t0 + period) - x0| when closed.
  double closure_gap = 0;
  IntegratorDiagnostics diagnostics;
};

/// Integrates ẋ = velocity(x) over [t_span.first, t_span.second].
Trajectory integrate_trajectory(const StateSpec& spec, Complex x0, std::pair<double, double> t_span,
                                const IntegratorSettings& settings = {});

/// Integrates from x0 until the trajectory first closes, or until the
/// default horizon for open trajectories.
Trajectory integrate_loop(const StateSpec& spec, Complex x0, const IntegratorSettings& settings = {});

/// Time horizon used for loops: 20 characteristic periods for bound states,
/// 10 periods of the 2k oscillation for step and plane wave.
double loop_horizon(const StateSpec& spec);

struct PathCurve {
  StateSpec state;
  /// Samples at the accepted arc-length steps (spacing ≤ settings.max_step).
  std::vector<double> arc;
  std::vector<Complex> points;
  /// Arc length of one loop when the path closed.
  std::optional<double> loop_length;
};

/// Integrates the direction field ẋ/|ẋ| in arc length, i.e. the geometric
/// path dx_i/dx_r = ẋ_i/ẋ_r without its singularity at ẋ_r = 0.
PathCurve integrate_path(const StateSpec& spec, Complex x0, double arc_length,
                         const IntegratorSettings& settings = {});

/// Arc-length path through x0, stopped at closure (or at `max_arc`).
PathCurve integrate_path_loop(const StateSpec& spec, Complex x0, const IntegratorSettings& settings = {},
                              double max_arc = 1e3);

// ---------------------------------------------------------------------------
// Real-axis crossings

enum class Verdict { Defined, Overdetermined, Unreached };

struct Crossing {
  double t;
  double x_r0;
  /// Born density |Ψ(x_r0)|² (same scale as born_direct).
  double density;
  /// Sign of dx_i/dt at the crossing (+1, -1).
  int direction;
  /// Boundary factor candidate f_j for this crossing.
  double f_candidate;
};

struct CrossingSet {
  std::vector<Crossing> crossings;
  Verdict verdict = Verdict::Unreached;
  /// Common boundary factor when verdict == Defined.
  double f = 0;
  /// True when the candidates came from the shape factor h; false when the
  /// trajectory-integral weight stood in for an uncatalogued h.
  bool catalog_h = true;
  bool closed = false;
};

/// Relative agreement required between boundary candidates.
inline constexpr double kBoundaryAgreement = 1e-6;

/// Enumerates the real-axis crossings of the trajectory through x0 over one
/// loop (or the open-trajectory horizon) and classifies the boundary data.
CrossingSet find_real_crossings(const StateSpec& spec, Complex x0, const IntegratorSettings& settings = {});

// ---------------------------------------------------------------------------
// Lower-level sweep shared by trajectories, crossings and the trajectory
// integral for ρ. The state carries ln w(t) = ∫ d ln ρ/dt alongside x.

struct SweepSample {
  double t;
  Complex x;
  Complex xdot;
  double log_weight;
};

struct SweepCrossing {
  double t;
  Complex x;
  int direction;
  double log_weight;
};

struct SweepResult {
  std::vector<SweepSample> samples;
  std::vector<SweepCrossing> crossings;
  std::optional<double> period;
  double closure_gap = 0;
  double path_constant = 0;
  double path_constant_drift = 0;
  IntegratorDiagnostics diagnostics;
};

struct SweepOptions {
  double t_end = 0;
  bool stop_at_closure = false;
  bool find_crossings = false;
};

SweepResult sweep(const StateSpec& spec, Complex x0, double t0, const SweepOptions& options,
                  const IntegratorSettings& settings);

}  // namespace cqt
