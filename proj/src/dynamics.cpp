#include "cqt/dynamics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cqt/format.hpp"
#include "cqt/integrator.hpp"

namespace cqt {

void IntegratorSettings::validate() const {
  std::string problems;
  auto add = [&problems](const char* msg) {
    if (!problems.empty()) problems += "; ";
    problems += msg;
  };
  if (!(rel_tol > 0) || !std::isfinite(rel_tol)) add("rel_tol must be positive");
  if (!(abs_tol > 0) || !std::isfinite(abs_tol)) add("abs_tol must be positive");
  if (!(max_step > 0) || !std::isfinite(max_step)) add("max_step must be positive");
  if (!(node_guard > 0) || !std::isfinite(node_guard)) add("node_guard must be positive");
  if (max_steps == 0) add("max_steps must be positive");
  if (!problems.empty()) throw Error(ErrorKind::ValidationError, problems);
}

double path_constant(const StateSpec& spec, Complex x) {
  if (const auto* ho = spec.get_if<HarmonicOscillator>()) {
    const Complex y = ho->alpha * x;
    if (ho->n == 0) return std::abs(y);
    if (ho->n == 1) return std::abs(y * y - 1.0);
    // Ψ/Ψ' = (1/α) Σ c_j/(y - y_j), so Im ∫ dx/ẋ ∝ Σ c_j ln|y - y_j| is
    // conserved; the exponent -(n+1) matches the n = 0, 1 catalog forms.
    const auto& roots = spec.stationary_roots();
    const auto& residues = spec.stationary_residues();
    double log_sum = 0;
    for (size_t j = 0; j < roots.size(); ++j) {
      const double d = std::abs(y - roots[j]);
      if (d == 0) return residues[j] < 0 ? 0.0 : std::numeric_limits<double>::infinity();
      log_sum += residues[j] * std::log(d);
    }
    return std::exp(-(ho->n + 1) * log_sum);
  }
  if (const auto* well = spec.get_if<InfiniteSquareWell>()) {
    const double q = 2 * well->n * std::numbers::pi / well->width;
    return std::sqrt(std::max(0.0, std::cosh(q * x.imag()) + std::cos(q * x.real())));
  }
  if (const auto* step = spec.get_if<PotentialStep>()) {
    const double k = step->k, r = step->r;
    const double sq = std::exp(-2 * k * x.imag()) + r * r * std::exp(2 * k * x.imag()) - 2 * r * std::cos(2 * k * x.real());
    return std::sqrt(std::max(0.0, sq));
  }
  return std::exp(-std::get<ConstantPotentialWave>(spec.variant()).k * x.imag());
}

double loop_horizon(const StateSpec& spec) {
  if (is_real_bound_state(spec)) return 20 * time_scale(spec);
  const double k = spec.get_if<PotentialStep>() ? spec.get_if<PotentialStep>()->k
                                                 : std::get<ConstantPotentialWave>(spec.variant()).k;
  // Spatial period π/k of the 2k oscillation, crossed at speed ħk/m.
  return 10 * std::numbers::pi * spec.units().mass / (spec.units().hbar * k * k);
}

namespace {

void check_start(const StateSpec& spec, Complex x0, const IntegratorSettings& settings) {
  settings.validate();
  if (!std::isfinite(x0.real()) || !std::isfinite(x0.imag())) {
    throw Error(ErrorKind::ValidationError, "initial point must be finite");
  }
  if (node_distance(spec, x0) < settings.node_guard) {
    throw Error(ErrorKind::NodeProximity, "initial point " + format_complex(x0) + " lies within the node guard");
  }
}

/// Detects the first return of a planar curve to its start, using the line
/// through x0 normal to the initial direction as a Poincaré section.
class ClosureDetector {
 public:
  ClosureDetector(Complex x0, Complex direction) : x0_(x0) {
    const double len = std::abs(direction);
    enabled_ = len > 0 && std::isfinite(len);
    if (enabled_) dir_ = direction / len;
  }

  template <int N>
  std::optional<double> check(const ode::DenseStep<N>& step) {
    if (!enabled_) return std::nullopt;
    const Complex p0(step.y0(0), step.y0(1));
    const Complex p1(step.y1(0), step.y1(1));
    reach_ = std::max(reach_, std::abs(p1 - x0_));
    const double s0 = section(p0), s1 = section(p1);
    if (!(s0 < 0 && s1 >= 0)) return std::nullopt;

    double lo = step.t0, hi = step.t1();
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      const auto y = step(mid);
      (section(Complex(y(0), y(1))) < 0 ? lo : hi) = mid;
    }
    const double t = 0.5 * (lo + hi);
    const auto y = step(t);
    if (std::abs(Complex(y(0), y(1)) - x0_) > 0.05 * reach_) return std::nullopt;
    return t;
  }

 private:
  double section(Complex p) const { return (std::conj(dir_) * (p - x0_)).real(); }

  Complex x0_;
  Complex dir_;
  bool enabled_ = false;
  double reach_ = 0;
};

}  // namespace

SweepResult sweep(const StateSpec& spec, Complex x0, double t0, const SweepOptions& options,
                  const IntegratorSettings& settings) {
  check_start(spec, x0, settings);
  using V3 = ode::Vec<3>;

  auto rhs = [&spec](double, const V3& y) -> V3 {
    const Complex x(y(0), y(1));
    const Complex v = velocity_unchecked<double>(spec, x);
    return V3(v.real(), v.imag(), log_density_rate(spec, x, v));
  };

  SweepResult out;
  out.path_constant = path_constant(spec, x0);
  out.diagnostics.min_node_distance = node_distance(spec, x0);
  const double pc_scale = out.path_constant > 1e-300 ? out.path_constant : 1.0;

  const Complex v0 = velocity_unchecked<double>(spec, x0);
  out.samples.push_back({t0, x0, v0, 0.0});
  ClosureDetector closure(x0, v0);

  const double scale = length_scale(spec);
  const bool start_on_axis = std::abs(x0.imag()) <= 1e-14 * scale;
  if (options.find_crossings && start_on_axis) {
    out.crossings.push_back({t0, Complex(x0.real(), 0), v0.imag() >= 0 ? 1 : -1, 0.0});
  }

  auto admit = [&](const ode::DenseStep<3>& step) {
    double dmin = std::numeric_limits<double>::infinity();
    for (double th : {0.25, 0.5, 0.75}) {
      const V3 y = step(step.t0 + th * step.h);
      dmin = std::min(dmin, node_distance(spec, Complex(y(0), y(1))));
    }
    dmin = std::min(dmin, node_distance(spec, Complex(step.y1(0), step.y1(1))));
    if (dmin < settings.node_guard) return ode::Admission::Reject;
    out.diagnostics.min_node_distance = std::min(out.diagnostics.min_node_distance, dmin);
    return ode::Admission::Accept;
  };

  // Crossing refinement re-integrates a single substep from the step start,
  // so the located point carries the integrator's local accuracy.
  auto refine_crossing = [&](const ode::DenseStep<3>& step) {
    const V3 k1 = rhs(step.t0, step.y0);
    auto substep = [&](double tau) {
      double err = 0;
      V3 k7;
      return ode::dopri_step<3>(rhs, step.t0, step.y0, k1, tau, settings, err, k7).y1;
    };
    const double sign0 = step.y0(1) > 0 ? 1.0 : -1.0;
    double lo = 0, hi = step.h;
    V3 y = step.y1;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      y = substep(mid);
      if (std::abs(y(1)) <= 1e-12 * std::max(1.0, scale)) {
        lo = hi = mid;
        break;
      }
      (y(1) * sign0 > 0 ? lo : hi) = mid;
      if (hi - lo <= 1e-16 * std::max(1.0, std::abs(step.t0))) break;
    }
    const double tc = step.t0 + 0.5 * (lo + hi);
    const Complex xc(y(0), y(1));
    const Complex vc = velocity_unchecked<double>(spec, xc);
    return SweepCrossing{tc, Complex(y(0), 0), vc.imag() >= 0 ? 1 : -1, y(2)};
  };

  bool closed = false;
  auto observe = [&](const ode::DenseStep<3>& step) {
    std::optional<double> t_close;
    if (options.stop_at_closure) t_close = closure.check<3>(step);

    if (options.find_crossings) {
      const double s0 = step.y0(1), s1 = step.y1(1);
      if ((s0 > 0 && s1 <= 0) || (s0 < 0 && s1 >= 0)) {
        SweepCrossing c = refine_crossing(step);
        const bool after_close = t_close && c.t > *t_close;
        const bool duplicates_start =
            start_on_axis && t_close && c.t > *t_close - 1e-6 * (*t_close - t0);
        if (!after_close && !duplicates_start) out.crossings.push_back(c);
      }
    }

    const double t_end = t_close ? *t_close : step.t1();
    const V3 y = t_close ? step(*t_close) : step.y1;
    const Complex x(y(0), y(1));
    out.samples.push_back({t_end, x, velocity_unchecked<double>(spec, x), y(2)});
    out.path_constant_drift =
        std::max(out.path_constant_drift, std::abs(path_constant(spec, x) - out.path_constant) / pc_scale);
    if (t_close) {
      out.period = *t_close - t0;
      out.closure_gap = std::abs(x - x0);
      closed = true;
      return false;
    }
    return true;
  };

  const auto stats = ode::drive<3>(rhs, t0, V3(x0.real(), x0.imag(), 0.0), options.t_end, settings, admit, observe);
  out.diagnostics.accepted_steps = stats.accepted;
  out.diagnostics.rejected_steps = stats.rejected;
  out.diagnostics.node_rejections = stats.inadmissible;
  (void)closed;
  return out;
}

namespace {

Trajectory to_trajectory(const StateSpec& spec, SweepResult&& r) {
  Trajectory t{spec, {}, r.path_constant, r.path_constant_drift, r.period, r.closure_gap, r.diagnostics};
  t.samples.reserve(r.samples.size());
  for (const auto& s : r.samples) t.samples.push_back({s.t, s.x, s.xdot});
  return t;
}

}  // namespace

Trajectory integrate_trajectory(const StateSpec& spec, Complex x0, std::pair<double, double> t_span,
                                const IntegratorSettings& settings) {
  if (!std::isfinite(t_span.first) || !std::isfinite(t_span.second) || !(t_span.second > t_span.first)) {
    throw Error(ErrorKind::ValidationError, "t_span must be finite with t1 > t0");
  }
  SweepOptions opt;
  opt.t_end = t_span.second;
  return to_trajectory(spec, sweep(spec, x0, t_span.first, opt, settings));
}

Trajectory integrate_loop(const StateSpec& spec, Complex x0, const IntegratorSettings& settings) {
  SweepOptions opt;
  opt.t_end = loop_horizon(spec);
  opt.stop_at_closure = true;
  return to_trajectory(spec, sweep(spec, x0, 0.0, opt, settings));
}

namespace {

PathCurve path_impl(const StateSpec& spec, Complex x0, double arc_length, bool stop_at_closure,
                    const IntegratorSettings& settings) {
  check_start(spec, x0, settings);
  if (!(arc_length > 0) || !std::isfinite(arc_length)) {
    throw Error(ErrorKind::ValidationError, "arc_length must be positive and finite");
  }
  using V2 = ode::Vec<2>;
  const Complex v0 = velocity_unchecked<double>(spec, x0);
  const double speed_scale = spec.units().hbar / (spec.units().mass * length_scale(spec));
  if (!(std::abs(v0) > 1e-12 * speed_scale)) {
    throw Error(ErrorKind::StationaryPoint, "velocity vanishes at " + format_complex(x0));
  }

  auto rhs = [&spec](double, const V2& y) -> V2 {
    const Complex v = velocity_unchecked<double>(spec, Complex(y(0), y(1)));
    const Complex u = v / std::abs(v);
    return V2(u.real(), u.imag());
  };
  auto admit = [&](const ode::DenseStep<2>& step) {
    for (double th : {0.25, 0.5, 0.75, 1.0}) {
      const V2 y = step(step.t0 + th * step.h);
      if (node_distance(spec, Complex(y(0), y(1))) < settings.node_guard) return ode::Admission::Reject;
    }
    return ode::Admission::Accept;
  };

  PathCurve curve{spec, {0.0}, {x0}, std::nullopt};
  ClosureDetector closure(x0, v0);
  auto observe = [&](const ode::DenseStep<2>& step) {
    if (stop_at_closure) {
      if (auto s = closure.check<2>(step)) {
        const V2 y = step(*s);
        curve.arc.push_back(*s);
        curve.points.emplace_back(y(0), y(1));
        curve.loop_length = *s;
        return false;
      }
    }
    curve.arc.push_back(step.t1());
    curve.points.emplace_back(step.y1(0), step.y1(1));
    return true;
  };
  ode::drive<2>(rhs, 0.0, V2(x0.real(), x0.imag()), arc_length, settings, admit, observe);
  return curve;
}

}  // namespace

PathCurve integrate_path(const StateSpec& spec, Complex x0, double arc_length, const IntegratorSettings& settings) {
  return path_impl(spec, x0, arc_length, false, settings);
}

PathCurve integrate_path_loop(const StateSpec& spec, Complex x0, const IntegratorSettings& settings, double max_arc) {
  return path_impl(spec, x0, max_arc, true, settings);
}

}  // namespace cqt
