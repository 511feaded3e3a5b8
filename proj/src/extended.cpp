#include "cqt/extended.hpp"

#include <cmath>
#include <numbers>

#include "cqt/born.hpp"
#include "cqt/format.hpp"
#include "cqt/parallel.hpp"

namespace cqt {

std::string_view to_string(Mask mask) {
  switch (mask) {
    case Mask::Defined: return "defined";
    case Mask::Overdetermined: return "overdet";
    case Mask::Unreached: return "unreached";
    case Mask::NearNode: return "nearnode";
  }
  return "defined";
}

bool has_catalog_h(const StateSpec& spec) {
  const auto* ho = spec.get_if<HarmonicOscillator>();
  return ho == nullptr || ho->n <= 1;
}

namespace {

[[noreturn]] void unsupported(const StateSpec& spec) {
  throw Error(ErrorKind::UnsupportedState, "no closed-form shape factor for " + spec.to_string());
}

/// |Ψ|² of the step / plane wave written out in x_r, x_i.
double constant_potential_density(double k, double r, Complex x) {
  return std::exp(-2 * k * x.imag()) + 2 * r * std::cos(2 * k * x.real()) + r * r * std::exp(2 * k * x.imag());
}

double wave_number(const StateSpec& spec) {
  if (const auto* step = spec.get_if<PotentialStep>()) return step->k;
  return std::get<ConstantPotentialWave>(spec.variant()).k;
}

double reflection(const StateSpec& spec) {
  if (const auto* step = spec.get_if<PotentialStep>()) return step->r;
  return 0.0;
}

}  // namespace

double h_solution(const StateSpec& spec, Complex x) {
  if (const auto* ho = spec.get_if<HarmonicOscillator>()) {
    if (ho->n == 0) return 1.0;
    if (ho->n == 1) return x.real() * x.real() + x.imag() * x.imag();
    unsupported(spec);
  }
  if (const auto* well = spec.get_if<InfiniteSquareWell>()) {
    const double q = 2 * well->n * std::numbers::pi / well->width;
    return std::cosh(q * x.imag()) - std::cos(q * x.real());
  }
  // Constant potential: ρ ∝ |A|²/|ẋ|².
  const double k = wave_number(spec);
  const double speed = spec.units().hbar * k / spec.units().mass;
  const Complex v = velocity_unchecked<double>(spec, x);
  const double a = path_constant(spec, x);
  if (std::norm(v) < 1e-300) return constant_potential_density(k, reflection(spec), x);
  return speed * speed * a * a / std::norm(v);
}

BoundaryFactor boundary_f(const StateSpec&, const CrossingSet& crossings) {
  return {crossings.verdict, crossings.verdict == Verdict::Defined ? crossings.f : 0.0};
}

Mask classify(const StateSpec& spec, Complex x, double node_guard) {
  Mask region = Mask::Defined;
  if (const auto* ho = spec.get_if<HarmonicOscillator>()) {
    if (ho->n == 1 && path_constant(spec, x) < 1.0) region = Mask::Overdetermined;
    else if (ho->n >= 2) unsupported(spec);
  } else if (spec.get_if<InfiniteSquareWell>()) {
    const double a = path_constant(spec, x);
    if (a * a > 2.0) region = Mask::Unreached;
  } else if (const auto* step = spec.get_if<PotentialStep>()) {
    const double a = path_constant(spec, x);
    const double lo = (1 - step->r) * (1 - step->r), hi = (1 + step->r) * (1 + step->r);
    if (a * a < lo || a * a > hi) region = Mask::Unreached;
  } else {
    if (x.imag() != 0) region = Mask::Unreached;
  }
  if (region == Mask::Defined && node_distance(spec, x) < node_guard) return Mask::NearNode;
  return region;
}

MaskedValue closed_form_rho(const StateSpec& spec, Complex x, double node_guard) {
  const Mask mask = classify(spec, x, node_guard);
  const double xr = x.real(), xi = x.imag();
  if (const auto* ho = spec.get_if<HarmonicOscillator>()) {
    const double a2 = ho->alpha * ho->alpha;
    if (ho->n == 0) return {std::exp(-a2 * (xr * xr + xi * xi)), mask};
    // h = x_r² + x_i², f ∝ exp(-√((α²x_r² - α²x_i² - 1)² + 4α⁴x_r²x_i²)); the
    // factor α² e^{-1} ties the real axis to |Ψ|² = α²x²e^{-α²x²}.
    const double u = a2 * xr * xr - a2 * xi * xi - 1;
    const double root = std::sqrt(u * u + 4 * a2 * a2 * xr * xr * xi * xi);
    return {a2 * std::exp(-1.0) * (xr * xr + xi * xi) * std::exp(-root), mask};
  }
  if (const auto* well = spec.get_if<InfiniteSquareWell>()) {
    const double q = 2 * well->n * std::numbers::pi / well->width;
    return {(std::cosh(q * xi) - std::cos(q * xr)) / well->width, mask};
  }
  return {constant_potential_density(wave_number(spec), reflection(spec), x), mask};
}

RhoDecomposition decompose(const StateSpec& spec, Complex x) {
  const double h = h_solution(spec, x);
  const double rho = closed_form_rho(spec, x, 0.0).rho;
  return {h, h != 0 ? rho / h : 0.0};
}

RhoTrace rho_via_trajectory(const StateSpec& spec, Complex seed, const IntegratorSettings& settings) {
  const CrossingSet cs = find_real_crossings(spec, seed, settings);
  RhoTrace trace;
  trace.verdict = cs.verdict;
  trace.path_constant = path_constant(spec, seed);
  if (cs.verdict != Verdict::Defined) return trace;

  trace.x_r0 = cs.crossings.front().x_r0;
  trace.p0 = born_direct(spec, trace.x_r0);
  SweepOptions opt;
  opt.t_end = loop_horizon(spec);
  opt.stop_at_closure = true;
  const SweepResult r = sweep(spec, Complex(trace.x_r0, 0), 0.0, opt, settings);
  trace.period = r.period;
  trace.samples.reserve(r.samples.size());
  for (const auto& s : r.samples) trace.samples.push_back({s.t, s.x, trace.p0 * std::exp(s.log_weight)});
  return trace;
}

MaskedValue trajectory_rho(const StateSpec& spec, Complex x, const IntegratorSettings& settings) {
  if (node_distance(spec, x) < settings.node_guard) return {0.0, Mask::NearNode};
  SweepOptions opt;
  opt.t_end = loop_horizon(spec);
  opt.stop_at_closure = true;
  opt.find_crossings = true;
  const SweepResult r = sweep(spec, x, 0.0, opt, settings);
  if (r.crossings.empty()) return {0.0, Mask::Unreached};

  std::vector<double> candidates;
  for (const auto& c : r.crossings) {
    candidates.push_back(born_direct(spec, c.x.real()) * std::exp(-c.log_weight));
  }
  double lo = candidates.front(), hi = candidates.front();
  for (double v : candidates) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const bool agree = hi - lo <= kBoundaryAgreement * std::max(std::abs(hi), 1e-300);
  return {candidates.front(), agree ? Mask::Defined : Mask::Overdetermined};
}

double divergence_residual(const StateSpec& spec, const DensityFunction& rho_at, Complex x, double h_step) {
  if (!(h_step > 0)) throw Error(ErrorKind::ValidationError, "h_step must be positive");
  const Complex stencil[4] = {x + h_step, x - h_step, x + Complex(0, h_step), x - Complex(0, h_step)};
  const MaskedValue center = rho_at(x);
  if (center.mask != Mask::Defined) {
    throw Error(ErrorKind::MaskViolation, "residual center " + format_complex(x) + " is " + std::string(to_string(center.mask)));
  }
  Complex flux[4];
  for (int j = 0; j < 4; ++j) {
    const MaskedValue m = rho_at(stencil[j]);
    if (m.mask != Mask::Defined) {
      throw Error(ErrorKind::MaskViolation,
                  "stencil point " + format_complex(stencil[j]) + " is " + std::string(to_string(m.mask)));
    }
    flux[j] = m.rho * velocity(spec, stencil[j], 0.0);
  }
  const double div = (flux[0].real() - flux[1].real()) / (2 * h_step) + (flux[2].imag() - flux[3].imag()) / (2 * h_step);
  const Complex v = velocity(spec, x, 0.0);
  const double scale = std::abs(center.rho) * (std::abs(v) / length_scale(spec) + std::abs(velocity_derivative(spec, x)));
  return std::abs(div) / scale;
}

PoirierSample poirier_density(const StateSpec& spec, Complex x) {
  const auto s = eval(spec, x);
  const auto mirror = eval(spec, std::conj(x));
  const Complex psi_bar = std::conj(mirror.psi);
  const Complex dpsi_bar = std::conj(mirror.dpsi);
  const double hbar = spec.units().hbar, mass = spec.units().mass;
  const Complex d2psi = -(2 * mass / (hbar * hbar)) * (s.energy - s.potential) * s.psi;
  const Complex j_scale = Complex(0, -hbar / mass);
  return {psi_bar * s.psi, j_scale * (dpsi_bar * s.dpsi + psi_bar * d2psi)};
}

Complex Lattice::point(int i_re, int i_im) const {
  const double xr = re_count > 1 ? re_min + (re_max - re_min) * i_re / (re_count - 1) : re_min;
  const double xi = im_count > 1 ? im_min + (im_max - im_min) * i_im / (im_count - 1) : im_min;
  return {xr, xi};
}

void Lattice::validate() const {
  std::string problems;
  auto add = [&problems](const char* msg) {
    if (!problems.empty()) problems += "; ";
    problems += msg;
  };
  if (re_count < 2) add("grid x_r count must be at least 2");
  if (im_count < 2) add("grid x_i count must be at least 2");
  if (!(re_max > re_min) || !std::isfinite(re_min) || !std::isfinite(re_max)) add("grid x_r range is degenerate");
  if (!(im_max > im_min) || !std::isfinite(im_min) || !std::isfinite(im_max)) add("grid x_i range is degenerate");
  if (!problems.empty()) throw Error(ErrorKind::ValidationError, problems);
}

namespace {

template <class PointFn>
ProbabilityField fill_field(const Lattice& lattice, double norm, PointFn&& at) {
  lattice.validate();
  ProbabilityField field{lattice, Eigen::ArrayXXd(lattice.im_count, lattice.re_count),
                         std::vector<Mask>(static_cast<size_t>(lattice.im_count * lattice.re_count))};
  parallel_rows(lattice.im_count, [&](int ii) {
    for (int ir = 0; ir < lattice.re_count; ++ir) {
      const MaskedValue v = at(lattice.point(ir, ii));
      field.rho(ii, ir) = v.rho / norm;
      field.mask[static_cast<size_t>(ii * lattice.re_count + ir)] = v.mask;
    }
  });
  return field;
}

}  // namespace

ProbabilityField closed_form_field(const StateSpec& spec, const Lattice& lattice, double node_guard) {
  return fill_field(lattice, born_norm(spec), [&](Complex x) { return closed_form_rho(spec, x, node_guard); });
}

ProbabilityField trajectory_field(const StateSpec& spec, const Lattice& lattice, const IntegratorSettings& settings) {
  settings.validate();
  return fill_field(lattice, born_norm(spec), [&](Complex x) { return trajectory_rho(spec, x, settings); });
}

}  // namespace cqt
