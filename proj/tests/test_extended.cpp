#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cqt/born.hpp"
#include "cqt/extended.hpp"
#include "cqt/states.hpp"
#include "support.hpp"

using namespace cqt;
using namespace cqt::testing;

namespace {

ErrorKind kind_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::ParseError;
}

DensityFunction closed(const StateSpec& spec) {
  return [&spec](Complex x) { return closed_form_rho(spec, x); };
}

std::vector<StateSpec> closed_form_states() {
  return {StateSpec::harmonic_oscillator(0, 1, 1), StateSpec::harmonic_oscillator(1, 1, 1),
          StateSpec::square_well(1, kPi), StateSpec::square_well(2, 2.0), StateSpec::step(1, kInvSqrt2),
          StateSpec::plane_wave(1, 0)};
}

}  // namespace

TEST_CASE("h examples") {
  CHECK(h_solution(StateSpec::harmonic_oscillator(0, 1, 1), Complex(0.3, -2)) == 1.0);
  CHECK(h_solution(StateSpec::harmonic_oscillator(1, 1, 1), Complex(1, 1)) == doctest::Approx(2.0));
  CHECK(h_solution(StateSpec::square_well(1, kPi), Complex(kPi / 2, 0)) == doctest::Approx(2.0));
  CHECK(kind_of([] { h_solution(StateSpec::harmonic_oscillator(2, 1, 1), Complex(1, 1)); }) ==
        ErrorKind::UnsupportedState);
  // Constant potential: h reduces to |Ψ|².
  const auto step = StateSpec::step(1, kInvSqrt2);
  const Complex x(0.4, 0.3);
  CHECK(h_solution(step, x) == doctest::Approx(std::norm(eval(step, x).psi)).epsilon(1e-12));
}

TEST_CASE("boundary factor examples") {
  const auto ho1 = StateSpec::harmonic_oscillator(1, 1, 1);
  const auto a2 = boundary_f(ho1, find_real_crossings(ho1, Complex(std::sqrt(3.0), 0)));
  CHECK(a2.verdict == Verdict::Defined);
  CHECK(a2.f == doctest::Approx(std::exp(-3.0)).epsilon(1e-9));
  const auto sub = boundary_f(ho1, find_real_crossings(ho1, Complex(std::sqrt(1.5), 0)));
  CHECK(sub.verdict == Verdict::Overdetermined);

  // Well: f = P/h = (sin² x)/(1 - cos 2x) is the same on every reached path.
  const auto well = StateSpec::square_well(1, kPi);
  std::vector<double> fs;
  for (Complex x0 : {Complex(1.0, 0.2), Complex(0.8, -0.3), Complex(2.5, 0.1), Complex(1.5, 0.6)}) {
    const auto b = boundary_f(well, find_real_crossings(well, x0));
    REQUIRE(b.verdict == Verdict::Defined);
    fs.push_back(b.f);
  }
  for (double f : fs) CHECK(f == doctest::Approx(fs.front()).epsilon(1e-9));
}

TEST_CASE("closed form examples") {
  const auto ho1 = StateSpec::harmonic_oscillator(1, 1, 1);
  const double r3 = closed_form_rho(ho1, Complex(std::sqrt(3.0), 0)).rho;
  const double r2 = closed_form_rho(ho1, Complex(std::sqrt(2.0), 0)).rho;
  CHECK(r3 / r2 == doctest::Approx(1.5 * std::exp(-1.0)).epsilon(1e-13));
  CHECK(r3 / r2 == doctest::Approx(born_direct(ho1, std::sqrt(3.0)) / born_direct(ho1, std::sqrt(2.0))));
  CHECK(closed_form_rho(ho1, Complex(0.5, 0)).mask == Mask::Overdetermined);

  const auto ho0 = StateSpec::harmonic_oscillator(0, 1, 1);
  CHECK(closed_form_rho(ho0, Complex(1, 0)).rho / closed_form_rho(ho0, Complex(0, 0)).rho ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(closed_form_rho(ho0, Complex(0.1, 0.2)).rho < closed_form_rho(ho0, Complex(0, 0)).rho);

  CHECK(kind_of([] { closed_form_rho(StateSpec::harmonic_oscillator(2, 1, 1), Complex(1, 1)); }) ==
        ErrorKind::UnsupportedState);

  CHECK(closed_form_rho(ho1, Complex(0, 0)).mask == Mask::NearNode);
}

TEST_CASE("masks") {
  const auto well = StateSpec::square_well(1, kPi);
  CHECK(classify(well, Complex(kPi / 2, std::acosh(4.0) / 2)) == Mask::Unreached);
  CHECK(classify(well, Complex(kPi / 2, 0.3)) == Mask::Defined);
  CHECK(classify(well, Complex(kPi - 1e-4, 0)) == Mask::NearNode);
  const auto step = StateSpec::step(1, kInvSqrt2);
  CHECK(classify(step, Complex(0.5, 2.0)) == Mask::Unreached);
  CHECK(classify(step, Complex(0.5, 0.05)) == Mask::Defined);
  const auto wave = StateSpec::plane_wave(1, 0);
  CHECK(classify(wave, Complex(0.5, 0.0)) == Mask::Defined);
  CHECK(classify(wave, Complex(0.5, 0.1)) == Mask::Unreached);
  const auto ho1 = StateSpec::harmonic_oscillator(1, 1, 1);
  CHECK(classify(ho1, Complex(0.5, 0.5)) == Mask::Defined);
  CHECK(classify(ho1, Complex(1.0, 0.2)) == Mask::Overdetermined);
}

TEST_CASE("property: mask agrees with the crossing verdict") {
  const auto ho1 = StateSpec::harmonic_oscillator(1, 1, 1);
  const auto well = StateSpec::square_well(1, kPi);
  const auto step = StateSpec::step(1, kInvSqrt2);
  for (const StateSpec* spec : {&ho1, &well, &step}) {
    PointSampler sample(*spec, 808, 0.2, 1.0);
    for (int k = 0; k < 20; ++k) {
      const Complex x = sample();
      const double a = path_constant(*spec, x);
      // Skip points whose path hugs a separatrix or the reach boundary.
      if (spec == &ho1 && std::abs(a - 1) < 0.05) continue;
      if (spec == &well && std::abs(a * a - 2) < 0.05) continue;
      if (spec == &step && (std::abs(a - (1 - kInvSqrt2)) < 0.02 || std::abs(a - (1 + kInvSqrt2)) < 0.02)) continue;
      const Verdict v = find_real_crossings(*spec, x).verdict;
      const Mask m = classify(*spec, x);
      const Mask expected = v == Verdict::Defined ? Mask::Defined
                            : v == Verdict::Overdetermined ? Mask::Overdetermined
                                                           : Mask::Unreached;
      CHECK(m == expected);
    }
  }
}

TEST_CASE("trajectory integral examples") {
  SUBCASE("ground state is constant on the circle") {
    const auto ho0 = StateSpec::harmonic_oscillator(0, 1, 1);
    const auto tr = rho_via_trajectory(ho0, Complex(1, 0));
    REQUIRE(tr.verdict == Verdict::Defined);
    for (const auto& s : tr.samples) CHECK(s.rho == doctest::Approx(born_direct(ho0, 1.0)).epsilon(1e-12));
  }
  SUBCASE("starts at P(x_r0)") {
    for (const auto& spec : closed_form_states()) {
      const auto tr = rho_via_trajectory(spec, Complex(0.9 * length_scale(spec) + 0.3, 0.05));
      if (tr.verdict != Verdict::Defined) continue;
      CHECK(tr.samples.front().t == 0.0);
      CHECK(tr.samples.front().rho == doctest::Approx(born_direct(spec, tr.x_r0)).epsilon(1e-14));
    }
  }
  SUBCASE("n=1, A=2 loop matches the closed form") {
    const auto ho1 = StateSpec::harmonic_oscillator(1, 1, 1);
    const auto tr = rho_via_trajectory(ho1, Complex(std::sqrt(3.0), 0));
    REQUIRE(tr.verdict == Verdict::Defined);
    CHECK(tr.samples.size() >= 100);
    for (const auto& s : tr.samples) {
      CHECK(std::abs(s.rho / closed_form_rho(ho1, s.x, 0).rho - 1) <= 1e-4);
    }
  }
  SUBCASE("non-Defined seeds return no samples") {
    const auto ho1 = StateSpec::harmonic_oscillator(1, 1, 1);
    const auto tr = rho_via_trajectory(ho1, Complex(std::sqrt(1.5), 0));
    CHECK(tr.verdict == Verdict::Overdetermined);
    CHECK(tr.samples.empty());
  }
}

TEST_CASE("property: f = rho/h is constant and rho closes after one loop") {
  for (const auto& spec : {StateSpec::harmonic_oscillator(1, 1, 1), StateSpec::square_well(1, kPi),
                           StateSpec::square_well(3, 2.0)}) {
    for (const Complex x0 : loop_seeds(spec, 5, 909)) {
      const auto tr = rho_via_trajectory(spec, x0);
      if (tr.verdict != Verdict::Defined) continue;
      const double f0 = tr.samples.front().rho / h_solution(spec, tr.samples.front().x);
      for (const auto& s : tr.samples) {
        const double h = h_solution(spec, s.x);
        if (h < 1e-6) continue;
        CHECK(std::abs(s.rho / h / f0 - 1) <= 1e-6);
      }
      REQUIRE(tr.period);
      CHECK(std::abs(tr.samples.back().rho / tr.p0 - 1) <= 1e-6);
    }
  }
}

TEST_CASE("residual examples") {
  const auto ho0 = StateSpec::harmonic_oscillator(0, 1, 1);
  CHECK(divergence_residual(ho0, closed(ho0), Complex(0.7, 0.4), 1e-3) <= 1e-5);
  const auto well = StateSpec::square_well(1, kPi);
  CHECK(divergence_residual(well, closed(well), Complex(1.0, 0.3), 1e-3) <= 1e-5);

  // Control: |Ψ|² is not conserved off the axis for a non-constant potential.
  const auto ho1 = StateSpec::harmonic_oscillator(1, 1, 1);
  DensityFunction naive = [&](Complex x) { return MaskedValue{std::norm(eval(ho1, x).psi), Mask::Defined}; };
  CHECK(divergence_residual(ho1, naive, Complex(1.3, 0.6), 1e-3) > 1e-2);

  CHECK(kind_of([&] { divergence_residual(ho1, closed(ho1), Complex(0.9, 0.1), 1e-3); }) == ErrorKind::MaskViolation);
  CHECK(kind_of([&] { divergence_residual(ho1, closed(ho1), Complex(2, 0.1), 0); }) == ErrorKind::ValidationError);
}

TEST_CASE("property: closed forms are conserved") {
  for (const auto& spec : closed_form_states()) {
    PointSampler sample(spec, 1001, 0.1, 1.0);
    int checked = 0;
    for (int k = 0; k < 400 && checked < 100; ++k) {
      const Complex x = sample();
      if (spec.get_if<ConstantPotentialWave>()) break;  // Defined only on the axis.
      double r = 0;
      try {
        r = divergence_residual(spec, closed(spec), x, 1e-3);
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MaskViolation);
        continue;
      }
      CHECK(r <= 1e-5);
      ++checked;
    }
    if (!spec.get_if<ConstantPotentialWave>()) CHECK(checked > 20);
  }
}

TEST_CASE("trajectory-integral density is conserved for n=2") {
  const auto ho2 = StateSpec::harmonic_oscillator(2, 1, 1);
  DensityFunction traj = [&](Complex x) { return trajectory_rho(ho2, x); };
  const Complex x(2.2, 0.4);
  REQUIRE(trajectory_rho(ho2, x).mask == Mask::Defined);
  CHECK(divergence_residual(ho2, traj, x, 1e-3) <= 1e-5);
}

TEST_CASE("property: integrand equivalence") {
  for (const auto& spec : catalog()) {
    PointSampler sample(spec, 1111);
    const double hbar = spec.units().hbar, m = spec.units().mass;
    for (int k = 0; k < 1000; ++k) {
      const Complex x = sample();
      const Complex v = velocity(spec, x);
      const Complex v_pot = eval(spec, x).potential;
      const double lhs = 4 / hbar * (0.5 * m * v * v + v_pot).imag();
      const double rhs = 2 * velocity_derivative(spec, x).real();
      const double floor = 4 / hbar * std::max(1.0, std::abs(0.5 * m * v * v) + std::abs(v_pot));
      CHECK(std::abs(lhs - rhs) <= 1e-9 * floor);
      CHECK(std::abs(log_density_rate(spec, x, v) + lhs) <= 1e-12 * floor);
      // Finite-difference ∂ẋ_r/∂x_r as an independent check of rhs.
      const double h = 1e-5 * length_scale(spec);
      const double fd = (velocity(spec, x + h).real() - velocity(spec, x - h).real()) / (2 * h);
      CHECK(std::abs(2 * fd - rhs) <= 1e-6 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("property: boundary agreement on the real axis") {
  for (const auto& spec : closed_form_states()) {
    const auto span = default_real_span(spec);
    const auto pts = real_grid(spec, span, 2001);
    Eigen::ArrayXd rho(static_cast<Eigen::Index>(pts.size())), p(rho.size());
    std::vector<double> xs;
    for (double x : pts) {
      const auto r = closed_form_rho(spec, Complex(x, 0));
      if (r.mask != Mask::Defined) continue;
      rho[static_cast<Eigen::Index>(xs.size())] = r.rho;
      p[static_cast<Eigen::Index>(xs.size())] = born_direct(spec, x);
      xs.push_back(x);
    }
    const auto n = static_cast<Eigen::Index>(xs.size());
    const Eigen::ArrayXd xa = Eigen::Map<const Eigen::ArrayXd>(xs.data(), n);
    const Eigen::ArrayXd rn = rho.head(n) / trapezoid(xa, rho.head(n));
    const Eigen::ArrayXd pn = p.head(n) / trapezoid(xa, p.head(n));
    CHECK((rn - pn).abs().maxCoeff() <= 1e-9 * pn.maxCoeff());
  }
}

TEST_CASE("property: constant-potential law") {
  for (const auto& spec : {StateSpec::step(1, kInvSqrt2), StateSpec::step(1.5, 0.3), StateSpec::plane_wave(1, 0)}) {
    PointSampler sample(spec, 1212);
    const double k = spec.get_if<PotentialStep>() ? spec.get_if<PotentialStep>()->k
                                                   : spec.get_if<ConstantPotentialWave>()->k;
    const double speed = spec.units().hbar * k / spec.units().mass;
    for (int j = 0; j < 1000; ++j) {
      const Complex x = sample();
      const double rho = closed_form_rho(spec, x).rho;
      CHECK(std::abs(rho / std::norm(eval(spec, x).psi) - 1) <= 1e-10);
      const double a = path_constant(spec, x);
      CHECK(std::abs(rho * std::norm(velocity(spec, x)) / (speed * speed * a * a) - 1) <= 1e-10);
    }
  }
}

TEST_CASE("property: rho is not analytic") {
  for (const auto& spec : closed_form_states()) {
    const Complex x = spec.get_if<ConstantPotentialWave>() ? Complex(0.4, 0) : Complex(0.9, 0.2) * length_scale(spec) + 0.3;
    const double h = 1e-5;
    const double dr = (closed_form_rho(spec, x + h).rho - closed_form_rho(spec, x - h).rho) / (2 * h);
    const double di = (closed_form_rho(spec, x + Complex(0, h)).rho - closed_form_rho(spec, x - Complex(0, h)).rho) / (2 * h);
    // With v = 0 the Cauchy-Riemann residual is |∇ρ|.
    CHECK(std::hypot(dr, di) > 1e-3);
  }
}

TEST_CASE("Poirier density") {
  for (const auto& spec : catalog()) {
    for (double x : {0.3, 1.1}) {
      const auto p = poirier_density(spec, Complex(x, 0));
      CHECK(std::abs(p.rho_c - born_direct(spec, x)) <= 1e-12 * std::max(1.0, born_direct(spec, x)));
    }
  }
  const auto ho0 = StateSpec::harmonic_oscillator(0, 1, 1);
  const auto p = poirier_density(ho0, Complex(0.5, 0.5));
  CHECK(std::abs(p.rho_c - std::conj(eval(ho0, Complex(0.5, -0.5)).psi) * eval(ho0, Complex(0.5, 0.5)).psi) < 1e-15);
  CHECK(std::abs(p.flux_div) > 1e-3);
  CHECK(std::abs(poirier_density(StateSpec::square_well(1, kPi), Complex(1, 0.5)).flux_div) > 1e-3);

  // j' matches a finite difference of j = -(iħ/m) Ψ̄ Ψ'.
  const auto ho1 = StateSpec::harmonic_oscillator(1, 1, 1);
  auto j = [&](Complex x) { return Complex(0, -1) * std::conj(eval(ho1, std::conj(x)).psi) * eval(ho1, x).dpsi; };
  const Complex x(0.8, 0.3);
  const double h = 1e-5;
  CHECK(std::abs((j(x + h) - j(x - h)) / (2 * h) - poirier_density(ho1, x).flux_div) < 1e-8);
}

TEST_CASE("fields") {
  SUBCASE("ground state radial symmetry") {
    const auto ho0 = StateSpec::harmonic_oscillator(0, 1, 1);
    const auto field = closed_form_field(ho0, Lattice{});
    double worst = 0;
    for (int ii = 0; ii < 201; ++ii) {
      for (int ir = 0; ir < 201; ++ir) {
        const Complex x = field.lattice.point(ir, ii);
        worst = std::max(worst, std::abs(field.rho(ii, ir) - std::exp(-std::norm(x)) / born_norm(ho0)));
      }
    }
    CHECK(worst <= 1e-12);
    // Transposed lattice point has the same value.
    CHECK(std::abs(field.rho(30, 170) - field.rho(170, 30)) <= 1e-12);
  }
  SUBCASE("masked view zeroes unreached only") {
    const auto well = StateSpec::square_well(1, kPi);
    const auto field = closed_form_field(well, Lattice{0, kPi, 41, -1, 1, 41});
    int unreached = 0;
    for (int ii = 0; ii < 41; ++ii) {
      for (int ir = 0; ir < 41; ++ir) {
        if (field.mask_at(ir, ii) == Mask::Unreached) {
          ++unreached;
          CHECK(field.masked_rho(ir, ii) == 0.0);
        } else {
          CHECK(field.masked_rho(ir, ii) == field.rho(ii, ir));
        }
      }
    }
    CHECK(unreached > 0);
  }
  SUBCASE("trajectory field matches the closed form") {
    const auto ho1 = StateSpec::harmonic_oscillator(1, 1, 1);
    const Lattice lat{-2.5, 2.5, 7, -1.5, 1.5, 6};
    const auto a = closed_form_field(ho1, lat);
    const auto b = trajectory_field(ho1, lat);
    for (int ii = 0; ii < lat.im_count; ++ii) {
      for (int ir = 0; ir < lat.re_count; ++ir) {
        CHECK(a.mask_at(ir, ii) == b.mask_at(ir, ii));
        if (a.mask_at(ir, ii) == Mask::Defined) CHECK(std::abs(b.rho(ii, ir) / a.rho(ii, ir) - 1) <= 1e-6);
      }
    }
  }
  SUBCASE("lattice validation") {
    CHECK(kind_of([] { Lattice{0, 1, 1, 0, 1, 5}.validate(); }) == ErrorKind::ValidationError);
    CHECK(kind_of([] { Lattice{1, 1, 5, 0, 1, 5}.validate(); }) == ErrorKind::ValidationError);
  }
}
