#pragma once

// Closed-form stationary states evaluated at complex positions.
//
// Conventions (unnormalized):
//   harmonic oscillator  Ψ_n = p_n(αx) e^{-α²x²/2},  p_n = H_n / 2^n (monic Hermite)
//   square well          Ψ_n = √(2/a) sin(nπx/a)
//   potential step       Ψ   = e^{ikx} + r e^{-ikx}
//   plane wave           Ψ   = e^{ikx}
//
// Second derivatives are formed from the closed forms directly, not from the
// Schrödinger equation, so identities built on Ψ'' are real checks of E.

#include <cmath>
#include <complex>
#include <numbers>
#include <type_traits>

#include "cqt/state.hpp"

namespace cqt {

template <typename Real>
struct WavefunctionSample {
  std::complex<Real> psi;
  std::complex<Real> dpsi;
  std::complex<Real> d2psi;
  std::complex<Real> potential;
  Real energy;
};

namespace detail {

/// Monic Hermite p_n(y) and its first two derivatives.
template <typename Real>
struct HermiteValues {
  std::complex<Real> p, dp, d2p;
};

template <typename Real>
HermiteValues<Real> monic_hermite(int n, std::complex<Real> y) {
  using C = std::complex<Real>;
  // p_{k+1} = y p_k - (k/2) p_{k-1};  p_n' = n p_{n-1};  p_n'' = n(n-1) p_{n-2}
  C pm2(0), pm1(0), p(1);
  for (int k = 0; k < n; ++k) {
    C next = y * p - (Real(k) / Real(2)) * pm1;
    pm2 = pm1;
    pm1 = p;
    p = next;
  }
  return {p, Real(n) * pm1, Real(n) * Real(n - 1) * pm2};
}

}  // namespace detail

template <typename Real>
WavefunctionSample<Real> eval(const StateSpec& spec, std::complex<Real> x) {
  using C = std::complex<Real>;
  const Real hbar = Real(spec.units().hbar);
  const Real mass = Real(spec.units().mass);
  const C i(0, 1);

  if (const auto* ho = spec.get_if<HarmonicOscillator>()) {
    const Real alpha = Real(ho->alpha);
    const Real omega = Real(ho->omega);
    const C y = alpha * x;
    const C gauss = std::exp(-y * y / Real(2));
    const auto h = detail::monic_hermite<Real>(ho->n, y);
    return {h.p * gauss,
            alpha * (h.dp - y * h.p) * gauss,
            alpha * alpha * (h.d2p - Real(2) * y * h.dp + (y * y - Real(1)) * h.p) * gauss,
            Real(0.5) * mass * omega * omega * x * x,
            (Real(ho->n) + Real(0.5)) * hbar * omega};
  }
  if (const auto* well = spec.get_if<InfiniteSquareWell>()) {
    const Real a = Real(well->width);
    const Real kn = Real(well->n) * std::numbers::pi_v<Real> / a;
    const Real amp = std::sqrt(Real(2) / a);
    const C s = std::sin(kn * x);
    return {amp * s, amp * kn * std::cos(kn * x), -amp * kn * kn * s, C(0),
            hbar * hbar * kn * kn / (Real(2) * mass)};
  }
  if (const auto* step = spec.get_if<PotentialStep>()) {
    const Real k = Real(step->k);
    const Real r = Real(step->r);
    const C fwd = std::exp(i * k * x);
    const C back = r * std::exp(-i * k * x);
    return {fwd + back, i * k * (fwd - back), -k * k * (fwd + back), C(0),
            hbar * hbar * k * k / (Real(2) * mass)};
  }
  const auto& wave = std::get<ConstantPotentialWave>(spec.variant());
  const Real k = Real(wave.k);
  const C e = std::exp(i * k * x);
  return {e, i * k * e, -k * k * e, C(Real(wave.v0)),
          hbar * hbar * k * k / (Real(2) * mass) + Real(wave.v0)};
}

inline WavefunctionSample<double> eval(const StateSpec& spec, Complex x) {
  return eval<double>(spec, x);
}

}  // namespace cqt
