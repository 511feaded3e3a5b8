#pragma once

// Shared fixtures for the test binaries: the state catalog and seeded
// random point generators.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "cqt/dynamics.hpp"

namespace cqt::testing {

inline const double kPi = std::numbers::pi;
inline const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

/// One representative of every family, plus a few higher levels.
inline std::vector<StateSpec> catalog() {
  return {
      StateSpec::harmonic_oscillator(0, 1, 1),
      StateSpec::harmonic_oscillator(1, 1, 1),
      StateSpec::harmonic_oscillator(2, 1, 1),
      StateSpec::harmonic_oscillator(3, 1.3, 1.69),
      StateSpec::square_well(1, kPi),
      StateSpec::square_well(2, kPi),
      StateSpec::square_well(3, 2.0),
      StateSpec::step(1, kInvSqrt2),
      StateSpec::plane_wave(1, 0),
      StateSpec::plane_wave(1.7, 0.4),
  };
}

inline std::vector<StateSpec> bound_states() {
  std::vector<StateSpec> out;
  for (auto& s : catalog()) {
    if (is_real_bound_state(s)) out.push_back(s);
  }
  return out;
}

/// Uniform points in a box a few length scales around the state's region
/// of interest, rejecting points closer than `min_node` to a node.
class PointSampler {
 public:
  PointSampler(const StateSpec& spec, std::uint64_t seed, double min_node = 0.1, double half_height = 1.5)
      : spec_(spec), rng_(seed), min_node_(min_node) {
    const double l = length_scale(spec);
    if (spec.get_if<HarmonicOscillator>()) {
      re_ = {-3 * l, 3 * l};
      im_ = {-half_height * l, half_height * l};
    } else if (const auto* well = spec.get_if<InfiniteSquareWell>()) {
      re_ = {0, well->width};
      im_ = {-half_height * l, half_height * l};
    } else {
      re_ = {0, 2 * kPi * l};
      im_ = {-half_height * l, half_height * l};
    }
  }

  Complex operator()() {
    std::uniform_real_distribution<double> ur(re_.first, re_.second), ui(im_.first, im_.second);
    for (;;) {
      const Complex x(ur(rng_), ui(rng_));
      if (node_distance(spec_, x) > min_node_ * length_scale(spec_)) return x;
    }
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  const StateSpec& spec_;
  std::mt19937_64 rng_;
  double min_node_;
  std::pair<double, double> re_, im_;
};

/// Seeds on closed, non-degenerate loops of a bound state: path constants
/// kept away from the elliptic fixed points (where relative drift is ill
/// conditioned) and from separatrices through nodes.
inline std::vector<Complex> loop_seeds(const StateSpec& spec, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Complex> out;
  const double l = length_scale(spec);
  while (static_cast<int>(out.size()) < count) {
    Complex x;
    if (const auto* ho = spec.get_if<HarmonicOscillator>()) {
      if (ho->n == 1) {
        // |α²x² - 1| = A with A in [0.3, 0.8] or [1.2, 4]: subnest or outer loop.
        const double a = u(rng) < 0.5 ? 0.3 + 0.5 * u(rng) : 1.2 + 2.8 * u(rng);
        const double t = 2 * kPi * u(rng);
        x = std::sqrt(1.0 + a * std::exp(Complex(0, t))) / ho->alpha;
        if (u(rng) < 0.5) x = -x;
      } else {
        // Outer loops enclosing every node.
        const double y_max = ho->n == 0 ? 0.0 : spec.stationary_roots().back();
        const double r = (y_max + 0.5 + 1.5 * u(rng)) * l;
        x = std::polar(r, 2 * kPi * u(rng));
      }
    } else {
      const auto* well = spec.get_if<InfiniteSquareWell>();
      // cosh(2nπx_i/a) + cos(2nπx_r/a) = A² in [0.25, 1.75], one cell.
      const double a2 = 0.25 + 1.5 * u(rng);
      const double q = 2 * kPi * well->n / well->width;
      const double xr = (well->width / well->n) * (0.5 + 0.49 * (2 * u(rng) - 1));
      const double c = a2 - std::cos(q * xr);
      if (c < 1) continue;
      x = Complex(xr, (u(rng) < 0.5 ? 1 : -1) * std::acosh(c) / q);
    }
    if (node_distance(spec, x) > 0.2 * l) out.push_back(x);
  }
  return out;
}

inline double rel_diff(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace cqt::testing
