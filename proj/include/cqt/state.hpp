#pragma once

#include <complex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cqt {

using Complex = std::complex<double>;

struct UnitSystem {
  double hbar = 1.0;
  double mass = 1.0;
};

struct HarmonicOscillator {
  int n = 0;
  double alpha = 1.0;
  double omega = 1.0;
};

/// Box on [0, width]; the eigenfunction is continued into the whole plane.
struct InfiniteSquareWell {
  int n = 1;
  double width = 1.0;
};

/// The V = 0 side of a step: e^{ikx} + r e^{-ikx}.
struct PotentialStep {
  double k = 1.0;
  double r = 0.0;
};

struct ConstantPotentialWave {
  double k = 1.0;
  double v0 = 0.0;
};

using StateVariant =
    std::variant<HarmonicOscillator, InfiniteSquareWell, PotentialStep, ConstantPotentialWave>;

/// An analytic stationary state. Construction validates the parameters, so
/// every live StateSpec is evaluable everywhere in the plane.
class StateSpec {
 public:
  static StateSpec harmonic_oscillator(int n, double alpha, double omega, UnitSystem units = {});
  static StateSpec square_well(int n, double width, UnitSystem units = {});
  static StateSpec step(double k, double r, UnitSystem units = {});
  static StateSpec plane_wave(double k, double v0, UnitSystem units = {});

  const StateVariant& variant() const { return variant_; }
  const UnitSystem& units() const { return units_; }

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&variant_);
  }

  /// Zeros of H_n(y) (scaled Hermite); empty unless harmonic oscillator.
  const std::vector<double>& hermite_roots() const { return hermite_roots_; }
  /// Zeros of dΨ/dx in the scaled variable y = αx; harmonic oscillator only.
  const std::vector<double>& stationary_roots() const { return stationary_roots_; }
  /// Exponents c_j of the partial-fraction form Ψ/Ψ' = Σ c_j/(α(y - y_j)).
  const std::vector<double>& stationary_residues() const { return stationary_residues_; }

  /// Canonical compact form, e.g. `ho:n=1,alpha=1,omega=1`.
  std::string to_string() const;

 private:
  StateSpec(StateVariant v, UnitSystem u);

  StateVariant variant_;
  UnitSystem units_;
  std::vector<double> hermite_roots_;
  std::vector<double> stationary_roots_;
  std::vector<double> stationary_residues_;
};

/// Parses `ho:n=1,alpha=1,omega=1`, `well:n=1,a=3.14`, `step:k=1,r=0.707`,
/// `wave:k=1,v0=0`. Throws Error(ValidationError) listing every bad key.
StateSpec parse_state(std::string_view text, UnitSystem units = {});

/// Real energy eigenvalue of the state.
double energy(const StateSpec& spec);

/// Axis-aligned rectangle in the complex plane.
struct Window {
  double re_min, re_max, im_min, im_max;

  bool contains(Complex z) const {
    return z.real() >= re_min && z.real() <= re_max && z.imag() >= im_min && z.imag() <= im_max;
  }
};

/// All zeros of Ψ inside `window`, sorted by real then imaginary part.
std::vector<Complex> nodes(const StateSpec& spec, const Window& window);

/// Distance from z to the nearest zero of Ψ (infinity when Ψ has none).
double node_distance(const StateSpec& spec, Complex z);

/// Characteristic length: 1/α, a/(nπ), or 1/k.
double length_scale(const StateSpec& spec);

/// Characteristic time 2πħ/E used to size integration horizons.
double time_scale(const StateSpec& spec);

/// True when Ψ restricted to the real axis is real up to a constant phase
/// (harmonic oscillator and square well).
bool is_real_bound_state(const StateSpec& spec);

}  // namespace cqt
