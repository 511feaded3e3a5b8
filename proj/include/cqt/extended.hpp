#pragma once

// Extended, conserved density ρ(x_r, x_i) on the complex plane: closed-form
// catalog (ρ = h·f with f fixed by the Born density at the real-axis
// crossing), the trajectory-integral construction, conservation residuals,
// and the analytic Ψ*(x*)Ψ(x) density it is contrasted with.

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "cqt/dynamics.hpp"

namespace cqt {

enum class Mask { Defined, Overdetermined, Unreached, NearNode };

/// CSV spelling: defined, overdet, unreached, nearnode.
std::string_view to_string(Mask mask);

struct MaskedValue {
  double rho;
  Mask mask;
};

struct RhoDecomposition {
  double h;
  double f;
};

/// True when a closed-form shape factor h is catalogued for the state
/// (everything except oscillator levels n ≥ 2).
bool has_catalog_h(const StateSpec& spec);

/// Shape factor h solving ∇·(h ẋ) = 0:
///   HO n=0: 1;  HO n=1: x_r² + x_i²;  well: cosh(2nπx_i/a) - cos(2nπx_r/a);
///   step, plane wave: (ħk/m)² |A|² / |ẋ|²  (= |Ψ|²).
/// Throws UnsupportedState for oscillator levels n ≥ 2.
double h_solution(const StateSpec& spec, Complex x);

struct BoundaryFactor {
  Verdict verdict;
  double f;
};

/// f(x_r0) = P(x_r0) / h(x_r0, 0) from an enumerated crossing set; non-Defined
/// verdicts pass through with f = 0.
BoundaryFactor boundary_f(const StateSpec& spec, const CrossingSet& crossings);

/// Mask of x from the closed-form path constant: Overdetermined inside the
/// n=1 subnest region |α²x² - 1| < 1, Unreached for well paths with
/// |A|² > 2, step paths with |A|² outside [(1-r)², (1+r)²] and off-axis plane
/// wave paths, NearNode within `node_guard` of a zero of Ψ, else Defined.
Mask classify(const StateSpec& spec, Complex x, double node_guard = kDefaultNodeGuard);

/// Closed-form ρ on the same scale as born_direct (ρ(x_r, 0) = |Ψ(x_r)|² on
/// Defined points), with its mask. Throws UnsupportedState for HO n ≥ 2.
MaskedValue closed_form_rho(const StateSpec& spec, Complex x, double node_guard = kDefaultNodeGuard);

/// h and f for a Defined point.
RhoDecomposition decompose(const StateSpec& spec, Complex x);

struct RhoSample {
  double t;
  Complex x;
  double rho;
};

struct RhoTrace {
  Verdict verdict = Verdict::Unreached;
  double x_r0 = 0;
  double p0 = 0;
  double path_constant = 0;
  std::optional<double> period;
  /// Samples over one loop (or the open horizon), starting at the crossing.
  std::vector<RhoSample> samples;
};

/// ρ along the trajectory through `seed`, started at its first real-axis
/// crossing with ρ = P(x_r0) and carried by d ln ρ/dt = -(4/ħ) Im(½mẋ² + V).
/// Empty samples unless the crossing verdict is Defined.
RhoTrace rho_via_trajectory(const StateSpec& spec, Complex seed, const IntegratorSettings& settings = {});

/// ρ at a single point by the trajectory integral: every real-axis crossing
/// on the loop through x proposes P(x_j)·exp(-ln w_j); agreement gives
/// Defined, disagreement Overdetermined, no crossing Unreached.
MaskedValue trajectory_rho(const StateSpec& spec, Complex x, const IntegratorSettings& settings = {});

using DensityFunction = std::function<MaskedValue(Complex)>;

/// Centered-difference divergence of (ρẋ_r, ρẋ_i) at x with step h_step,
/// normalized by ρ(x)·(|ẋ(x)|/ℓ + |dẋ/dx(x)|), ℓ the state length scale.
/// Throws MaskViolation unless x and its four stencil points are Defined.
double divergence_residual(const StateSpec& spec, const DensityFunction& rho_at, Complex x, double h_step);

struct PoirierSample {
  Complex rho_c;
  Complex flux_div;
};

/// ρ_c = Ψ*(x*)Ψ(x) and j' for j = -(iħ/m) Ψ*(x*)Ψ'(x); Ψ'' from the
/// Schrödinger relation.
PoirierSample poirier_density(const StateSpec& spec, Complex x);

/// Rectangular lattice; row-major with x_i outer.
struct Lattice {
  double re_min = -3, re_max = 3;
  int re_count = 201;
  double im_min = -3, im_max = 3;
  int im_count = 201;

  Complex point(int i_re, int i_im) const;
  void validate() const;
};

struct ProbabilityField {
  Lattice lattice;
  /// Normalized formula values, im_count × re_count.
  Eigen::ArrayXXd rho;
  /// Mask per lattice point, same row-major order as the CSV.
  std::vector<Mask> mask;

  Mask mask_at(int i_re, int i_im) const { return mask[static_cast<size_t>(i_im * lattice.re_count + i_re)]; }
  /// Value as exported in the masked view: zero on Unreached points.
  double masked_rho(int i_re, int i_im) const {
    return mask_at(i_re, i_im) == Mask::Unreached ? 0.0 : rho(i_im, i_re);
  }
};

/// Closed-form field divided by born_norm, so its real-axis restriction is
/// the normalized Born density. Rows are evaluated concurrently.
ProbabilityField closed_form_field(const StateSpec& spec, const Lattice& lattice,
                                   double node_guard = kDefaultNodeGuard);

/// Same field built point by point with the trajectory integral.
ProbabilityField trajectory_field(const StateSpec& spec, const Lattice& lattice,
                                  const IntegratorSettings& settings = {});

}  // namespace cqt
