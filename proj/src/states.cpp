#include "cqt/states.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "cqt/error.hpp"
#include "cqt/format.hpp"

namespace cqt {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::UnsupportedState: return "UnsupportedState";
    case ErrorKind::NodeProximity: return "NodeProximity";
    case ErrorKind::StationaryPoint: return "StationaryPoint";
    case ErrorKind::DegeneratePoint: return "DegeneratePoint";
    case ErrorKind::StepFailure: return "StepFailure";
    case ErrorKind::HorizonExceeded: return "HorizonExceeded";
    case ErrorKind::NodeOnGrid: return "NodeOnGrid";
    case ErrorKind::MaskViolation: return "MaskViolation";
  }
  return "Error";
}

namespace {

constexpr int kMaxHermiteOrder = 40;

void check_units(const UnitSystem& u, std::vector<std::string>& problems) {
  if (!(u.hbar > 0) || !std::isfinite(u.hbar)) problems.push_back("hbar must be positive and finite");
  if (!(u.mass > 0) || !std::isfinite(u.mass)) problems.push_back("mass must be positive and finite");
}

[[noreturn]] void fail(const std::vector<std::string>& problems) {
  std::string msg;
  for (const auto& p : problems) {
    if (!msg.empty()) msg += "; ";
    msg += p;
  }
  throw Error(ErrorKind::ValidationError, msg);
}

/// Eigenvalues of the symmetric tridiagonal matrix with zero diagonal and
/// the given off-diagonal entries, sorted ascending.
std::vector<double> tridiagonal_roots(const std::vector<double>& offdiag) {
  const auto m = static_cast<Eigen::Index>(offdiag.size() + 1);
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index k = 0; k + 1 < m; ++k) {
    jacobi(k, k + 1) = offdiag[static_cast<size_t>(k)];
    jacobi(k + 1, k) = offdiag[static_cast<size_t>(k)];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

}  // namespace

StateSpec::StateSpec(StateVariant v, UnitSystem u) : variant_(std::move(v)), units_(u) {
  const auto* ho = std::get_if<HarmonicOscillator>(&variant_);
  if (ho == nullptr) return;
  const int n = ho->n;

  // Zeros of p_n: Golub-Welsch matrix with off-diagonals √(k/2).
  if (n > 0) {
    std::vector<double> off;
    for (int k = 1; k < n; ++k) off.push_back(std::sqrt(k / 2.0));
    hermite_roots_ = tridiagonal_roots(off);
  }
  // Zeros of q = p_n' - y p_n: same recurrence with the last coefficient
  // replaced, since y p_n - n p_{n-1} = -q.
  std::vector<double> off;
  for (int k = 1; k < n; ++k) off.push_back(std::sqrt(k / 2.0));
  if (n > 0) off.push_back(std::sqrt(static_cast<double>(n)));
  stationary_roots_ = tridiagonal_roots(off);

  auto q_and_dq = [n](double y) {
    const auto h = detail::monic_hermite<double>(n, Complex(y, 0));
    const double p = h.p.real(), dp = h.dp.real(), d2p = h.d2p.real();
    return std::pair{dp - y * p, d2p - p - y * dp};
  };
  for (double& y : stationary_roots_) {
    for (int it = 0; it < 3; ++it) {
      const auto [q, dq] = q_and_dq(y);
      if (dq != 0) y -= q / dq;
    }
  }
  for (double& y : hermite_roots_) {
    for (int it = 0; it < 3; ++it) {
      const auto h = detail::monic_hermite<double>(n, Complex(y, 0));
      if (h.dp.real() != 0) y -= h.p.real() / h.dp.real();
    }
  }
  for (double y : stationary_roots_) {
    const auto h = detail::monic_hermite<double>(n, Complex(y, 0));
    stationary_residues_.push_back(h.p.real() / q_and_dq(y).second);
  }
}

StateSpec StateSpec::harmonic_oscillator(int n, double alpha, double omega, UnitSystem units) {
  std::vector<std::string> problems;
  check_units(units, problems);
  if (n < 0 || n > kMaxHermiteOrder) problems.push_back("ho: n must be in [0, 40]");
  if (!(alpha > 0) || !std::isfinite(alpha)) problems.push_back("ho: alpha must be positive");
  if (!(omega > 0) || !std::isfinite(omega)) problems.push_back("ho: omega must be positive");
  if (problems.empty()) {
    const double expected = units.mass * omega / units.hbar;
    if (std::abs(alpha * alpha - expected) > 1e-9 * std::max(alpha * alpha, expected)) {
      problems.push_back("ho: alpha^2 must equal m*omega/hbar (alpha^2 = " + format_number(alpha * alpha) +
                         ", m*omega/hbar = " + format_number(expected) + ")");
    }
  }
  if (!problems.empty()) fail(problems);
  return StateSpec(HarmonicOscillator{n, alpha, omega}, units);
}

StateSpec StateSpec::square_well(int n, double width, UnitSystem units) {
  std::vector<std::string> problems;
  check_units(units, problems);
  if (n < 1) problems.push_back("well: n must be a positive integer");
  if (!(width > 0) || !std::isfinite(width)) problems.push_back("well: a must be positive");
  if (!problems.empty()) fail(problems);
  return StateSpec(InfiniteSquareWell{n, width}, units);
}

StateSpec StateSpec::step(double k, double r, UnitSystem units) {
  std::vector<std::string> problems;
  check_units(units, problems);
  if (!(k > 0) || !std::isfinite(k)) problems.push_back("step: k must be positive");
  if (!(r >= 0 && r < 1)) problems.push_back("step: r must satisfy 0 <= r < 1");
  if (!problems.empty()) fail(problems);
  return StateSpec(PotentialStep{k, r}, units);
}

StateSpec StateSpec::plane_wave(double k, double v0, UnitSystem units) {
  std::vector<std::string> problems;
  check_units(units, problems);
  if (!(k > 0) || !std::isfinite(k)) problems.push_back("wave: k must be positive");
  if (!std::isfinite(v0)) problems.push_back("wave: v0 must be finite");
  if (!problems.empty()) fail(problems);
  return StateSpec(ConstantPotentialWave{k, v0}, units);
}

std::string StateSpec::to_string() const {
  std::ostringstream os;
  std::visit(
      [&os](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, HarmonicOscillator>) {
          os << "ho:n=" << s.n << ",alpha=" << format_number(s.alpha) << ",omega=" << format_number(s.omega);
        } else if constexpr (std::is_same_v<T, InfiniteSquareWell>) {
          os << "well:n=" << s.n << ",a=" << format_number(s.width);
        } else if constexpr (std::is_same_v<T, PotentialStep>) {
          os << "step:k=" << format_number(s.k) << ",r=" << format_number(s.r);
        } else {
          os << "wave:k=" << format_number(s.k) << ",v0=" << format_number(s.v0);
        }
      },
      variant_);
  if (units_.hbar != 1.0 || units_.mass != 1.0) {
    os << " [hbar=" << format_number(units_.hbar) << ",mass=" << format_number(units_.mass) << "]";
  }
  return os.str();
}

StateSpec parse_state(std::string_view text, UnitSystem units) {
  const auto colon = text.find(':');
  const std::string_view family = text.substr(0, colon);
  std::map<std::string, std::string, std::less<>> params;
  std::vector<std::string> problems;

  if (colon != std::string_view::npos) {
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos || eq == 0) {
        problems.push_back("malformed parameter '" + std::string(item) + "'");
      } else {
        params[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
      }
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
  }

  std::map<std::string, bool, std::less<>> used;
  auto number = [&](std::string_view key, std::optional<double> fallback) -> std::optional<double> {
    auto it = params.find(key);
    if (it == params.end()) {
      if (!fallback) problems.push_back(std::string(family) + ": missing required parameter '" + std::string(key) + "'");
      return fallback;
    }
    used[std::string(key)] = true;
    if (auto v = parse_real(it->second)) return v;
    problems.push_back(std::string(family) + ": parameter '" + std::string(key) + "' is not a number: '" +
                       it->second + "'");
    return fallback;
  };
  auto integer = [&](std::string_view key, int fallback) -> int {
    auto v = number(key, double(fallback));
    if (!v) return fallback;
    if (*v != std::floor(*v)) {
      problems.push_back(std::string(family) + ": parameter '" + std::string(key) + "' must be an integer");
      return fallback;
    }
    return static_cast<int>(*v);
  };
  auto finish = [&]() {
    for (const auto& [key, value] : params) {
      if (!used.count(key)) problems.push_back(std::string(family) + ": unknown parameter '" + key + "'");
    }
  };
  // Factory checks run even when parsing already failed, so one error lists
  // every problem.
  auto build = [&](auto make) -> StateSpec {
    finish();
    try {
      StateSpec spec = make();
      if (problems.empty()) return spec;
    } catch (const Error& e) {
      problems.push_back(e.what());
    }
    fail(problems);
  };

  if (family == "ho") {
    const int n = integer("n", 0);
    const bool has_alpha = params.count("alpha") > 0;
    const bool has_omega = params.count("omega") > 0;
    double alpha = number("alpha", 1.0).value_or(1.0);
    double omega = number("omega", 1.0).value_or(1.0);
    if (has_alpha && !has_omega) omega = units.hbar * alpha * alpha / units.mass;
    if (!has_alpha && has_omega && omega > 0) alpha = std::sqrt(units.mass * omega / units.hbar);
    if (!has_alpha && !has_omega) alpha = std::sqrt(units.mass * omega / units.hbar);
    return build([&] { return StateSpec::harmonic_oscillator(n, alpha, omega, units); });
  }
  if (family == "well") {
    const int n = integer("n", 1);
    const double a = number("a", std::nullopt).value_or(1.0);
    return build([&] { return StateSpec::square_well(n, a, units); });
  }
  if (family == "step") {
    const double k = number("k", 1.0).value_or(1.0);
    const double r = number("r", std::sqrt(0.5)).value_or(0.0);
    return build([&] { return StateSpec::step(k, r, units); });
  }
  if (family == "wave") {
    const double k = number("k", 1.0).value_or(1.0);
    const double v0 = number("v0", 0.0).value_or(0.0);
    return build([&] { return StateSpec::plane_wave(k, v0, units); });
  }
  problems.insert(problems.begin(), "unknown state family '" + std::string(family) + "' (expected ho, well, step, wave)");
  fail(problems);
}

double energy(const StateSpec& spec) {
  return eval<double>(spec, Complex(0, 0)).energy;
}

std::vector<Complex> nodes(const StateSpec& spec, const Window& window) {
  std::vector<Complex> out;
  if (const auto* ho = spec.get_if<HarmonicOscillator>()) {
    for (double y : spec.hermite_roots()) {
      const Complex z(y / ho->alpha, 0);
      if (window.contains(z)) out.push_back(z);
    }
  } else if (const auto* well = spec.get_if<InfiniteSquareWell>()) {
    if (window.im_min <= 0 && window.im_max >= 0) {
      const double spacing = well->width / well->n;
      const auto j0 = static_cast<long long>(std::ceil(window.re_min / spacing - 1e-12));
      const auto j1 = static_cast<long long>(std::floor(window.re_max / spacing + 1e-12));
      for (long long j = j0; j <= j1; ++j) out.emplace_back(j * spacing, 0.0);
    }
  } else if (const auto* step = spec.get_if<PotentialStep>()) {
    if (step->r > 0) {
      const double im = -std::log(step->r) / (2 * step->k);
      if (im >= window.im_min && im <= window.im_max) {
        const double spacing = std::numbers::pi / step->k;
        const double offset = spacing / 2;
        const auto j0 = static_cast<long long>(std::ceil((window.re_min - offset) / spacing - 1e-12));
        const auto j1 = static_cast<long long>(std::floor((window.re_max - offset) / spacing + 1e-12));
        for (long long j = j0; j <= j1; ++j) out.emplace_back(offset + j * spacing, im);
      }
    }
  }
  std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return out;
}

double node_distance(const StateSpec& spec, Complex z) {
  double best = std::numeric_limits<double>::infinity();
  if (const auto* ho = spec.get_if<HarmonicOscillator>()) {
    for (double y : spec.hermite_roots()) best = std::min(best, std::abs(z - Complex(y / ho->alpha, 0)));
  } else if (const auto* well = spec.get_if<InfiniteSquareWell>()) {
    const double spacing = well->width / well->n;
    const double j = std::round(z.real() / spacing);
    best = std::abs(z - Complex(j * spacing, 0));
  } else if (const auto* step = spec.get_if<PotentialStep>()) {
    if (step->r > 0) {
      const double spacing = std::numbers::pi / step->k;
      const double offset = spacing / 2;
      const double j = std::round((z.real() - offset) / spacing);
      best = std::abs(z - Complex(offset + j * spacing, -std::log(step->r) / (2 * step->k)));
    }
  }
  return best;
}

double length_scale(const StateSpec& spec) {
  if (const auto* ho = spec.get_if<HarmonicOscillator>()) return 1.0 / ho->alpha;
  if (const auto* well = spec.get_if<InfiniteSquareWell>()) return well->width / (well->n * std::numbers::pi);
  if (const auto* step = spec.get_if<PotentialStep>()) return 1.0 / step->k;
  return 1.0 / std::get<ConstantPotentialWave>(spec.variant()).k;
}

double time_scale(const StateSpec& spec) {
  if (const auto* ho = spec.get_if<HarmonicOscillator>()) return 2 * std::numbers::pi / ho->omega;
  const double kinetic = energy(spec) - eval(spec, Complex(0, 0)).potential.real();
  return 2 * std::numbers::pi * spec.units().hbar / kinetic;
}

bool is_real_bound_state(const StateSpec& spec) {
  return spec.get_if<HarmonicOscillator>() != nullptr || spec.get_if<InfiniteSquareWell>() != nullptr;
}

}  // namespace cqt
