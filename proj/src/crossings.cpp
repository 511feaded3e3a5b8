#include <algorithm>
#include <cmath>

#include "cqt/born.hpp"
#include "cqt/dynamics.hpp"
#include "cqt/extended.hpp"

namespace cqt {

CrossingSet find_real_crossings(const StateSpec& spec, Complex x0, const IntegratorSettings& settings) {
  SweepOptions opt;
  opt.t_end = loop_horizon(spec);
  opt.stop_at_closure = true;
  opt.find_crossings = true;
  const SweepResult r = sweep(spec, x0, 0.0, opt, settings);

  CrossingSet out;
  out.closed = r.period.has_value();
  out.catalog_h = has_catalog_h(spec);
  for (const auto& c : r.crossings) {
    const double x_r0 = c.x.real();
    const double p = born_direct(spec, x_r0);
    // Without a catalogued h, exp(ln w) along the loop is itself a solution
    // of the conservation equation and plays the role of h.
    const double f = out.catalog_h ? p / h_solution(spec, Complex(x_r0, 0)) : p * std::exp(-c.log_weight);
    out.crossings.push_back({c.t, x_r0, p, c.direction, f});
  }
  if (out.crossings.empty()) {
    out.verdict = Verdict::Unreached;
    return out;
  }
  double lo = out.crossings.front().f_candidate, hi = lo;
  for (const auto& c : out.crossings) {
    lo = std::min(lo, c.f_candidate);
    hi = std::max(hi, c.f_candidate);
  }
  if (hi - lo <= kBoundaryAgreement * std::max(std::abs(hi), 1e-300)) {
    out.verdict = Verdict::Defined;
    out.f = out.crossings.front().f_candidate;
  } else {
    out.verdict = Verdict::Overdetermined;
  }
  return out;
}

}  // namespace cqt
