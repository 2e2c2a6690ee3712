#pragma once

// Independent closed-form oracles shared by unit and acceptance tests. They
// work from the profile's knots and the CDF table directly, not from the
// strategy's own antiderivatives.

#include <algorithm>
#include <cmath>
#include <variant>

#include "robustseg/binary.hpp"
#include "robustseg/hazard.hpp"

namespace oracle {

using robustseg::CdfModel;
using robustseg::EmpiricalTable;
using robustseg::HazardStrategy;
using robustseg::SurplusProfile;

/// Adversary plays the pure value x against the designer's density g:
/// u(x) - integral of u*g over guesses >= x, plus the atom at tau.
/// On a linear piece u*g = -weighting * slope, so each piece is a product.
inline double designer_payoff(const HazardStrategy& h, double x) {
  const auto& p = h.profile;
  const auto& xs = p.knots();
  const auto& vs = p.values();
  double covered = 0.0;
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    const double lo = std::max({xs[k], p.s_star(), x});
    const double hi = std::min(xs[k + 1], h.upper);
    if (!(hi > lo)) continue;
    const double slope = (vs[k + 1] - vs[k]) / (xs[k + 1] - xs[k]);
    covered += -h.weighting * slope * (hi - lo);
  }
  if (h.truncated() && x <= *h.tau) covered += h.atom * p(*h.tau);
  return p(x) - covered;
}

/// E_F[u] for a reciprocal-interpolated table whose intervals each sit
/// inside one linear piece of u. Integration by parts with F = 1/(A + B y).
inline double expected_profile(const SurplusProfile& u, const CdfModel& f) {
  const auto& t = std::get<EmpiricalTable>(f.model());
  double total = t.cumulative.front() * u(t.points.front());
  for (std::size_t k = 0; k + 1 < t.points.size(); ++k) {
    const double lo = t.points[k], hi = t.points[k + 1];
    const double flo = t.cumulative[k], fhi = t.cumulative[k + 1];
    const double ulo = u(lo), uhi = u(hi);
    const double slope = (uhi - ulo) / (hi - lo);
    const double rlo = 1.0 / flo, rhi = 1.0 / fhi;
    const double int_f = std::abs(rhi - rlo) < 1e-15 ? (hi - lo) / rlo : (hi - lo) * std::log(rhi / rlo) / (rhi - rlo);
    total += uhi * fhi - ulo * flo - slope * int_f;
  }
  return total;
}

/// Designer plays the pure guess y against the adversary's F:
/// E_F[u] - u(y) F(y).
inline double adversary_payoff(const SurplusProfile& u, const CdfModel& f, double expected_u, double y) {
  return expected_u - u(y) * f(y);
}

/// E[U*] for a two-type market under F_beta, from the two logarithmic
/// integrals on either side of the kink.
inline double expected_under_fbeta(const robustseg::BinaryMarket& m, double beta) {
  const double x = m.b_low() - beta;
  if (m.mu() <= 1.0 / m.b_high()) return x * m.mu() * (1.0 + std::log(m.b_low() / x));
  return m.mu() * x * (1.0 + std::log((1.0 - m.mu()) / (m.mu() * x)));
}

}  // namespace oracle
