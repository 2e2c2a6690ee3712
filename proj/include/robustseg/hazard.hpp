#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "robustseg/cdf.hpp"
#include "robustseg/profile.hpp"
#include "robustseg/segmentation.hpp"

namespace robustseg {

/// One linear piece of U* on [lo, hi] inside the support of the strategy.
/// U*(y) = intercept + slope * y there, so the density is
/// -weighting * slope / (intercept + slope * y).
struct HazardPiece {
  double lo, hi;
  double intercept, slope;
  double cdf_lo;  ///< G(lo)
};

/// The designer's mixed strategy over guessed seller values.
struct HazardStrategy {
  SurplusProfile profile;
  double lambda = 0.5;
  double weighting = 1.0;  ///< lambda / (1 - lambda)
  double delta = 0.0;      ///< U*(delta) = U*(0) exp(-1/weighting)
  std::optional<double> tau;
  double upper = 0.0;  ///< min(delta, tau)
  double atom = 0.0;   ///< mass at tau when tau < delta
  std::vector<HazardPiece> pieces;

  bool truncated() const { return atom > 0.0; }
  double s_star() const { return profile.s_star(); }

  double density(double y) const {
    if (y < s_star() || y >= upper) return 0.0;
    return -weighting * profile.derivative(y) / profile(y);
  }

  /// G(y) = weighting * ln(U*(0)/U*(y)) on [s*, upper), 1 from upper on.
  double cdf(double y) const {
    if (y < s_star()) return 0.0;
    if (y >= upper) return 1.0;
    return weighting * std::log(profile.initial_value() / profile(y));
  }

  /// Integral of the density alone (excludes the atom).
  double continuous_mass() const {
    if (upper <= s_star()) return 0.0;
    return weighting * std::log(profile.initial_value() / profile(upper));
  }
};

namespace detail {

inline void check_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw ValidationError("lambda must lie in (0,1)");
}

}  // namespace detail

inline HazardStrategy hazard_strategy(const SurplusProfile& profile, double lambda = 0.5,
                                      std::optional<double> tau = std::nullopt) {
  detail::check_lambda(lambda);
  HazardStrategy h;
  h.profile = profile;
  h.lambda = lambda;
  h.weighting = lambda / (1.0 - lambda);
  const double u0 = profile.initial_value();
  h.delta = profile_inverse(profile, u0 * std::exp(-1.0 / h.weighting));
  h.upper = h.delta;
  if (tau) {
    if (!(*tau > profile.s_star()) || *tau > profile.zero_point())
      throw ValidationError("tau must lie in (s*, b_{n-1}]");
    h.tau = tau;
    if (*tau < h.delta) {
      h.upper = *tau;
      h.atom = std::max(0.0, 1.0 - h.continuous_mass());
    }
  }

  const auto& xs = profile.knots();
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    const double lo = std::max(xs[k], h.s_star());
    const double hi = std::min(xs[k + 1], h.upper);
    if (!(hi > lo)) continue;
    h.pieces.push_back({lo, hi, profile.intercept(k), profile.slope(k), h.cdf(lo)});
  }
  return h;
}

/// Inverse-CDF draw: u in [0,1) maps to the guessed seller value.
inline double sample_guess(const HazardStrategy& h, double u) {
  if (h.truncated() && u >= h.continuous_mass()) return *h.tau;
  const double level = h.profile.initial_value() * std::exp(-u / h.weighting);
  return std::min(profile_inverse(h.profile, level), h.upper);
}

/// Expected buyer surplus at true seller value s when the designer draws s_D
/// from the strategy and plays the equal-revenue segmentation for s_D.
inline double robust_buyer_surplus(const HazardStrategy& h, double s) {
  if (s > h.upper) return 0.0;
  const double lower = std::max(s, h.s_star());
  double value = h.weighting * (h.profile(lower) - h.profile(h.upper));
  if (h.truncated()) value += h.atom * h.profile(*h.tau);
  return value;
}

/// lambda * U*(s) - (1 - lambda) * robust surplus.
inline double weighted_regret(const HazardStrategy& h, double s, double lambda) {
  return lambda * h.profile(std::max(s, 0.0)) - (1.0 - lambda) * robust_buyer_surplus(h, s);
}

/// U*(s) - robust surplus; twice the lambda = 1/2 weighted regret.
inline double hazard_regret(const HazardStrategy& h, double s) { return 2.0 * weighted_regret(h, s, 0.5); }

/// Supremum of the weighted regret over s in [0, domain_max]. Regret is
/// affine between profile knots and drops at `upper`, so the supremum is
/// attained at a knot or approached from the right of `upper`.
inline double worst_case_weighted_regret(const HazardStrategy& h, double lambda,
                                         std::optional<double> domain_max = std::nullopt) {
  detail::check_lambda(lambda);
  const double hi = domain_max.value_or(h.tau.value_or(h.profile.zero_point()));
  std::vector<double> cand{0.0, h.s_star(), h.upper, hi};
  for (double x : h.profile.knots()) cand.push_back(x);
  double worst = 0.0;
  for (double s : cand)
    if (s >= 0.0 && s <= hi) worst = std::max(worst, weighted_regret(h, s, lambda));
  if (h.upper < hi) worst = std::max(worst, lambda * h.profile(h.upper));
  return worst;
}

inline double worst_case_regret(const HazardStrategy& h, std::optional<double> domain_max = std::nullopt) {
  return 2.0 * worst_case_weighted_regret(h, 0.5, domain_max);
}

/// Value of the game where the seller's value is known to be at most tau.
inline double restricted_value(const SurplusProfile& profile, double tau) {
  if (!(tau > profile.s_star()) || tau > profile.zero_point()) throw ValidationError("tau must lie in (s*, b_{n-1}]");
  const double u0 = profile.initial_value();
  const double delta = profile_inverse(profile, u0 / std::exp(1.0));
  if (tau >= delta) return u0 / std::exp(1.0);
  const double ut = profile(tau);
  return ut * std::log(u0 / ut);
}

inline double generalized_value(const SurplusProfile& profile, double lambda) {
  detail::check_lambda(lambda);
  return lambda * profile.initial_value() * std::exp(-(1.0 - lambda) / lambda);
}

/// Adversary's equilibrium CDF F(y) = c / U*(y) on [s*, upper], with
/// c = U*(upper) and an atom c / U*(0) at zero. 1/F is affine on each
/// profile piece, so the table with reciprocal interpolation is exact.
inline CdfModel adversary_equilibrium_cdf(const SurplusProfile& profile, double lambda = 0.5,
                                          std::optional<double> tau = std::nullopt) {
  const auto h = hazard_strategy(profile, lambda, tau);
  const double c = profile(h.upper);
  EmpiricalTable t;
  t.interpolation = EmpiricalTable::Interpolation::reciprocal;
  const double base = c / profile.initial_value();
  t.points.push_back(0.0);
  t.cumulative.push_back(base);
  if (h.s_star() > 0.0) {
    t.points.push_back(h.s_star());
    t.cumulative.push_back(base);
  }
  for (double x : profile.knots())
    if (x > h.s_star() && x < h.upper) {
      t.points.push_back(x);
      t.cumulative.push_back(std::min(1.0, c / profile(x)));
    }
  t.points.push_back(h.upper);
  t.cumulative.push_back(1.0);
  return CdfModel(std::move(t));
}

/// CSV rows: lo,hi,intercept,slope,weighting,cdf_lo then an atom row.
inline void write_strategy_csv(std::ostream& out, const HazardStrategy& h) {
  out << "lo,hi,intercept,slope,weighting,cdf_lo\n";
  for (const auto& p : h.pieces)
    out << format_number(p.lo) << ',' << format_number(p.hi) << ',' << format_number(p.intercept) << ','
        << format_number(p.slope) << ',' << format_number(h.weighting) << ',' << format_number(p.cdf_lo) << '\n';
  out << "# atom," << format_number(h.upper) << ',' << format_number(h.atom) << '\n';
}

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t draws = 0;
};

/// Estimates regret at each s by sampling s_D, building the equal-revenue
/// segmentation for it and evaluating at s. Draws are split into fixed
/// chunks seeded by (seed, chunk index), so results do not depend on `jobs`.
inline std::vector<MonteCarloEstimate> monte_carlo_regret(const ValuationGrid<double>& grid, const HazardStrategy& h,
                                                          std::span<const double> s_values, std::size_t draws,
                                                          std::uint64_t seed, unsigned jobs = 1) {
  if (draws < 100) throw ValidationError("Monte Carlo needs at least 100 draws");
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (draws + kChunk - 1) / kChunk;
  const std::size_t m = s_values.size();
  // Per chunk and s: sum and sum of squares of the regret samples.
  std::vector<double> sums(chunks * m, 0.0), squares(chunks * m, 0.0);
  std::vector<double> targets(m);
  for (std::size_t j = 0; j < m; ++j) targets[j] = optimal_surplus(grid, std::max(s_values[j], 0.0));

  auto run_chunk = [&](std::size_t c) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(c)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::size_t count = std::min(kChunk, draws - c * kChunk);
    for (std::size_t d = 0; d < count; ++d) {
      const double s_d = sample_guess(h, unif(rng));
      const auto sigma = greedy_optimal_segmentation(grid, s_d, SegmentationStyle::equal_revenue);
      for (std::size_t j = 0; j < m; ++j) {
        const double r = targets[j] - segmentation_surplus(grid, sigma, s_values[j]);
        sums[c * m + j] += r;
        squares[c * m + j] += r * r;
      }
    }
  };

  jobs = std::max(1u, jobs);
  if (jobs == 1 || chunks == 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < chunks; c += jobs) run_chunk(c);
      });
    for (auto& t : pool) t.join();
  }

  std::vector<MonteCarloEstimate> out(m);
  for (std::size_t j = 0; j < m; ++j) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) {
      sum += sums[c * m + j];
      sq += squares[c * m + j];
    }
    const double n = static_cast<double>(draws);
    const double mean = sum / n;
    const double var = std::max(0.0, (sq / n - mean * mean) * n / (n - 1.0));
    out[j] = {mean, std::sqrt(var / n), draws};
  }
  return out;
}

inline MonteCarloEstimate monte_carlo_regret(const ValuationGrid<double>& grid, const HazardStrategy& h, double s,
                                             std::size_t draws, std::uint64_t seed, unsigned jobs = 1) {
  const double one[] = {s};
  return monte_carlo_regret(grid, h, std::span<const double>(one), draws, seed, jobs)[0];
}

}  // namespace robustseg
