#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "robustseg/market.hpp"

namespace robustseg {

/// Posterior on which every supported price earns the seller the same net
/// revenue (relative to seller value s_D).
template <class T>
struct EqualRevenueSegment {
  std::vector<std::size_t> support;  ///< increasing grid indices, values > s_D
  Posterior<T> posterior;
  T revenue;  ///< per unit mass: min support value - s_D
};

/// Equal-revenue distribution on `support` w.r.t. s_D. With shifted values
/// v_k = b_k - s_D the mass is v_1 (1/v_k - 1/v_{k+1}) below the top and
/// v_1 / v_m at the top, so every tail satisfies v_k * tail_k = v_1.
template <class T>
EqualRevenueSegment<T> equal_revenue_segment(const ValuationGrid<T>& grid, std::vector<std::size_t> support, const T& s_d) {
  if (support.empty()) throw ValidationError("equal-revenue support is empty");
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  if (support.back() >= grid.size()) throw ValidationError("support index out of range");
  for (auto i : support)
    if (!(grid.value(i) > s_d)) throw ValidationError("equal-revenue support must lie above the seller value");

  std::vector<T> probs(grid.size(), T(0));
  const T v1 = grid.value(support.front()) - s_d;
  const std::size_t m = support.size();
  for (std::size_t k = 0; k + 1 < m; ++k) {
    const T vk = grid.value(support[k]) - s_d;
    const T vnext = grid.value(support[k + 1]) - s_d;
    probs[support[k]] = v1 * (T(1) / vk - T(1) / vnext);
  }
  probs[support.back()] = v1 / (grid.value(support.back()) - s_d);
  if constexpr (!is_exact_v<T>) {
    // Absorb rounding so the posterior sums to one.
    T total(0);
    for (const auto& p : probs) total += p;
    for (auto& p : probs) p /= total;
  }
  return {std::move(support), Posterior<T>(std::move(probs)), v1};
}

/// How the segmentation for a known seller value is assembled.
enum class SegmentationStyle {
  /// Keep the prior as the only segment when the monopoly price is already
  /// the lowest value above s_D (no segmentation needed).
  minimal,
  /// Always split into equal-revenue segments. With this style the
  /// segmentation earns U*(s_D) for s <= s_D and nothing for s > s_D.
  equal_revenue,
};

struct OptimalityReport {
  bool plausible = false;
  bool equal_revenue = false;
  bool surplus_optimal = false;
  bool revenue_monopoly = false;
  double plausibility_residual = 0.0;  ///< max |sum w p - mu| per coordinate
  double equal_revenue_residual = 0.0;  ///< worst revenue spread within a segment
  double surplus_residual = 0.0;        ///< |U(sigma, s_D) - U*(s_D)|
  double revenue_residual = 0.0;        ///< |revenue - monopoly revenue|

  /// Plausible and buyer-optimal with monopoly revenue for the seller.
  bool optimal() const { return plausible && surplus_optimal && revenue_monopoly; }
  bool all_pass() const { return optimal() && equal_revenue; }
};

/// Checks a candidate segmentation for a known seller value. Never throws on
/// a failing check; residuals are reported instead.
template <class T>
OptimalityReport verify_optimal(const ValuationGrid<T>& grid, const std::vector<Segment<T>>& segments, const T& s_d,
                                double tolerance = 1e-9) {
  OptimalityReport r;
  const std::size_t n = grid.size();
  std::vector<T> mean(n, T(0));
  T wsum(0);
  for (const auto& seg : segments) {
    wsum += seg.weight;
    for (std::size_t i = 0; i < n && i < seg.posterior.size(); ++i) mean[i] += seg.weight * seg.posterior[i];
  }
  r.plausibility_residual = std::abs(to_double(wsum) - 1.0);
  for (std::size_t i = 0; i < n; ++i)
    r.plausibility_residual = std::max(r.plausibility_residual, std::abs(to_double(mean[i] - grid.prior()[i])));
  bool dims_ok = std::all_of(segments.begin(), segments.end(), [&](const auto& s) { return s.posterior.size() == n; });
  r.plausible = dims_ok && r.plausibility_residual <= tolerance;
  if (!dims_ok) return r;

  // Spread of (b_i - s_D) * tail_i over the support above s_D, relative to its size.
  r.equal_revenue_residual = 0.0;
  for (const auto& seg : segments) {
    std::vector<double> revs;
    T tail(0);
    for (std::size_t i = n; i-- > 0;) {
      tail += seg.posterior[i];
      if (seg.posterior[i] > T(0) && grid.value(i) > s_d) revs.push_back(to_double((grid.value(i) - s_d) * tail));
    }
    if (revs.size() > 1) {
      auto [lo, hi] = std::minmax_element(revs.begin(), revs.end());
      r.equal_revenue_residual = std::max(r.equal_revenue_residual, *hi - *lo);
    }
  }
  r.equal_revenue = r.equal_revenue_residual <= tolerance;

  T surplus(0), revenue(0);
  for (const auto& seg : segments) {
    surplus += seg.weight * buyer_surplus(grid, seg.posterior, s_d);
    revenue += seg.weight * seller_revenue(grid, seg.posterior, s_d);
  }
  r.surplus_residual = std::abs(to_double(surplus - optimal_surplus(grid, clamp_nonnegative(s_d))));
  r.revenue_residual = std::abs(to_double(revenue - monopoly_revenue(grid, s_d)));
  r.surplus_optimal = r.surplus_residual <= tolerance;
  r.revenue_monopoly = r.revenue_residual <= tolerance;
  return r;
}

template <class T>
OptimalityReport verify_optimal(const ValuationGrid<T>& grid, const Segmentation<T>& sigma, const T& s_d,
                                double tolerance = 1e-9) {
  return verify_optimal(grid, sigma.segments(), s_d, tolerance);
}

/// Buyer-optimal segmentation for a known seller value s_D, built greedily
/// from equal-revenue segments. Mass on values <= s_D is revealed as point
/// masses. Throws CheckFailure if the result fails verification.
template <class T>
Segmentation<T> greedy_optimal_segmentation(const ValuationGrid<T>& grid, const T& s_d,
                                            SegmentationStyle style = SegmentationStyle::minimal) {
  if (s_d < T(0)) throw ValidationError("seller value must be nonnegative");
  const std::size_t n = grid.size();
  std::vector<Segment<T>> segments;
  auto point_mass = [n](std::size_t i) {
    std::vector<T> probs(n, T(0));
    probs[i] = T(1);
    return Posterior<T>(std::move(probs));
  };

  std::vector<T> residual = grid.prior();
  for (std::size_t i = 0; i < n; ++i)
    if (!(grid.value(i) > s_d)) {
      segments.push_back({residual[i], point_mass(i)});
      residual[i] = T(0);
    }

  bool first = true;
  for (std::size_t iter = 0; iter <= n; ++iter) {
    std::vector<std::size_t> support;
    T mass(0);
    for (std::size_t i = 0; i < n; ++i)
      if (residual[i] > T(0)) {
        support.push_back(i);
        mass += residual[i];
      }
    if (support.empty()) break;

    if (first && style == SegmentationStyle::minimal && support.front() == 0 && segments.empty() &&
        monopoly_price(grid, s_d) == 0) {
      // Monopoly price is b_1: the prior itself is optimal.
      segments.push_back({T(1), Posterior<T>(grid.prior())});
      break;
    }
    first = false;

    if (support.size() == 1) {
      segments.push_back({mass, point_mass(support.front())});
      break;
    }

    auto seg = equal_revenue_segment(grid, support, s_d);
    std::optional<T> alpha;
    std::size_t argmin = support.front();
    for (auto i : support) {
      T ratio = residual[i] / seg.posterior[i];
      if (!alpha || ratio < *alpha) {
        alpha = std::move(ratio);
        argmin = i;
      }
    }
    for (auto i : support) {
      residual[i] -= *alpha * seg.posterior[i];
      if constexpr (!is_exact_v<T>) {
        if (residual[i] <= 1e-13 * grid.prior()[i]) residual[i] = T(0);
      }
    }
    residual[argmin] = T(0);
    segments.push_back({*alpha, seg.posterior});
  }

  const auto report = verify_optimal(grid, segments, s_d);
  if (!report.optimal())
    throw CheckFailure("greedy segmentation failed verification (plausibility " +
                       format_number(report.plausibility_residual) + ", surplus " +
                       format_number(report.surplus_residual) + ", revenue " + format_number(report.revenue_residual) +
                       ")");
  return Segmentation<T>(grid, std::move(segments));
}

}  // namespace robustseg
