#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "robustseg/market.hpp"

namespace robustseg {

/// Piecewise-linear, continuous, weakly decreasing representation of s -> U*(s)
/// on [0, b_{n-1}], zero beyond. Knots are exact breakpoints (no sampling).
class SurplusProfile {
 public:
  SurplusProfile() = default;

  /// Knots x_0 = 0 < ... < x_K = zero point, values y_k = U*(x_k) with y_K = 0.
  SurplusProfile(std::vector<double> knots, std::vector<double> values) : knots_(std::move(knots)), values_(std::move(values)) {
    if (knots_.size() < 2 || knots_.size() != values_.size()) throw ValidationError("profile needs matching knots and values");
    if (knots_.front() != 0.0) throw ValidationError("profile must start at s = 0");
    for (std::size_t k = 1; k < knots_.size(); ++k) {
      if (!(knots_[k] > knots_[k - 1])) throw ValidationError("profile knots must increase");
      if (values_[k] > values_[k - 1]) throw ValidationError("profile must be weakly decreasing");
    }
    if (values_.back() != 0.0) throw ValidationError("profile must vanish at its zero point");
    if (!(values_.front() > 0.0)) throw ValidationError("degenerate profile: U*(0) = 0");
    s_star_ = 0.0;
    if (values_[1] == values_[0]) s_star_ = knots_[1];
    if (!(s_star_ < knots_.back())) throw ValidationError("degenerate profile: no decreasing region");
  }

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t piece_count() const { return knots_.size() - 1; }

  /// Kink below which the profile is constant.
  double s_star() const { return s_star_; }
  double zero_point() const { return knots_.back(); }
  double initial_value() const { return values_.front(); }

  double slope(std::size_t piece) const {
    return (values_[piece + 1] - values_[piece]) / (knots_[piece + 1] - knots_[piece]);
  }
  double intercept(std::size_t piece) const { return values_[piece] - slope(piece) * knots_[piece]; }

  /// Piece containing s (right-closed at the last knot).
  std::size_t piece_of(double s) const {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), s);
    std::size_t idx = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
    return std::min(idx, piece_count() - 1);
  }

  double operator()(double s) const {
    if (s <= 0.0) return values_.front();
    if (s >= zero_point()) return 0.0;
    const std::size_t k = piece_of(s);
    const double t = (s - knots_[k]) / (knots_[k + 1] - knots_[k]);
    return values_[k] + t * (values_[k + 1] - values_[k]);
  }

  /// Right derivative (zero outside [0, zero point)).
  double derivative(double s) const {
    if (s < 0.0 || s >= zero_point()) return 0.0;
    return slope(piece_of(s));
  }

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
  double s_star_ = 0.0;
};

/// Every point in [0, b_{n-1}] where U* can kink: 0, the buyer values and all
/// pairwise crossings of the revenue lines R_i(s) = (b_i - s) * sum_{j>=i} mu_j.
/// Sorted and exact in T.
template <class T>
std::vector<T> profile_breakpoints(const ValuationGrid<T>& grid) {
  const std::size_t n = grid.size();
  const T& top = grid.zero_point();
  std::vector<T> mass(n);
  T tail(0);
  for (std::size_t i = n; i-- > 0;) {
    tail += grid.prior()[i];
    mass[i] = tail;
  }
  std::vector<T> pts{T(0), top};
  for (std::size_t j = 0; j < n; ++j)
    if (grid.value(j) > T(0) && grid.value(j) < top) pts.push_back(grid.value(j));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k) {
      T s = (grid.value(i) * mass[i] - grid.value(k) * mass[k]) / (mass[i] - mass[k]);
      if (s > T(0) && s < top) pts.push_back(std::move(s));
    }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(), [](const T& a, const T& b) { return a == b; }), pts.end());
  return pts;
}

/// Exact piecewise-linear profile of U*. Between consecutive breakpoints the
/// monopoly index is fixed, so U* is affine there; collinear pieces are merged.
template <class T>
SurplusProfile surplus_profile(const ValuationGrid<T>& grid) {
  const auto pts = profile_breakpoints(grid);
  std::vector<T> vals;
  vals.reserve(pts.size());
  for (const auto& s : pts) vals.push_back(optimal_surplus(grid, s));

  std::vector<std::size_t> keep{0};
  for (std::size_t k = 1; k + 1 < pts.size(); ++k) {
    const std::size_t a = keep.back();
    const T left = (vals[k] - vals[a]) * (pts[k + 1] - pts[k]);
    const T right = (vals[k + 1] - vals[k]) * (pts[k] - pts[a]);
    // Same slope <=> cross-multiplied differences agree.
    bool collinear;
    if constexpr (is_exact_v<T>) {
      collinear = left == right;
    } else {
      collinear = std::abs(left - right) <= 1e-12 * std::max({std::abs(left), std::abs(right), 1e-300}) ||
                  (left == 0.0 && right == 0.0);
    }
    if (!collinear) keep.push_back(k);
  }
  keep.push_back(pts.size() - 1);

  std::vector<double> xs, ys;
  for (auto k : keep) {
    xs.push_back(to_double(pts[k]));
    ys.push_back(to_double(vals[k]));
  }
  // Rounding must neither break weak monotonicity nor tilt a flat piece.
  const double flat_tol = is_exact_v<T> ? 0.0 : 1e-13 * ys.front();
  for (std::size_t k = 1; k < ys.size(); ++k)
    if (ys[k] >= ys[k - 1] - flat_tol) ys[k] = ys[k - 1];
  ys.back() = 0.0;
  return SurplusProfile(std::move(xs), std::move(ys));
}

/// Leftmost s in [s*, zero point] with U*(s) = level. Unique wherever the
/// profile is strictly decreasing; interior flat pieces resolve to their left end.
inline double profile_inverse(const SurplusProfile& profile, double level) {
  const double top = profile.initial_value();
  if (!(level > 0.0) || level > top * (1.0 + 1e-15)) throw ValidationError("level outside (0, U*(0)]");
  if (level >= top) return profile.s_star();
  const auto& xs = profile.knots();
  const auto& ys = profile.values();
  for (std::size_t k = 1; k < xs.size(); ++k) {
    if (ys[k] <= level) {
      if (ys[k] == level) {
        // Walk back over a flat run ending at this knot.
        std::size_t j = k;
        while (j > 0 && ys[j - 1] == level) --j;
        return xs[j];
      }
      const double t = (ys[k - 1] - level) / (ys[k - 1] - ys[k]);
      return xs[k - 1] + t * (xs[k] - xs[k - 1]);
    }
  }
  return profile.zero_point();
}

}  // namespace robustseg
