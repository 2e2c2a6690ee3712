#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "robustseg/number.hpp"

namespace robustseg {

/// Buyer values b_1 < ... < b_n (all positive) with an interior prior.
template <class T>
class ValuationGrid {
 public:
  ValuationGrid(std::vector<T> values, std::vector<T> prior) : values_(std::move(values)), prior_(std::move(prior)) {
    if (values_.size() < 2) throw ValidationError("grid needs at least two buyer values");
    if (values_.size() != prior_.size()) throw ValidationError("values and prior differ in length");
    if (!(values_.front() > T(0))) throw ValidationError("buyer values must be positive");
    for (std::size_t i = 1; i < values_.size(); ++i)
      if (!(values_[i] > values_[i - 1])) throw ValidationError("buyer values must be strictly increasing");
    T total(0);
    for (const auto& p : prior_) {
      if (!(p > T(0))) throw ValidationError("prior must be interior (all entries > 0)");
      total += p;
    }
    if (std::abs(to_double(total) - 1.0) > 1e-12) throw ValidationError("prior must sum to 1");
    if constexpr (is_exact_v<T>) {
      if (total != T(1)) throw ValidationError("prior must sum to exactly 1");
    }
  }

  std::size_t size() const { return values_.size(); }
  const std::vector<T>& values() const { return values_; }
  const std::vector<T>& prior() const { return prior_; }
  const T& value(std::size_t i) const { return values_[i]; }
  /// b_{n-1}: U* vanishes from here on.
  const T& zero_point() const { return values_[values_.size() - 2]; }

 private:
  std::vector<T> values_;
  std::vector<T> prior_;
};

/// Distribution over the grid's values; zeros allowed.
template <class T>
class Posterior {
 public:
  Posterior() = default;
  explicit Posterior(std::vector<T> probs) : probs_(std::move(probs)) {
    T total(0);
    for (const auto& p : probs_) {
      if (p < T(0)) throw ValidationError("posterior entries must be nonnegative");
      total += p;
    }
    if (probs_.empty() || std::abs(to_double(total) - 1.0) > 1e-12)
      throw ValidationError("posterior must sum to 1");
  }

  std::size_t size() const { return probs_.size(); }
  const std::vector<T>& probs() const { return probs_; }
  const T& operator[](std::size_t i) const { return probs_[i]; }

 private:
  std::vector<T> probs_;
};

template <class T>
struct Segment {
  T weight;
  Posterior<T> posterior;
};

/// Bayes-plausible weighted collection of posteriors.
template <class T>
class Segmentation {
 public:
  Segmentation() = default;
  Segmentation(const ValuationGrid<T>& grid, std::vector<Segment<T>> segments) : segments_(std::move(segments)) {
    if (segments_.empty()) throw ValidationError("segmentation has no segments");
    T total(0);
    std::vector<T> mean(grid.size(), T(0));
    for (const auto& seg : segments_) {
      if (!(seg.weight > T(0))) throw ValidationError("segment weights must be positive");
      if (seg.posterior.size() != grid.size()) throw ValidationError("segment dimension mismatch");
      total += seg.weight;
      for (std::size_t i = 0; i < grid.size(); ++i) mean[i] += seg.weight * seg.posterior[i];
    }
    if (std::abs(to_double(total) - 1.0) > 1e-9) throw ValidationError("segment weights must sum to 1");
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (std::abs(to_double(mean[i]) - to_double(grid.prior()[i])) > 1e-9)
        throw ValidationError("segmentation is not Bayes plausible");
  }

  std::size_t size() const { return segments_.size(); }
  const std::vector<Segment<T>>& segments() const { return segments_; }
  auto begin() const { return segments_.begin(); }
  auto end() const { return segments_.end(); }

 private:
  std::vector<Segment<T>> segments_;
};

namespace detail {

template <class T>
void check_dimension(const ValuationGrid<T>& grid, std::span<const T> probs) {
  if (probs.size() != grid.size()) throw ValidationError("posterior dimension does not match grid");
}

}  // namespace detail

/// Seller revenue net of its own value when posting b_i: (b_i - s) * sum_{j>=i} p_j.
template <class T>
T price_revenue(const ValuationGrid<T>& grid, std::span<const T> probs, std::size_t i, const T& s) {
  T tail(0);
  for (std::size_t j = i; j < probs.size(); ++j) tail += probs[j];
  return (grid.value(i) - s) * tail;
}

/// Index of the seller's posted price: the smallest index maximizing
/// (b_i - s) * sum_{j>=i} p_j.
template <class T>
std::size_t optimal_price(const ValuationGrid<T>& grid, std::span<const T> probs, const T& s) {
  detail::check_dimension(grid, probs);
  const std::size_t n = grid.size();
  // Two downward passes with running tail sums: find the best revenue, then
  // the lowest index that ties with it.
  T tail(0);
  T best_rev{};
  for (std::size_t k = n; k-- > 0;) {
    tail += probs[k];
    T rev = (grid.value(k) - s) * tail;
    if (k == n - 1 || rev > best_rev) best_rev = std::move(rev);
  }
  std::size_t best = n - 1;
  tail = T(0);
  for (std::size_t k = n; k-- > 0;) {
    tail += probs[k];
    if (!strictly_greater(best_rev, (grid.value(k) - s) * tail)) best = k;
  }
  return best;
}

template <class T>
std::size_t optimal_price(const ValuationGrid<T>& grid, const Posterior<T>& p, const T& s) {
  return optimal_price(grid, std::span<const T>(p.probs()), s);
}

/// Buyer surplus sum_j p_j * max(b_j - b_pi, 0) at the seller's best response.
template <class T>
T buyer_surplus(const ValuationGrid<T>& grid, std::span<const T> probs, const T& s) {
  const std::size_t pi = optimal_price(grid, probs, s);
  T total(0);
  for (std::size_t j = pi + 1; j < grid.size(); ++j) total += probs[j] * (grid.value(j) - grid.value(pi));
  return total;
}

template <class T>
T buyer_surplus(const ValuationGrid<T>& grid, const Posterior<T>& p, const T& s) {
  return buyer_surplus(grid, std::span<const T>(p.probs()), s);
}

/// Seller's net revenue at its optimal price, clamped at zero (only a seller
/// value above the whole support can make every price lose money).
template <class T>
T seller_revenue(const ValuationGrid<T>& grid, std::span<const T> probs, const T& s) {
  const std::size_t pi = optimal_price(grid, probs, s);
  return clamp_nonnegative(price_revenue(grid, probs, pi, s));
}

template <class T>
T seller_revenue(const ValuationGrid<T>& grid, const Posterior<T>& p, const T& s) {
  return seller_revenue(grid, std::span<const T>(p.probs()), s);
}

template <class T>
T segmentation_surplus(const ValuationGrid<T>& grid, const Segmentation<T>& sigma, const T& s) {
  T total(0);
  for (const auto& seg : sigma) total += seg.weight * buyer_surplus(grid, seg.posterior, s);
  return total;
}

template <class T>
T segmentation_revenue(const ValuationGrid<T>& grid, const Segmentation<T>& sigma, const T& s) {
  T total(0);
  for (const auto& seg : sigma) total += seg.weight * seller_revenue(grid, seg.posterior, s);
  return total;
}

/// Total gains from trade sum_j mu_j * max(b_j - s, 0).
template <class T>
T welfare(const ValuationGrid<T>& grid, const T& s) {
  T total(0);
  for (std::size_t j = 0; j < grid.size(); ++j)
    if (grid.value(j) > s) total += grid.prior()[j] * (grid.value(j) - s);
  return total;
}

/// Uninformed seller's revenue at the monopoly price b_{i*}.
template <class T>
T monopoly_revenue(const ValuationGrid<T>& grid, const T& s) {
  return seller_revenue(grid, std::span<const T>(grid.prior()), s);
}

template <class T>
std::size_t monopoly_price(const ValuationGrid<T>& grid, const T& s) {
  return optimal_price(grid, std::span<const T>(grid.prior()), s);
}

/// Buyer-optimal surplus when the seller's value s is known: welfare minus
/// monopoly revenue, identically zero from b_{n-1} on.
template <class T>
T optimal_surplus(const ValuationGrid<T>& grid, const T& s) {
  if (s < T(0)) throw ValidationError("seller value must be nonnegative");
  if (!(s < grid.zero_point())) return T(0);
  const std::size_t istar = monopoly_price(grid, s);
  return clamp_nonnegative(welfare(grid, s) - price_revenue(grid, std::span<const T>(grid.prior()), istar, s));
}

}  // namespace robustseg
