#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "robustseg/cdf.hpp"
#include "robustseg/market.hpp"
#include "robustseg/profile.hpp"

namespace robustseg {

/// Two buyer types b_low < b_high = b_low + 1; mu is the low type's mass.
class BinaryMarket {
 public:
  BinaryMarket(double b_low, double b_high, double mu) : b_low_(b_low), b_high_(b_high), mu_(mu) {
    if (!(b_low > 0.0) || !(b_high > b_low)) throw ValidationError("binary market needs 0 < b_1 < b_2");
    if (std::abs(b_high - b_low - 1.0) > 1e-12) throw ValidationError("binary market must satisfy b_2 - b_1 = 1");
    if (!(mu > 0.0 && mu < 1.0)) throw ValidationError("mu must lie in (0,1)");
  }

  double b_low() const { return b_low_; }
  double b_high() const { return b_high_; }
  double mu() const { return mu_; }

  /// b_2 - 1/mu: below this seller value the low price is the monopoly price.
  double kink() const { return b_high_ - 1.0 / mu_; }

  ValuationGrid<double> grid() const { return ValuationGrid<double>({b_low_, b_high_}, {mu_, 1.0 - mu_}); }

 private:
  double b_low_, b_high_, mu_;
};

/// A market with arbitrary gap rescaled to unit gap. Seller values and
/// surplus scale linearly: divide inputs by `gap`, multiply outputs by it.
struct NormalizedBinary {
  BinaryMarket market;
  double gap;

  double to_unit(double x) const { return x / gap; }
  double from_unit(double x) const { return x * gap; }
};

inline NormalizedBinary normalize_binary(double b_low, double b_high, double mu) {
  if (!(b_high > b_low)) throw ValidationError("binary market needs b_1 < b_2");
  const double gap = b_high - b_low;
  return {BinaryMarket(b_low / gap, b_low / gap + 1.0, mu), gap};
}

inline double binary_optimal_surplus(const BinaryMarket& m, double s) {
  if (s < 0.0) throw ValidationError("seller value must be nonnegative");
  if (s < m.kink()) return 1.0 - m.mu();
  if (s <= m.b_low()) return (m.b_low() - s) * m.mu();
  return 0.0;
}

inline SurplusProfile binary_profile(const BinaryMarket& m) {
  if (m.kink() > 0.0)
    return SurplusProfile({0.0, m.kink(), m.b_low()}, {1.0 - m.mu(), 1.0 - m.mu(), 0.0});
  return SurplusProfile({0.0, m.b_low()}, {m.b_low() * m.mu(), 0.0});
}

/// Seller value at which posterior p (mass on the low type) leaves the seller
/// indifferent between the two prices.
inline double threshold(const BinaryMarket& m, double p) {
  if (!(p > 0.0) || p > 1.0) throw ValidationError("posterior must lie in (0,1]");
  return m.b_high() - 1.0 / p;
}

/// Designer's expected buyer surplus from posterior p when s ~ F.
inline double indirect_utility(const BinaryMarket& m, const CdfModel& f, double p) {
  if (p < 0.0 || p > 1.0) throw ValidationError("posterior must lie in [0,1]");
  if (p == 0.0) return 0.0;
  const double t = threshold(m, p);
  if (t < 0.0) return 0.0;
  return (1.0 - p) * f(t);
}

inline void check_beta(const BinaryMarket& m, double beta) {
  if (beta < std::max(0.0, m.kink()) || !(beta < m.b_low()))
    throw ValidationError("beta must lie in [max(0, b_2 - 1/mu), b_1)");
}

inline CdfModel f_beta(const BinaryMarket& m, double beta) {
  check_beta(m, beta);
  return CdfModel(FBeta{m.b_low(), beta});
}

/// One piece (c0 + c1 p + c2 p^2) / (d0 + d1 p) on [lo, hi].
struct RationalPiece {
  double lo, hi;
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;
  double d0 = 1.0, d1 = 0.0;

  double operator()(double p) const { return (c0 + p * (c1 + p * c2)) / (d0 + d1 * p); }
};

/// Function on [0,1] made of rational pieces. Evaluation is right-continuous
/// at breakpoints (the piece starting there wins) and uses the last piece at 1.
class PiecewiseFn {
 public:
  PiecewiseFn() = default;
  explicit PiecewiseFn(std::vector<RationalPiece> pieces) : pieces_(std::move(pieces)) {
    if (pieces_.empty()) throw ValidationError("piecewise function has no pieces");
    if (pieces_.front().lo != 0.0 || pieces_.back().hi != 1.0) throw ValidationError("pieces must cover [0,1]");
    for (std::size_t k = 0; k < pieces_.size(); ++k) {
      if (!(pieces_[k].hi > pieces_[k].lo)) throw ValidationError("empty piece");
      if (k > 0 && pieces_[k].lo != pieces_[k - 1].hi) throw ValidationError("pieces must be contiguous");
    }
  }

  const std::vector<RationalPiece>& pieces() const { return pieces_; }

  double operator()(double p) const {
    if (p < 0.0 || p > 1.0) throw ValidationError("argument outside [0,1]");
    return pieces_[index(p)](p);
  }

  double left_limit(double p) const {
    if (p <= 0.0) return (*this)(0.0);
    auto it = std::lower_bound(pieces_.begin(), pieces_.end(), p, [](const RationalPiece& r, double x) { return r.hi < x; });
    return (*it)(p);
  }

  std::vector<double> breakpoints() const {
    std::vector<double> pts{0.0};
    for (const auto& r : pieces_) pts.push_back(r.hi);
    return pts;
  }

  /// Breakpoints where left and right values differ by more than `tol`.
  std::vector<double> jumps(double tol = 1e-12) const {
    std::vector<double> out;
    for (std::size_t k = 1; k < pieces_.size(); ++k) {
      const double x = pieces_[k].lo;
      if (std::abs(pieces_[k - 1](x) - pieces_[k](x)) > tol) out.push_back(x);
    }
    return out;
  }

 private:
  std::size_t index(double p) const {
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), p, [](double x, const RationalPiece& r) { return x < r.lo; });
    return std::min(static_cast<std::size_t>(it - pieces_.begin()) - 1, pieces_.size() - 1);
  }

  std::vector<RationalPiece> pieces_;
};

/// u_beta: 0 below 1/b_2, (b_1 - beta) p up to 1/(b_2 - beta), then 1 - p.
inline PiecewiseFn u_beta_closed_form(const BinaryMarket& m, double beta) {
  check_beta(m, beta);
  const double k1 = 1.0 / m.b_high();
  const double k2 = 1.0 / (m.b_high() - beta);
  std::vector<RationalPiece> pieces;
  pieces.push_back({0.0, k1});
  pieces.push_back({k1, k2, 0.0, m.b_low() - beta});
  pieces.push_back({k2, 1.0, 1.0, -1.0});
  return PiecewiseFn(std::move(pieces));
}

inline PiecewiseFn cav_u_beta(const BinaryMarket& m, double beta) {
  check_beta(m, beta);
  const double k2 = 1.0 / (m.b_high() - beta);
  return PiecewiseFn({{0.0, k2, 0.0, m.b_low() - beta}, {k2, 1.0, 1.0, -1.0}});
}

/// E_{s ~ F_beta}[U*(s)], closed form.
inline double expected_profile_value(const BinaryMarket& m, const FBeta& f) {
  check_beta(m, f.beta);
  const double x = m.b_low() - f.beta;
  if (m.mu() <= 1.0 / m.b_high()) return x * m.mu() * (1.0 + std::log(m.b_low() / x));
  return m.mu() * x * (1.0 + std::log((1.0 - m.mu()) / (m.mu() * x)));
}

/// E_{s ~ F}[U*(s)] by integrating the profile's slope against 1 - F
/// (adaptive Gauss-Kronrod, tolerance 1e-8, split at CDF breakpoints).
inline double expected_profile_value(const SurplusProfile& profile, const CdfModel& f) {
  if (f.support_max() > 1e12 || !std::isfinite(f.support_max())) throw ValidationError("CDF support is unbounded");
  auto cuts = f.breakpoints();
  double total = profile.initial_value();
  const auto& xs = profile.knots();
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    const double slope = profile.slope(k);
    if (slope == 0.0) continue;
    std::vector<double> edges{xs[k], xs[k + 1]};
    for (double c : cuts)
      if (c > xs[k] && c < xs[k + 1]) edges.push_back(c);
    std::sort(edges.begin(), edges.end());
    double survival = 0.0;
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
      double err = 0.0;
      survival += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
          [&f](double t) { return 1.0 - f(t); }, edges[e], edges[e + 1], 15, 1e-8, &err);
    }
    total += slope * survival;
  }
  return total;
}

inline double expected_profile_value(const BinaryMarket& m, const CdfModel& f) {
  if (const auto* fb = std::get_if<FBeta>(&f.model()); fb && fb->b_low == m.b_low())
    return expected_profile_value(m, *fb);
  return expected_profile_value(binary_profile(m), f);
}

/// E_{F_beta}[U*] - cav(u_beta)(mu).
inline double regret_of_beta(const BinaryMarket& m, double beta) {
  check_beta(m, beta);
  const double x = m.b_low() - beta;
  if (m.mu() <= 1.0 / m.b_high()) return m.mu() * x * std::log(m.b_low() / x);
  return m.mu() * x * std::log((1.0 - m.mu()) / (m.mu() * x));
}

struct BestBeta {
  double beta;
  double lower_bound;
};

inline BestBeta best_beta(const BinaryMarket& m) {
  const double beta = m.mu() <= 1.0 / m.b_high() ? m.b_low() * (1.0 - 1.0 / std::exp(1.0))
                                                  : m.b_low() - (1.0 - m.mu()) / (std::exp(1.0) * m.mu());
  return {beta, regret_of_beta(m, beta)};
}

/// Upper concave envelope, linear between hull vertices.
struct Envelope {
  PiecewiseFn fn;
  std::vector<std::pair<double, double>> vertices;
  double error_bound = 0.0;  ///< 2 * spacing * Lipschitz estimate; 0 when built from samples only

  double operator()(double p) const { return fn(p); }
};

/// Upper hull of points on [0,1]; x = 0 and x = 1 must be present.
inline Envelope concavify_samples(std::vector<std::pair<double, double>> pts) {
  if (pts.empty()) throw ValidationError("concavify needs at least one point");
  std::sort(pts.begin(), pts.end());
  // Keep the largest value at each abscissa.
  std::vector<std::pair<double, double>> uniq;
  for (const auto& pt : pts) {
    if (!uniq.empty() && uniq.back().first == pt.first) uniq.back().second = std::max(uniq.back().second, pt.second);
    else uniq.push_back(pt);
  }
  if (uniq.front().first != 0.0 || uniq.back().first != 1.0) throw ValidationError("samples must include p = 0 and p = 1");
  std::vector<std::pair<double, double>> hull;
  for (const auto& pt : uniq) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull.back();
      const double cross = (b.first - a.first) * (pt.second - a.second) - (b.second - a.second) * (pt.first - a.first);
      if (cross >= 0.0) hull.pop_back();
      else break;
    }
    hull.push_back(pt);
  }
  std::vector<RationalPiece> pieces;
  for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
    const auto [x0, y0] = hull[k];
    const auto [x1, y1] = hull[k + 1];
    const double slope = (y1 - y0) / (x1 - x0);
    pieces.push_back({x0, x1, y0 - slope * x0, slope});
  }
  if (pieces.empty()) pieces.push_back({0.0, 1.0, hull.front().second});
  return {PiecewiseFn(std::move(pieces)), std::move(hull), 0.0};
}

/// Envelope of f over its breakpoints (and left limits there) plus a uniform
/// grid with `resolution` intervals.
inline Envelope concavify(const PiecewiseFn& f, std::size_t resolution) {
  if (resolution == 0) throw ValidationError("resolution must be positive");
  std::vector<std::pair<double, double>> pts;
  for (double x : f.breakpoints()) {
    pts.emplace_back(x, f(x));
    pts.emplace_back(x, f.left_limit(x));
  }
  const double h = 1.0 / static_cast<double>(resolution);
  double lipschitz = 0.0;
  double prev = f(0.0);
  for (std::size_t i = 0; i <= resolution; ++i) {
    const double x = i == resolution ? 1.0 : static_cast<double>(i) * h;
    const double y = f(x);
    pts.emplace_back(x, y);
    if (i > 0) {
      // Skip grid steps that straddle a jump.
      const double left = f.left_limit(x);
      if (std::abs(left - y) <= 1e-12) lipschitz = std::max(lipschitz, std::abs(y - prev) / h);
    }
    prev = y;
  }
  auto env = concavify_samples(std::move(pts));
  env.error_bound = 2.0 * h * lipschitz;
  return env;
}

/// Samples of u_F on a uniform grid plus the posteriors where t(p) hits a
/// breakpoint of F (with left limits), ready for concavify_samples.
inline std::vector<std::pair<double, double>> indirect_utility_samples(const BinaryMarket& m, const CdfModel& f,
                                                                       std::size_t resolution) {
  if (resolution == 0) throw ValidationError("resolution must be positive");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i <= resolution; ++i) {
    const double p = i == resolution ? 1.0 : static_cast<double>(i) / static_cast<double>(resolution);
    pts.emplace_back(p, indirect_utility(m, f, p));
  }
  std::vector<double> special{1.0 / m.b_high()};
  for (double x : f.breakpoints())
    if (x >= 0.0 && x <= m.b_low()) special.push_back(1.0 / (m.b_high() - x));
  for (double p : special) {
    pts.emplace_back(p, indirect_utility(m, f, p));
    const double t = threshold(m, p);
    pts.emplace_back(p, t < 0.0 ? 0.0 : (1.0 - p) * f.left_limit(t));
  }
  return pts;
}

}  // namespace robustseg
