#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <variant>
#include <vector>

#include "robustseg/number.hpp"

namespace robustseg {

/// Uniform pieces plus point masses; interval and atom weights sum to one.
struct PiecewiseUniformMixture {
  struct Interval {
    double lo, hi, weight;
  };
  struct Atom {
    double at, mass;
  };
  std::vector<Interval> intervals;
  std::vector<Atom> atoms;
};

/// F(t) = (b_low - beta) / (b_low - t) on [0, beta]: atom (b_low - beta)/b_low
/// at zero, density (b_low - beta)/(b_low - t)^2 on (0, beta].
struct FBeta {
  double b_low;
  double beta;
};

/// Tabulated CDF. Between points the CDF follows `interpolation`; below the
/// first point it is 0 (so cumulative[0] > 0 is an atom there).
struct EmpiricalTable {
  enum class Interpolation {
    step,        ///< right-continuous staircase
    linear,      ///< F linear between points
    reciprocal,  ///< 1/F linear between points (exact for F = c / affine)
  };
  std::vector<double> points;
  std::vector<double> cumulative;
  Interpolation interpolation = Interpolation::linear;
};

/// Seller-value distribution, as a CDF on [0, inf).
class CdfModel {
 public:
  using Variant = std::variant<PiecewiseUniformMixture, FBeta, EmpiricalTable>;

  CdfModel(PiecewiseUniformMixture m) : model_(std::move(m)) { validate(); }
  CdfModel(FBeta f) : model_(f) { validate(); }
  CdfModel(EmpiricalTable t) : model_(std::move(t)) { validate(); }

  const Variant& model() const { return model_; }

  double operator()(double t) const { return evaluate(t); }

  double evaluate(double t) const {
    return std::visit([t](const auto& m) { return CdfModel::eval(m, t); }, model_);
  }

  /// Left limit F(t-).
  double left_limit(double t) const {
    return evaluate(std::nextafter(t, -std::numeric_limits<double>::infinity()));
  }

  /// Points where F jumps or changes formula, sorted.
  std::vector<double> breakpoints() const {
    std::vector<double> pts;
    std::visit(
        [&pts](const auto& m) {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, PiecewiseUniformMixture>) {
            for (const auto& iv : m.intervals) {
              pts.push_back(iv.lo);
              pts.push_back(iv.hi);
            }
            for (const auto& a : m.atoms) pts.push_back(a.at);
          } else if constexpr (std::is_same_v<M, FBeta>) {
            pts = {0.0, m.beta};
          } else {
            pts = m.points;
          }
        },
        model_);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
  }

  /// Largest point of the support.
  double support_max() const {
    auto pts = breakpoints();
    return pts.empty() ? 0.0 : pts.back();
  }

 private:
  static double eval(const PiecewiseUniformMixture& m, double t) {
    double f = 0.0;
    for (const auto& iv : m.intervals) {
      if (t >= iv.hi) f += iv.weight;
      else if (t > iv.lo) f += iv.weight * (t - iv.lo) / (iv.hi - iv.lo);
    }
    for (const auto& a : m.atoms)
      if (t >= a.at) f += a.mass;
    return std::clamp(f, 0.0, 1.0);
  }

  static double eval(const FBeta& m, double t) {
    if (t < 0.0) return 0.0;
    if (t >= m.beta) return 1.0;
    return (m.b_low - m.beta) / (m.b_low - t);
  }

  static double eval(const EmpiricalTable& m, double t) {
    const auto& x = m.points;
    const auto& c = m.cumulative;
    if (t < x.front()) return 0.0;
    if (t >= x.back()) return 1.0;
    const auto k = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), t) - x.begin()) - 1;
    const double frac = (t - x[k]) / (x[k + 1] - x[k]);
    switch (m.interpolation) {
      case EmpiricalTable::Interpolation::step:
        return c[k];
      case EmpiricalTable::Interpolation::linear:
        return c[k] + frac * (c[k + 1] - c[k]);
      case EmpiricalTable::Interpolation::reciprocal:
        return 1.0 / (1.0 / c[k] + frac * (1.0 / c[k + 1] - 1.0 / c[k]));
    }
    return c[k];
  }

  void validate() const {
    std::visit(
        [](const auto& m) {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, PiecewiseUniformMixture>) {
            double total = 0.0;
            for (const auto& iv : m.intervals) {
              if (!(iv.hi > iv.lo) || iv.weight < 0.0) throw ValidationError("bad uniform interval");
              total += iv.weight;
            }
            for (const auto& a : m.atoms) {
              if (a.mass < 0.0) throw ValidationError("negative atom");
              total += a.mass;
            }
            if (std::abs(total - 1.0) > 1e-12) throw ValidationError("mixture weights must sum to 1");
          } else if constexpr (std::is_same_v<M, FBeta>) {
            if (!(m.b_low > 0.0) || m.beta < 0.0 || !(m.beta < m.b_low)) throw ValidationError("F_beta needs 0 <= beta < b_1");
          } else {
            if (m.points.empty() || m.points.size() != m.cumulative.size()) throw ValidationError("empty CDF table");
            for (std::size_t k = 0; k < m.points.size(); ++k) {
              if (k > 0 && !(m.points[k] > m.points[k - 1])) throw ValidationError("CDF table points must increase");
              if (k > 0 && m.cumulative[k] < m.cumulative[k - 1]) throw ValidationError("CDF table must be nondecreasing");
              if (m.cumulative[k] < 0.0 || m.cumulative[k] > 1.0) throw ValidationError("CDF values must lie in [0,1]");
            }
            if (m.cumulative.back() != 1.0) throw ValidationError("CDF table must reach 1");
            if (m.interpolation == EmpiricalTable::Interpolation::reciprocal && !(m.cumulative.front() > 0.0))
              throw ValidationError("reciprocal interpolation needs positive CDF values");
          }
        },
        model_);
  }

  Variant model_;
};

}  // namespace robustseg
