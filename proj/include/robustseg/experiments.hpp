#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "robustseg/game_lp.hpp"
#include "robustseg/hazard.hpp"
#include "robustseg/text_format.hpp"

namespace robustseg {

enum class Family { pareto, lognormal };

inline Family parse_family(const std::string& s) {
  if (s == "pareto") return Family::pareto;
  if (s == "lognormal") return Family::lognormal;
  throw ValidationError("unknown family '" + s + "'");
}

inline std::string to_string(Family f) { return f == Family::pareto ? "pareto" : "lognormal"; }

/// Inverse standard normal CDF. Acklam's rational approximation (relative
/// error about 1e-9) followed by one Halley step against erfc.
inline double normal_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw ValidationError("quantile level must lie in (0,1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double lo = 0.02425;
  double x;
  if (q < lo) {
    const double t = std::sqrt(-2.0 * std::log(q));
    x = (((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
        ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
  } else if (q <= 1.0 - lo) {
    const double t = q - 0.5, r = t * t;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * t /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double t = std::sqrt(-2.0 * std::log1p(-q));
    x = -(((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
        ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - q;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Continuous distribution on [0, inf) given by its CDF and quantile.
struct Distribution {
  std::function<double(double)> cdf;
  std::function<double(double)> quantile;
};

/// Pareto with scale 1: F(x) = 1 - x^{-alpha} for x >= 1.
inline Distribution pareto(double alpha) {
  if (!(alpha > 0.0)) throw ValidationError("Pareto alpha must be positive");
  return {[alpha](double x) { return x <= 1.0 ? 0.0 : 1.0 - std::pow(x, -alpha); },
          [alpha](double q) {
            if (!(q > 0.0 && q < 1.0)) throw ValidationError("quantile level must lie in (0,1)");
            return std::pow(1.0 - q, -1.0 / alpha);
          }};
}

/// exp(X) with X ~ N(m, sd^2).
inline Distribution lognormal(double m, double sd) {
  if (!(sd > 0.0)) throw ValidationError("lognormal sigma must be positive");
  return {[m, sd](double x) { return x <= 0.0 ? 0.0 : normal_cdf((std::log(x) - m) / sd); },
          [m, sd](double q) { return std::exp(m + sd * normal_quantile(q)); }};
}

inline double quantile(const Distribution& d, double q) { return d.quantile(q); }

/// n-point grid b_i = (i/n) F^{-1}(1 - eps) with weights F(b_i) - F(b_{i-1}),
/// rescaled by the captured mass. Empty cells fold into the next value up.
inline ValuationGrid<double> discretize(const Distribution& dist, std::size_t n, double epsilon) {
  if (n < 2) throw ValidationError("discretization needs n >= 2");
  if (!(epsilon >= 0.0 && epsilon < 0.1)) throw ValidationError("epsilon must lie in [0, 0.1)");
  const double top = dist.quantile(1.0 - epsilon);
  if (!(top > 0.0) || !std::isfinite(top)) throw ValidationError("upper quantile is not positive and finite");
  std::vector<double> values, weights;
  double prev_cdf = dist.cdf(0.0), carried = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double b = i == n ? top : static_cast<double>(i) / static_cast<double>(n) * top;
    const double f = dist.cdf(b);
    const double w = f - prev_cdf + carried;
    prev_cdf = f;
    if (w > 0.0) {
      values.push_back(b);
      weights.push_back(w);
      carried = 0.0;
    } else {
      carried = w;
    }
  }
  if (values.size() < 2) throw ValidationError("degenerate discretization: all mass in one cell");
  double total = 0.0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;
  return ValuationGrid<double>(std::move(values), std::move(weights));
}

enum class LognormalMode { fixed_location, fixed_mean };

struct SweepConfig {
  Family family = Family::pareto;
  std::vector<double> parameters;
  std::size_t n = 15;
  double epsilon = 1e-3;
  /// Lognormal: the normal mean in fixed_location mode; the log of the
  /// lognormal mean in fixed_mean mode.
  double location = 1.0;
  LognormalMode mode = LognormalMode::fixed_location;
  std::string output;
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  void validate() const {
    if (n < 2) throw ValidationError("n must be >= 2");
    if (!(epsilon > 0.0 && epsilon < 0.1)) throw ValidationError("epsilon must lie in (0, 0.1)");
    if (parameters.empty()) throw ValidationError("no sweep parameters");
    for (double p : parameters)
      if (!(p > 0.0)) throw ValidationError("sweep parameters must be positive");
  }

  Distribution distribution(double param) const {
    if (family == Family::pareto) return pareto(param);
    const double m = mode == LognormalMode::fixed_location ? location : location - 0.5 * param * param;
    return lognormal(m, param);
  }
};

/// Reads `key = value` lines ('#' comments). Keys: family, parameters, n,
/// epsilon, location, mode (fixed_location | fixed_mean), output, seed, jobs.
inline SweepConfig read_sweep_config(std::istream& in) {
  SweepConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (detail::trim(line).empty()) continue;
    if (eq == std::string::npos) throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key(detail::trim(std::string_view(line).substr(0, eq)));
    const std::string val(detail::trim(std::string_view(line).substr(eq + 1)));
    try {
      if (key == "family") cfg.family = parse_family(val);
      else if (key == "parameters") cfg.parameters = parse_list<double>(val);
      else if (key == "n") cfg.n = static_cast<std::size_t>(std::stoul(val));
      else if (key == "epsilon") cfg.epsilon = parse_number<double>(val);
      else if (key == "location") cfg.location = parse_number<double>(val);
      else if (key == "mode") {
        if (val == "fixed_location") cfg.mode = LognormalMode::fixed_location;
        else if (val == "fixed_mean") cfg.mode = LognormalMode::fixed_mean;
        else throw ValidationError("unknown mode '" + val + "'");
      } else if (key == "output") cfg.output = val;
      else if (key == "seed") cfg.seed = std::stoull(val);
      else if (key == "jobs") cfg.jobs = static_cast<unsigned>(std::stoul(val));
      else throw ValidationError("unknown key '" + key + "'");
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const ValidationError*>(&e)) throw;
      throw ValidationError("config line " + std::to_string(lineno) + ": bad value for '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

struct SweepRow {
  double param = 0.0;
  double expected_optimal = 0.0;
  double expected_robust = 0.0;
  double expected_diff = 0.0;
  double bound = 0.0;
};

/// Seller value drawn from the market's own prior: exact sums over the grid.
inline SweepRow sweep_point(const ValuationGrid<double>& grid, double param) {
  const auto profile = surplus_profile(grid);
  const auto h = hazard_strategy(profile);
  SweepRow row;
  row.param = param;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = grid.value(i);
    row.expected_optimal += grid.prior()[i] * optimal_surplus(grid, s);
    row.expected_robust += grid.prior()[i] * robust_buyer_surplus(h, s);
  }
  row.expected_diff = row.expected_optimal - row.expected_robust;
  row.bound = profile.initial_value() / std::exp(1.0);
  return row;
}

inline std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  std::vector<SweepRow> rows(cfg.parameters.size());
  detail::parallel_for(rows.size(), cfg.jobs, [&](std::size_t k) {
    const double p = cfg.parameters[k];
    rows[k] = sweep_point(discretize(cfg.distribution(p), cfg.n, cfg.epsilon), p);
  });
  return rows;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "param,expected_optimal,expected_robust,expected_diff,bound\n";
  for (const auto& r : rows)
    out << format_number(r.param) << ',' << format_number(r.expected_optimal) << ',' << format_number(r.expected_robust)
        << ',' << format_number(r.expected_diff) << ',' << format_number(r.bound) << '\n';
}

}  // namespace robustseg
