#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "robustseg/market.hpp"
#include "robustseg/profile.hpp"
#include "robustseg/segmentation.hpp"
#include "robustseg/simplex.hpp"

namespace robustseg {

/// All posteriors over n values whose coordinates are multiples of 1/m,
/// stored as integer counts summing to m.
struct PosteriorGrid {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<std::vector<unsigned>> counts;

  std::size_t size() const { return counts.size(); }

  template <class T>
  std::vector<T> posterior(std::size_t k) const {
    std::vector<T> p;
    p.reserve(n);
    for (auto c : counts[k]) p.push_back(T(c) / T(m));
    return p;
  }

  template <class T>
  std::vector<std::vector<T>> posteriors() const {
    std::vector<std::vector<T>> out;
    out.reserve(size());
    for (std::size_t k = 0; k < size(); ++k) out.push_back(posterior<T>(k));
    return out;
  }
};

inline PosteriorGrid posterior_grid(std::size_t n, std::size_t m) {
  if (n < 1) throw ValidationError("posterior grid needs n >= 1");
  if (m < 1) throw ValidationError("posterior grid resolution must be >= 1");
  PosteriorGrid g{n, m, {}};
  std::vector<unsigned> cur(n, 0);
  // Lexicographic compositions of m into n nonnegative parts.
  auto rec = [&](auto&& self, std::size_t i, unsigned left) -> void {
    if (i + 1 == n) {
      cur[i] = left;
      g.counts.push_back(cur);
      return;
    }
    for (unsigned c = left + 1; c-- > 0;) {
      cur[i] = c;
      self(self, i + 1, left - c);
    }
  };
  rec(rec, 0, static_cast<unsigned>(m));
  return g;
}

/// Payoff data of the discretized regret game; the LP is assembled from it.
struct RegretLp {
  std::vector<std::vector<double>> posteriors;  ///< K x n
  std::vector<double> prior;
  std::vector<double> adversary;  ///< seller values s_j
  std::vector<double> benchmark;  ///< U*(s_j)
  std::vector<double> payoff;     ///< K x J row-major: U(p_k; s_j)

  std::size_t designer_size() const { return posteriors.size(); }
  std::size_t adversary_size() const { return adversary.size(); }
  double u(std::size_t k, std::size_t j) const { return payoff[k * adversary.size() + j]; }

  /// Variables: w (K), R, slack (J). Rows: plausibility (n), normalization,
  /// then one per s_j: sum_k U_kj w_k + R - slack_j = U*(s_j).
  LinearProgram to_program() const {
    const std::size_t K = designer_size(), J = adversary_size(), n = prior.size();
    LinearProgram lp(n + 1 + J, K + 1 + J);
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t i = 0; i < n; ++i) lp.at(i, k) = posteriors[k][i];
      lp.at(n, k) = 1.0;
      for (std::size_t j = 0; j < J; ++j) lp.at(n + 1 + j, k) = u(k, j);
    }
    for (std::size_t i = 0; i < n; ++i) lp.b[i] = prior[i];
    lp.b[n] = 1.0;
    for (std::size_t j = 0; j < J; ++j) {
      lp.at(n + 1 + j, K) = 1.0;
      lp.at(n + 1 + j, K + 1 + j) = -1.0;
      lp.b[n + 1 + j] = benchmark[j];
    }
    lp.c[K] = 1.0;
    return lp;
  }
};

/// {0, h, 2h, ...} up to b_{n-1}, plus every buyer value and profile kink.
template <class T>
std::vector<T> adversary_grid(const ValuationGrid<T>& grid, const T& h) {
  if (!(h > T(0))) throw ValidationError("adversary grid step must be positive");
  const T& top = grid.zero_point();
  std::vector<T> pts;
  for (std::size_t j = 0;; ++j) {
    T s = T(static_cast<long long>(j)) * h;
    if (s > top) break;
    pts.push_back(std::move(s));
  }
  for (const auto& v : grid.values())
    if (!(v > top)) pts.push_back(v);
  for (auto& s : profile_breakpoints(grid)) pts.push_back(std::move(s));
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(), [](const T& a, const T& b) { return a == b; }), pts.end());
  return pts;
}

namespace detail {

inline void parallel_for(std::size_t count, unsigned jobs, const auto& body) {
  jobs = std::max(1u, jobs);
  if (jobs == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < jobs; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += jobs) body(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Payoffs are evaluated in T (exact tie-breaking for Rational) and stored as doubles.
template <class T>
RegretLp build_regret_lp(const ValuationGrid<T>& grid, const std::vector<std::vector<T>>& posteriors,
                         const std::vector<T>& adversary, unsigned jobs = 1) {
  if (posteriors.empty()) throw ValidationError("no designer posteriors");
  RegretLp lp;
  const std::size_t K = posteriors.size(), J = adversary.size();
  for (const auto& p : posteriors) {
    Posterior<T> check(p);
    if (check.size() != grid.size()) throw ValidationError("posterior dimension does not match grid");
    std::vector<double> d;
    for (const auto& x : p) d.push_back(to_double(x));
    lp.posteriors.push_back(std::move(d));
  }
  for (const auto& x : grid.prior()) lp.prior.push_back(to_double(x));
  for (const auto& s : adversary) {
    lp.adversary.push_back(to_double(s));
    lp.benchmark.push_back(to_double(optimal_surplus(grid, s)));
  }
  lp.payoff.assign(K * J, 0.0);
  detail::parallel_for(K, jobs, [&](std::size_t k) {
    const std::span<const T> p(posteriors[k]);
    for (std::size_t j = 0; j < J; ++j) lp.payoff[k * J + j] = to_double(buyer_surplus(grid, p, adversary[j]));
  });
  return lp;
}

template <class T>
RegretLp build_regret_lp(const ValuationGrid<T>& grid, const PosteriorGrid& posteriors, const T& h,
                         unsigned jobs = 1) {
  if (posteriors.n != grid.size()) throw ValidationError("posterior grid dimension does not match market");
  return build_regret_lp(grid, posteriors.posteriors<T>(), adversary_grid(grid, h), jobs);
}

struct GameSolution {
  LpStatus status = LpStatus::infeasible;
  double value = 0.0;
  std::vector<double> weights;    ///< designer mass per posterior
  std::vector<double> adversary;  ///< adversary mixed strategy over s_j
  double gap = 0.0;
  double primal_residual = 0.0;
  double dual_infeasibility = 0.0;
  double plausibility_residual = 0.0;
  std::size_t iterations = 0;
};

inline GameSolution solve_regret_lp(const RegretLp& lp, const SimplexOptions& opt = {}) {
  const auto sol = solve_lp(lp.to_program(), opt);
  GameSolution g;
  g.status = sol.status;
  g.iterations = sol.iterations;
  if (sol.status != LpStatus::optimal) return g;
  const std::size_t K = lp.designer_size(), J = lp.adversary_size(), n = lp.prior.size();
  g.value = sol.x[K];
  g.weights.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(K));
  double total = 0.0;
  for (std::size_t j = 0; j < J; ++j) total += std::max(0.0, sol.y[n + 1 + j]);
  g.adversary.assign(J, 0.0);
  for (std::size_t j = 0; j < J; ++j) g.adversary[j] = total > 0.0 ? std::max(0.0, sol.y[n + 1 + j]) / total : 0.0;
  g.gap = sol.gap();
  g.primal_residual = sol.primal_residual;
  g.dual_infeasibility = sol.dual_infeasibility;
  for (std::size_t i = 0; i < n; ++i) {
    double mass = 0.0;
    for (std::size_t k = 0; k < K; ++k) mass += g.weights[k] * lp.posteriors[k][i];
    g.plausibility_residual = std::max(g.plausibility_residual, std::abs(mass - lp.prior[i]));
  }
  return g;
}

/// Designer mass grouped by which values a posterior puts positive mass on.
struct SupportGroup {
  std::string pattern;  ///< e.g. "1.1" for (p, 0, 1-p): '1' positive, '.' zero
  double mass = 0.0;
  std::size_t count = 0;
  bool gapped = false;  ///< a zero strictly between two positive entries
};

struct SupportReport {
  std::vector<SupportGroup> groups;
  double non_bbm_mass = 0.0;
};

inline SupportReport support_report(const std::vector<double>& weights, const std::vector<std::vector<double>>& posteriors,
                                    double tol = 1e-12) {
  if (weights.size() != posteriors.size()) throw ValidationError("weights and posteriors differ in length");
  std::map<std::string, SupportGroup> by;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] > tol)) continue;
    std::string pat;
    for (double x : posteriors[k]) pat.push_back(x > tol ? '1' : '.');
    auto& g = by[pat];
    g.pattern = pat;
    g.mass += weights[k];
    ++g.count;
    const auto first = pat.find('1'), last = pat.rfind('1');
    g.gapped = first != std::string::npos && pat.find('.', first) < last;
  }
  SupportReport r;
  for (auto& [pat, g] : by) {
    if (g.gapped) r.non_bbm_mass += g.mass;
    r.groups.push_back(g);
  }
  return r;
}

enum class BbmImplementation { equal_revenue, per_sd_lp };

/// Optimal segmentation for a known s_D over the posterior grid, by LP.
template <class T>
std::vector<std::pair<double, std::vector<T>>> lp_optimal_segmentation(const ValuationGrid<T>& grid,
                                                                       const std::vector<std::vector<T>>& posteriors,
                                                                       const T& s_d) {
  const std::size_t K = posteriors.size(), n = grid.size();
  LinearProgram lp(n, K);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < n; ++i) lp.at(i, k) = to_double(posteriors[k][i]);
    lp.c[k] = -to_double(buyer_surplus(grid, std::span<const T>(posteriors[k]), s_d));
  }
  for (std::size_t i = 0; i < n; ++i) lp.b[i] = to_double(grid.prior()[i]);
  const auto sol = solve_lp(lp);
  if (sol.status != LpStatus::optimal) throw CheckFailure("per-s_D segmentation LP: " + to_string(sol.status));
  std::vector<std::pair<double, std::vector<T>>> out;
  for (std::size_t k = 0; k < K; ++k)
    if (sol.x[k] > 1e-12) out.emplace_back(sol.x[k], posteriors[k]);
  return out;
}

struct BbmGameResult {
  double value = 0.0;
  std::vector<double> designer;  ///< mixed strategy over the s_D grid
  std::vector<double> adversary;  ///< mixed strategy over the s grid
  double gap = 0.0;
};

/// Matrix game with regret payoff U*(s) - U(sigma(s_D), s), designer
/// choosing s_D and adversary choosing s.
inline BbmGameResult solve_regret_matrix(const std::vector<std::vector<double>>& regret) {
  const std::size_t D = regret.size();
  if (D == 0) throw ValidationError("empty regret matrix");
  const std::size_t J = regret.front().size();
  // Variables: x (D), v, slack (J). Rows: sum_d x_d A_dj - v + slack_j = 0; sum x = 1.
  LinearProgram lp(J + 1, D + 1 + J);
  for (std::size_t j = 0; j < J; ++j) {
    for (std::size_t d = 0; d < D; ++d) lp.at(j, d) = regret[d][j];
    lp.at(j, D) = -1.0;
    lp.at(j, D + 1 + j) = 1.0;
  }
  for (std::size_t d = 0; d < D; ++d) lp.at(J, d) = 1.0;
  lp.b[J] = 1.0;
  lp.c[D] = 1.0;
  const auto sol = solve_lp(lp);
  if (sol.status != LpStatus::optimal) throw CheckFailure("regret matrix game: " + to_string(sol.status));
  BbmGameResult r;
  r.value = sol.x[D];
  r.designer.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(D));
  double total = 0.0;
  for (std::size_t j = 0; j < J; ++j) total += std::max(0.0, -sol.y[j]);
  r.adversary.assign(J, 0.0);
  for (std::size_t j = 0; j < J; ++j) r.adversary[j] = total > 0.0 ? std::max(0.0, -sol.y[j]) / total : 0.0;
  r.gap = sol.gap();
  return r;
}

/// Value of the game where the designer is restricted to BBM segmentations
/// built on a grid of guesses s_D, with the given implementation of the
/// s_D-optimal segmentation. `resolution` is the posterior grid used by
/// the per-s_D LP.
template <class T>
BbmGameResult bbm_restricted_game_value(const ValuationGrid<T>& grid, const std::vector<T>& sd_grid,
                                        const std::vector<T>& s_grid, BbmImplementation impl,
                                        std::size_t resolution = 30, unsigned jobs = 1) {
  if (sd_grid.empty() || s_grid.empty()) throw ValidationError("empty strategy grid");
  std::vector<double> bench;
  for (const auto& s : s_grid) bench.push_back(to_double(optimal_surplus(grid, s)));
  std::vector<std::vector<T>> posts;
  if (impl == BbmImplementation::per_sd_lp) posts = posterior_grid(grid.size(), resolution).template posteriors<T>();

  std::vector<std::vector<double>> regret(sd_grid.size(), std::vector<double>(s_grid.size(), 0.0));
  detail::parallel_for(sd_grid.size(), jobs, [&](std::size_t d) {
    auto& row = regret[d];
    if (impl == BbmImplementation::equal_revenue) {
      const auto sigma = greedy_optimal_segmentation(grid, sd_grid[d], SegmentationStyle::equal_revenue);
      for (std::size_t j = 0; j < s_grid.size(); ++j)
        row[j] = bench[j] - to_double(segmentation_surplus(grid, sigma, s_grid[j]));
    } else {
      const auto mix = lp_optimal_segmentation(grid, posts, sd_grid[d]);
      for (std::size_t j = 0; j < s_grid.size(); ++j) {
        double u = 0.0;
        for (const auto& [w, p] : mix) u += w * to_double(buyer_surplus(grid, std::span<const T>(p), s_grid[j]));
        row[j] = bench[j] - u;
      }
    }
  });
  return solve_regret_matrix(regret);
}

}  // namespace robustseg
