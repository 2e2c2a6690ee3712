// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "robustseg/binary.hpp"
#include "robustseg/experiments.hpp"
#include "robustseg/game_lp.hpp"
#include "robustseg/hazard.hpp"
#include "robustseg/segmentation.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace robustseg;
using R = Rational;

namespace {

const double kE = std::exp(1.0);

struct Check {
  bool ok = true;
  std::ostringstream note;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) note << "first failure: " << what << "; ";
    ok = ok && cond;
  }
};

ValuationGrid<R> uniform3_exact() { return ValuationGrid<R>({R(1), R(2), R(3)}, {R(1, 3), R(1, 3), R(1, 3)}); }
ValuationGrid<double> uniform3() { return ValuationGrid<double>({1, 2, 3}, {1.0 / 3, 1.0 / 3, 1.0 / 3}); }

void canonical_instance(Check& c) {
  const auto g = uniform3_exact();
  c.expect(optimal_surplus(g, R(0)) == R(2, 3), "U*(0) = 2/3");
  const auto sigma = greedy_optimal_segmentation(g, R(0));
  const std::vector<R> weights{R(2, 3), R(1, 6), R(1, 6)};
  const std::vector<std::vector<R>> posts{{R(1, 2), R(1, 6), R(1, 3)}, {R(0), R(1, 3), R(2, 3)}, {R(0), R(1), R(0)}};
  c.expect(sigma.size() == 3, "three segments");
  for (std::size_t k = 0; k < std::min<std::size_t>(3, sigma.size()); ++k) {
    c.expect(sigma.segments()[k].weight == weights[k], "segment weight");
    c.expect(sigma.segments()[k].posterior.probs() == posts[k], "segment posterior");
  }
  c.expect(segmentation_surplus(g, sigma, R(0)) == R(2, 3), "surplus 2/3");
  c.expect(segmentation_revenue(g, sigma, R(0)) == R(4, 3), "revenue 4/3");

  // Oracle: best mixture of grid posteriors, found by LP.
  const auto mix = lp_optimal_segmentation(g, posterior_grid(3, 60).posteriors<R>(), R(0));
  double u = 0.0;
  for (const auto& [w, p] : mix) u += w * to_double(buyer_surplus(g, std::span<const R>(p), R(0)));
  c.expect(u >= 2.0 / 3.0 - 1e-6, "grid LP reaches 2/3");
  c.note << "grid LP surplus " << u;
}

void worst_case_bound(Check& c) {
  testgen::Gen gen(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = surplus_profile(gen.grid(static_cast<std::size_t>(gen.integer(2, 6))));
    const auto h = hazard_strategy(p);
    const double bound = p.initial_value() / kE;
    worst = std::max(worst, std::abs(worst_case_regret(h) - bound));
    for (int k = 0; k <= 50; ++k) {
      const double r = hazard_regret(h, h.delta * k / 50.0);
      worst = std::max(worst, std::abs(r - bound));
    }
    for (int k = 1; k <= 50; ++k) {
      const double s = h.delta + (p.zero_point() + 1.0 - h.delta) * k / 50.0;
      c.expect(hazard_regret(h, s) < bound, "regret below bound beyond delta");
    }
  }
  c.expect(worst <= 1e-9, "regret equals U*(0)/e");
  c.note << "max deviation " << worst;
}

void binary_tightness(Check& c) {
  testgen::Gen gen(1002);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = gen.binary();
    const double lower = best_beta(m).lower_bound;
    const double upper = worst_case_regret(hazard_strategy(binary_profile(m)));
    worst = std::max(worst, std::abs(lower - upper));
  }
  c.expect(worst <= 1e-9, "lower bound meets upper bound");
  const BinaryMarket fig(1.0, 2.0, 2.0 / 3.0);
  const double lower = best_beta(fig).lower_bound;
  const double upper = worst_case_regret(hazard_strategy(binary_profile(fig)));
  c.expect(std::abs(lower - 1.0 / (3.0 * kE)) <= 1e-9, "two-type example lower bound");
  c.expect(std::abs(upper - 1.0 / (3.0 * kE)) <= 1e-9, "two-type example upper bound");
  c.note << "max gap " << worst << ", example " << lower;
}

void lp_reproduction(Check& c) {
  const auto lp = build_regret_lp(uniform3_exact(), posterior_grid(3, 60), R(1, 100));
  const auto sol = solve_regret_lp(lp);
  c.expect(sol.status == LpStatus::optimal, "LP optimal");
  const auto rep = support_report(sol.weights, lp.posteriors);
  double gapped = 0.0;
  for (const auto& g : rep.groups)
    if (g.gapped) gapped += g.mass;
  c.expect(sol.value >= 0.150 && sol.value <= 0.180, "value in [0.150, 0.180]");
  c.expect(gapped >= 0.05 && gapped <= 0.15, "gapped mass in [0.05, 0.15]");
  c.note << "value " << sol.value << ", gapped mass " << gapped << ", gap " << sol.gap;
}

void bbm_restricted(Check& c) {
  const auto g = uniform3();
  std::vector<double> sd, s;
  for (int j = 0; j <= 100; ++j) sd.push_back(j / 50.0);
  for (int j = 0; j <= 200; ++j) s.push_back(j / 100.0);
  const auto er = bbm_restricted_game_value(g, sd, s, BbmImplementation::equal_revenue);
  const auto lp = bbm_restricted_game_value(g, sd, s, BbmImplementation::per_sd_lp);
  c.expect(std::abs(er.value - 0.2453) <= 0.005, "equal-revenue value near 0.2453");
  c.expect(std::abs(er.value - 2.0 / (3.0 * kE)) <= 0.005, "equal-revenue value near U*(0)/e");
  c.expect(lp.value >= 0.165 && lp.value <= 0.245, "per-s_D LP value in [0.165, 0.245]");
  c.note << "equal_revenue " << er.value << ", per_sd_lp " << lp.value;
}

void equilibrium(Check& c) {
  testgen::Gen gen(1006);
  double spread_d = 0.0, spread_a = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = surplus_profile(gen.grid(static_cast<std::size_t>(gen.integer(2, 6))));
    const auto h = hazard_strategy(p);
    const auto f = adversary_equilibrium_cdf(p);
    const double value = p.initial_value() / kE;
    const double eu = oracle::expected_profile(p, f);
    for (int k = 0; k <= 200; ++k) {
      const double x = h.delta * k / 200.0;
      spread_d = std::max(spread_d, std::abs(oracle::designer_payoff(h, x) - value));
      const double y = p.s_star() + (h.delta - p.s_star()) * k / 200.0;
      spread_a = std::max(spread_a, std::abs(oracle::adversary_payoff(p, f, eu, y) - value));
    }
    for (int k = 1; k <= 50; ++k) {
      const double y = h.delta + (p.zero_point() + 1.0 - h.delta) * k / 50.0;
      c.expect(oracle::adversary_payoff(p, f, eu, y) >= value - 1e-9, "adversary payoff weakly larger beyond delta");
      if (p.s_star() > 0.0) {
        const double below = p.s_star() * k / 51.0;
        c.expect(oracle::adversary_payoff(p, f, eu, below) >= value - 1e-9, "adversary payoff weakly larger below s*");
      }
    }
  }
  c.expect(spread_d <= 1e-9, "designer payoff constant on [0, delta]");
  c.expect(spread_a <= 1e-9, "adversary payoff constant on [s*, delta]");
  c.note << "designer spread " << spread_d << ", adversary spread " << spread_a;
}

void extensions(Check& c) {
  const auto u3 = surplus_profile(uniform3());
  testgen::Gen gen(1007);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = surplus_profile(gen.grid(static_cast<std::size_t>(gen.integer(2, 6))));
    const auto h = hazard_strategy(p);
    c.expect(std::abs(restricted_value(p, h.delta) - p.initial_value() / kE) <= 1e-12, "restricted value at delta");
    double prev = 0.0;
    for (int k = 1; k <= 100; ++k) {
      const double tau = std::min(p.zero_point(), p.s_star() + (p.zero_point() - p.s_star()) * k / 100.0);
      const double v = restricted_value(p, tau);
      c.expect(v >= prev - 1e-12, "restricted value nondecreasing");
      prev = v;
    }
    c.expect(std::abs(generalized_value(p, 0.5) - worst_case_regret(h) / 2.0) <= 1e-12, "generalized value at 1/2");
    c.expect(std::abs(generalized_value(p, 0.999) - p.initial_value()) <= 0.01 * p.initial_value(),
             "generalized value near U*(0)");
  }
  const double r1 = restricted_value(u3, 1.0);
  c.expect(std::abs(r1 - std::log(2.0) / 3.0) <= 1e-12, "restricted value at tau = 1");
  c.note << "uniform restricted(1) " << r1;
}

void monte_carlo(Check& c) {
  testgen::Gen gen(1008);
  int misses = 0;
  double worst_z = 0.0;
  for (int inst = 0; inst < 10; ++inst) {
    const auto g = gen.grid(static_cast<std::size_t>(gen.integer(2, 6)));
    const auto h = hazard_strategy(surplus_profile(g));
    std::vector<double> ss;
    for (int k = 0; k < 10; ++k) ss.push_back(gen.uniform(0.0, g.values().back()));
    const auto est = monte_carlo_regret(g, h, ss, 100000, 5000 + static_cast<std::uint64_t>(inst));
    for (std::size_t k = 0; k < ss.size(); ++k) {
      const double exact = hazard_regret(h, ss[k]);
      const double diff = std::abs(est[k].mean - exact);
      if (est[k].std_error > 0.0) worst_z = std::max(worst_z, diff / est[k].std_error);
      if (diff > 3.0 * est[k].std_error + 1e-12) ++misses;
    }
  }
  c.expect(misses == 0, "estimates within 3 standard errors");
  c.note << "max |z| " << worst_z;
}

void experiments(Check& c) {
  SweepConfig pareto_cfg, ln_cfg;
  pareto_cfg.parameters = {1.2, 1.5, 2.0, 3.0};
  ln_cfg.family = Family::lognormal;
  ln_cfg.parameters = {0.25, 0.5, 1.0, 1.5};
  double slack = 1e300;
  for (auto* cfg : {&pareto_cfg, &ln_cfg}) {
    std::string first;
    for (unsigned jobs : {1u, 4u, 1u}) {
      cfg->jobs = jobs;
      const auto rows = run_sweep(*cfg);
      for (const auto& r : rows) {
        c.expect(r.expected_diff >= 0.0, "difference nonnegative");
        c.expect(r.expected_diff <= r.bound + 1e-9, "difference below bound");
        slack = std::min(slack, r.bound - r.expected_diff);
      }
      std::ostringstream out;
      write_sweep_csv(out, rows);
      if (first.empty()) first = out.str();
      c.expect(out.str() == first, "CSV byte-stable");
    }
  }
  c.note << "min slack " << slack;
}

void concavification(Check& c) {
  testgen::Gen gen(1010);
  constexpr std::size_t kRes = 1000;
  double sup = 0.0, quad = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = gen.binary();
    const double beta = gen.uniform(std::max(0.0, m.kink()), m.b_low() * (1.0 - 1e-6));
    const auto env = concavify(u_beta_closed_form(m, beta), kRes);
    const auto cav = cav_u_beta(m, beta);
    for (int k = 0; k <= 20000; ++k) sup = std::max(sup, std::abs(env(k / 20000.0) - cav(k / 20000.0)));
    const double numeric = expected_profile_value(binary_profile(m), f_beta(m, beta));
    quad = std::max(quad, std::abs(numeric - oracle::expected_under_fbeta(m, beta)));
  }
  c.expect(sup <= 2.0 / kRes, "envelope within two grid steps");
  c.expect(quad <= 1e-6, "quadrature matches closed form");
  c.note << "envelope sup error " << sup << ", quadrature error " << quad;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"canonical three-value instance", canonical_instance},
      {"worst-case regret bound", worst_case_bound},
      {"two-type tightness", binary_tightness},
      {"discretized game LP", lp_reproduction},
      {"BBM-restricted game", bbm_restricted},
      {"equilibrium indifference", equilibrium},
      {"restricted and generalized extensions", extensions},
      {"Monte Carlo consistency", monte_carlo},
      {"experiment sweeps", experiments},
      {"concavification oracle", concavification},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.note << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %zu: %s (%s; %.2fs)\n", c.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                c.note.str().c_str(), secs);
    std::fflush(stdout);
    failed += !c.ok;
  }
  return failed == 0 ? 0 : 1;
}
