#pragma once

// Command-line front end. `run` never calls exit(); it returns the exit code:
// 0 success, 2 invalid input or usage, 3 a computed check failed.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "robustseg/binary.hpp"
#include "robustseg/experiments.hpp"
#include "robustseg/game_lp.hpp"
#include "robustseg/hazard.hpp"
#include "robustseg/segmentation.hpp"
#include "robustseg/text_format.hpp"

namespace robustseg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitCheck = 3;

struct MarketArgs {
  std::string values, prior, grid_file;
  bool force_float = false;

  void add_to(CLI::App* app) {
    app->add_option("--values", values, "buyer values, e.g. 1,2,3");
    app->add_option("--prior", prior, "prior over values, e.g. 1/3,1/3,1/3");
    app->add_option("--grid", grid_file, "instance file with 'values' and 'prior' records");
    app->add_flag("--float", force_float, "compute in floating point even for exact inputs");
  }

  std::string read_file() const {
    std::ifstream in(grid_file);
    if (!in) throw ValidationError("cannot open '" + grid_file + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  bool exact() const {
    if (force_float) return false;
    if (!grid_file.empty()) {
      std::istringstream in(read_file());
      return text_is_exact(in);
    }
    for (const auto* text : {&values, &prior})
      for (const auto& tok : split_list(*text))
        if (!is_exact_literal(tok)) return false;
    return true;
  }

  template <class T>
  InstanceFile<T> load() const {
    if (!grid_file.empty()) {
      if (!values.empty() || !prior.empty()) throw ValidationError("use either --grid or --values/--prior");
      std::istringstream in(read_file());
      auto inst = read_instance<T>(in);
      if (!inst.grid) throw ValidationError("instance file has no 'values'/'prior' records");
      return inst;
    }
    if (values.empty() || prior.empty()) throw ValidationError("market needs --values and --prior (or --grid)");
    InstanceFile<T> inst;
    inst.grid.emplace(parse_list<T>(values), parse_list<T>(prior));
    return inst;
  }
};

/// Calls f(InstanceFile<T>) with T = Rational for exact inputs, else double.
template <class F>
int with_market(const MarketArgs& m, F&& f) {
  if (m.exact()) return f(m.load<Rational>());
  return f(m.load<double>());
}

inline unsigned resolve_jobs(unsigned jobs) {
  if (jobs > 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot write '" + path + "'");
  return f;
}

inline std::optional<double> parse_optional(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_number<double>(s);
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust buyer-optimal market segmentation"};
  app.require_subcommand(1);
  app.allow_extras(false);

  // surplus
  MarketArgs surplus_m;
  std::string surplus_s;
  bool surplus_profile_flag = false;
  auto* surplus_cmd = app.add_subcommand("surplus", "optimal buyer surplus U*(s) and its profile");
  surplus_m.add_to(surplus_cmd);
  surplus_cmd->add_option("--s", surplus_s, "seller values (list)");
  surplus_cmd->add_flag("--profile", surplus_profile_flag, "also print the profile knots");

  // segment
  MarketArgs segment_m;
  std::string segment_sd, segment_style = "equal_revenue", segment_dump;
  auto* segment_cmd = app.add_subcommand("segment", "buyer-optimal segmentation for a known seller value");
  segment_m.add_to(segment_cmd);
  segment_cmd->add_option("--sd", segment_sd, "seller value s_D")->required();
  segment_cmd->add_option("--style", segment_style, "equal_revenue | minimal")
      ->check(CLI::IsMember({"equal_revenue", "minimal"}));
  segment_cmd->add_option("--dump-segments", segment_dump, "write segments to this file");

  // robust
  MarketArgs robust_m;
  std::string robust_lambda = "1/2", robust_tau, robust_dump;
  auto* robust_cmd = app.add_subcommand("robust", "hazard strategy and its worst-case regret");
  robust_m.add_to(robust_cmd);
  robust_cmd->add_option("--lambda", robust_lambda, "regret weight in (0,1)");
  robust_cmd->add_option("--tau", robust_tau, "known upper bound on the seller value");
  robust_cmd->add_option("--strategy-dump", robust_dump, "write strategy pieces as CSV");

  // regret
  MarketArgs regret_m;
  std::string regret_s;
  std::size_t regret_draws = 0;
  std::uint64_t regret_seed = 1;
  unsigned regret_jobs = 1;
  auto* regret_cmd = app.add_subcommand("regret", "regret of the hazard strategy at given seller values");
  regret_m.add_to(regret_cmd);
  regret_cmd->add_option("--s", regret_s, "seller values (list)")->required();
  regret_cmd->add_option("--draws", regret_draws, "Monte Carlo draws (0 = closed form only)");
  regret_cmd->add_option("--seed", regret_seed, "Monte Carlo seed");
  regret_cmd->add_option("--jobs", regret_jobs, "worker threads (0 = all cores)");

  // game-lp
  MarketArgs lp_m;
  std::size_t lp_res = 20;
  std::string lp_h = "1/20", lp_out;
  unsigned lp_jobs = 1;
  auto* lp_cmd = app.add_subcommand("game-lp", "discretized regret game solved by LP");
  lp_cmd->set_help_flag("--help", "print this help");  // frees -h for the step flag
  lp_m.add_to(lp_cmd);
  lp_cmd->add_option("--m", lp_res, "posterior grid resolution");
  lp_cmd->add_option("--h", lp_h, "adversary grid step");
  lp_cmd->add_option("--out", lp_out, "CSV with value, support report and adversary strategy");
  lp_cmd->add_option("--jobs", lp_jobs, "worker threads for payoff assembly (0 = all cores)");

  // binary-bound
  std::string bb_b1, bb_b2, bb_mu, bb_curves;
  std::size_t bb_res = 1000;
  auto* bb_cmd = app.add_subcommand("binary-bound", "tight regret bound for two buyer types");
  bb_cmd->add_option("--b1", bb_b1, "low buyer value")->required();
  bb_cmd->add_option("--b2", bb_b2, "high buyer value")->required();
  bb_cmd->add_option("--mu", bb_mu, "mass of the low type")->required();
  bb_cmd->add_option("--emit-curves", bb_curves, "write p,u,cav CSV for the worst-case adversary");
  bb_cmd->add_option("--resolution", bb_res, "grid intervals for --emit-curves");

  // experiment
  std::string ex_config, ex_family = "pareto", ex_params, ex_out, ex_mode = "fixed_location";
  std::size_t ex_n = 15;
  double ex_eps = 1e-3, ex_loc = 1.0;
  unsigned ex_jobs = 0;
  auto* ex_cmd = app.add_subcommand("experiment", "expected optimal vs robust surplus sweep");
  ex_cmd->add_option("--config", ex_config, "sweep config file");
  ex_cmd->add_option("--family", ex_family, "pareto | lognormal")->check(CLI::IsMember({"pareto", "lognormal"}));
  ex_cmd->add_option("--params", ex_params, "shape parameters (list)");
  ex_cmd->add_option("--n", ex_n, "support size");
  ex_cmd->add_option("--epsilon", ex_eps, "tail cut");
  ex_cmd->add_option("--location", ex_loc, "lognormal location");
  ex_cmd->add_option("--mode", ex_mode, "fixed_location | fixed_mean")
      ->check(CLI::IsMember({"fixed_location", "fixed_mean"}));
  ex_cmd->add_option("--out", ex_out, "CSV output path (default stdout)");
  ex_cmd->add_option("--jobs", ex_jobs, "worker threads (0 = all cores)");

  // verify
  MarketArgs verify_m;
  std::string verify_file, verify_sd;
  auto* verify_cmd = app.add_subcommand("verify", "run the invariant checks on an instance");
  verify_m.add_to(verify_cmd);
  verify_cmd->add_option("instance", verify_file, "instance file (same as --grid)");
  verify_cmd->add_option("--sd", verify_sd, "seller value the instance's segments are checked against");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  try {
    if (*surplus_cmd) {
      return with_market(surplus_m, [&]<class T>(const InstanceFile<T>& inst) {
        const auto& grid = *inst.grid;
        for (const auto& s : parse_list<T>(surplus_s)) out << format_number(optimal_surplus(grid, s)) << '\n';
        if (surplus_s.empty() || surplus_profile_flag) {
          const auto prof = surplus_profile(grid);
          out << "# s U*(s)\n";
          for (std::size_t k = 0; k < prof.knots().size(); ++k)
            out << format_number(prof.knots()[k]) << ' ' << format_number(prof.values()[k]) << '\n';
        }
        return kExitOk;
      });
    }

    if (*segment_cmd) {
      return with_market(segment_m, [&]<class T>(const InstanceFile<T>& inst) {
        const auto& grid = *inst.grid;
        const T sd = parse_number<T>(segment_sd);
        const auto style = segment_style == "minimal" ? SegmentationStyle::minimal : SegmentationStyle::equal_revenue;
        const auto sigma = greedy_optimal_segmentation(grid, sd, style);
        write_segmentation(out, sigma, 12);
        out << "# surplus " << format_number(segmentation_surplus(grid, sigma, sd)) << '\n';
        out << "# revenue " << format_number(segmentation_revenue(grid, sigma, sd)) << '\n';
        if (!segment_dump.empty()) {
          auto f = open_out(segment_dump);
          write_grid(f, grid);
          write_segmentation(f, sigma);
        }
        return kExitOk;
      });
    }

    if (*robust_cmd) {
      return with_market(robust_m, [&]<class T>(const InstanceFile<T>& inst) {
        const auto prof = surplus_profile(*inst.grid);
        const double lambda = parse_number<double>(robust_lambda);
        const auto h = hazard_strategy(prof, lambda, parse_optional(robust_tau));
        out << "U0 " << format_number(prof.initial_value()) << '\n';
        out << "s_star " << format_number(h.s_star()) << '\n';
        out << "delta " << format_number(h.delta) << '\n';
        if (h.tau) out << "tau " << format_number(*h.tau) << '\n';
        out << "atom " << format_number(h.atom) << '\n';
        for (const auto& p : h.pieces)
          out << "piece " << format_number(p.lo) << ' ' << format_number(p.hi) << " density "
              << format_number(-h.weighting * p.slope) << "/(" << format_number(p.intercept) << " + "
              << format_number(p.slope) << "*y)\n";
        if (lambda == 0.5) {
          out << "worst_case_regret " << format_number(worst_case_regret(h)) << '\n';
          out << "bound " << format_number(h.tau ? restricted_value(prof, *h.tau) : prof.initial_value() / std::exp(1.0))
              << '\n';
        } else {
          out << "worst_case_weighted_regret " << format_number(worst_case_weighted_regret(h, lambda)) << '\n';
          out << "bound " << format_number(generalized_value(prof, lambda)) << '\n';
        }
        if (!robust_dump.empty()) {
          auto f = open_out(robust_dump);
          write_strategy_csv(f, h);
        }
        return kExitOk;
      });
    }

    if (*regret_cmd) {
      auto inst = regret_m.load<double>();
      const auto& grid = *inst.grid;
      const auto prof = surplus_profile(grid);
      const auto h = hazard_strategy(prof);
      const auto ss = parse_list<double>(regret_s);
      if (regret_draws == 0) {
        out << "s,regret\n";
        for (double s : ss) out << format_number(s) << ',' << format_number(hazard_regret(h, s)) << '\n';
        return kExitOk;
      }
      const auto est = monte_carlo_regret(grid, h, ss, regret_draws, regret_seed, resolve_jobs(regret_jobs));
      out << "s,regret,estimate,std_error\n";
      for (std::size_t j = 0; j < ss.size(); ++j)
        out << format_number(ss[j]) << ',' << format_number(hazard_regret(h, ss[j])) << ','
            << format_number(est[j].mean) << ',' << format_number(est[j].std_error) << '\n';
      return kExitOk;
    }

    if (*lp_cmd) {
      return with_market(lp_m, [&]<class T>(const InstanceFile<T>& inst) {
        const auto& grid = *inst.grid;
        const auto posts = posterior_grid(grid.size(), lp_res);
        const auto lp = build_regret_lp(grid, posts, parse_number<T>(lp_h), resolve_jobs(lp_jobs));
        const auto sol = solve_regret_lp(lp);
        if (sol.status != LpStatus::optimal) throw CheckFailure("LP " + to_string(sol.status));
        const auto rep = support_report(sol.weights, lp.posteriors);
        out << "value " << format_number(sol.value) << '\n';
        out << "gap " << format_number(sol.gap) << '\n';
        out << "plausibility_residual " << format_number(sol.plausibility_residual) << '\n';
        out << "non_bbm_mass " << format_number(rep.non_bbm_mass) << '\n';
        for (const auto& g : rep.groups)
          out << "support " << g.pattern << ' ' << format_number(g.mass) << ' ' << g.count << (g.gapped ? " gapped" : "")
              << '\n';
        if (!lp_out.empty()) {
          auto f = open_out(lp_out);
          f << "section,key,value\n";
          f << "game,value," << format_number(sol.value) << '\n';
          f << "game,gap," << format_number(sol.gap) << '\n';
          f << "game,non_bbm_mass," << format_number(rep.non_bbm_mass) << '\n';
          for (const auto& g : rep.groups) f << "support," << g.pattern << ',' << format_number(g.mass) << '\n';
          for (std::size_t j = 0; j < lp.adversary.size(); ++j)
            if (sol.adversary[j] > 0.0)
              f << "adversary," << format_number(lp.adversary[j]) << ',' << format_number(sol.adversary[j]) << '\n';
        }
        const double tol = 1e-7 * (1.0 + std::abs(sol.value));
        if (sol.gap > tol || sol.plausibility_residual > 1e-9) throw CheckFailure("LP certificate check failed");
        return kExitOk;
      });
    }

    if (*bb_cmd) {
      const auto nb = normalize_binary(parse_number<double>(bb_b1), parse_number<double>(bb_b2),
                                       parse_number<double>(bb_mu));
      const auto best = best_beta(nb.market);
      const double upper = worst_case_regret(hazard_strategy(binary_profile(nb.market)));
      out << "beta_star " << format_number(nb.from_unit(best.beta)) << '\n';
      out << "lower_bound " << format_number(nb.from_unit(best.lower_bound)) << '\n';
      out << "upper_bound " << format_number(nb.from_unit(upper)) << '\n';
      const double gap = std::abs(best.lower_bound - upper);
      out << "tightness_gap " << format_number(nb.from_unit(gap)) << '\n';
      if (!bb_curves.empty()) {
        const auto u = u_beta_closed_form(nb.market, best.beta);
        const auto cav = concavify(u, bb_res);
        auto f = open_out(bb_curves);
        f << "p,u,cav\n";
        for (std::size_t i = 0; i <= bb_res; ++i) {
          const double p = i == bb_res ? 1.0 : static_cast<double>(i) / static_cast<double>(bb_res);
          f << format_number(p) << ',' << format_number(nb.from_unit(u(p))) << ','
            << format_number(nb.from_unit(cav(p))) << '\n';
        }
      }
      if (gap > 1e-9 * std::max(1.0, upper)) throw CheckFailure("lower and upper bound differ");
      return kExitOk;
    }

    if (*ex_cmd) {
      SweepConfig cfg;
      if (!ex_config.empty()) {
        std::ifstream in(ex_config);
        if (!in) throw ValidationError("cannot open '" + ex_config + "'");
        cfg = read_sweep_config(in);
      } else {
        cfg.family = parse_family(ex_family);
        cfg.parameters = parse_list<double>(ex_params);
        cfg.n = ex_n;
        cfg.epsilon = ex_eps;
        cfg.location = ex_loc;
        cfg.mode = ex_mode == "fixed_mean" ? LognormalMode::fixed_mean : LognormalMode::fixed_location;
      }
      if (ex_cmd->count("--jobs") || ex_config.empty()) cfg.jobs = resolve_jobs(ex_jobs);
      if (!ex_out.empty()) cfg.output = ex_out;
      const auto rows = run_sweep(cfg);
      for (const auto& r : rows)
        if (r.expected_diff < -1e-12 || r.expected_diff > r.bound + 1e-9)
          throw CheckFailure("sweep row at " + format_number(r.param) + " violates the regret bound");
      if (cfg.output.empty()) {
        write_sweep_csv(out, rows);
      } else {
        auto f = open_out(cfg.output);
        write_sweep_csv(f, rows);
      }
      return kExitOk;
    }

    if (*verify_cmd) {
      if (!verify_file.empty()) verify_m.grid_file = verify_file;
      return with_market(verify_m, [&]<class T>(const InstanceFile<T>& inst) {
        const auto& grid = *inst.grid;
        bool all = true;
        auto report = [&](const std::string& name, bool ok) {
          out << (ok ? "PASS " : "FAIL ") << name << '\n';
          all = all && ok;
        };
        const auto prof = surplus_profile(grid);
        bool mono = true;
        for (std::size_t k = 1; k < prof.values().size(); ++k) mono = mono && prof.values()[k] <= prof.values()[k - 1];
        report("profile weakly decreasing", mono);
        report("profile vanishes at b_{n-1}", prof(to_double(grid.zero_point())) == 0.0);

        bool greedy_ok = true;
        for (double x : prof.knots()) {
          const T sd = from_double<T>(x);
          for (auto style : {SegmentationStyle::minimal, SegmentationStyle::equal_revenue}) {
            try {
              const auto sigma = greedy_optimal_segmentation(grid, sd, style);
              greedy_ok = greedy_ok && verify_optimal(grid, sigma, sd).optimal();
            } catch (const CheckFailure&) {
              greedy_ok = false;
            }
          }
        }
        report("greedy segmentation optimal at every kink", greedy_ok);

        const auto h = hazard_strategy(prof);
        const double bound = prof.initial_value() / std::exp(1.0);
        report("hazard mass sums to 1", std::abs(h.continuous_mass() + h.atom - 1.0) <= 1e-9);
        bool plateau = true;
        for (int i = 0; i <= 20; ++i) {
          const double s = h.delta * i / 20.0;
          plateau = plateau && std::abs(hazard_regret(h, s) - bound) <= 1e-9;
        }
        report("regret constant on [0, delta]", plateau);
        report("worst-case regret equals U*(0)/e", std::abs(worst_case_regret(h) - bound) <= 1e-9);

        if (!inst.segments.empty()) {
          if (verify_sd.empty()) throw ValidationError("instance has segments; pass --sd to check them");
          const T sd = parse_number<T>(verify_sd);
          const auto r = verify_optimal(grid, inst.segments, sd);
          report("segments Bayes plausible", r.plausible);
          report("segments buyer-optimal", r.surplus_optimal);
          report("segments give monopoly revenue", r.revenue_monopoly);
        }
        return all ? kExitOk : kExitCheck;
      });
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const CheckFailure& e) {
    err << "check failed: " << e.what() << '\n';
    return kExitCheck;
  }
  return kExitInvalid;
}

}  // namespace robustseg::cli
