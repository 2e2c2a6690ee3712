#pragma once

// Dense two-phase tableau simplex for
//
//   minimize c'x  subject to  A x = b,  x >= 0.
//
// Pivoting follows Bland's rule (lowest eligible index enters, lowest basic
// index leaves on ratio ties), so the method terminates on degenerate
// problems. Artificial columns are kept through phase 2 and never re-enter;
// their reduced costs give the dual solution.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "robustseg/number.hpp"

namespace robustseg {

struct LinearProgram {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;  ///< row-major rows x cols
  std::vector<double> b;
  std::vector<double> c;

  LinearProgram() = default;
  LinearProgram(std::size_t r, std::size_t n) : rows(r), cols(n), a(r * n, 0.0), b(r, 0.0), c(n, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

inline std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration limit";
  }
  return "unknown";
}

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  double value = 0.0;            ///< c'x
  double dual_value = 0.0;       ///< b'y
  std::vector<double> x;
  std::vector<double> y;         ///< one per row, A'y <= c at optimum
  double primal_residual = 0.0;  ///< max |Ax - b|, including negativity of x
  double dual_infeasibility = 0.0;  ///< max (A'y - c)_j
  std::size_t iterations = 0;

  double gap() const { return std::abs(value - dual_value); }
};

struct SimplexOptions {
  double pivot_tol = 1e-9;
  double cost_tol = 1e-10;
  std::size_t max_iterations = 1'000'000;
};

namespace detail {

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : rows_(rows), width_(cols + 1), t_((rows + 1) * (cols + 1), 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return t_[i * width_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return t_[i * width_ + j]; }
  double& rhs(std::size_t i) { return t_[i * width_ + width_ - 1]; }
  double& cost(std::size_t j) { return t_[rows_ * width_ + j]; }

  void pivot(std::size_t r, std::size_t col) {
    double* prow = &t_[r * width_];
    const double inv = 1.0 / prow[col];
    for (std::size_t j = 0; j < width_; ++j) prow[j] *= inv;
    prow[col] = 1.0;
    for (std::size_t i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      double* row = &t_[i * width_];
      const double f = row[col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) row[j] -= f * prow[j];
      row[col] = 0.0;
    }
  }

 private:
  std::size_t rows_, width_;
  std::vector<double> t_;
};

}  // namespace detail

inline LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opt = {}) {
  const std::size_t m = lp.rows, n = lp.cols;
  if (lp.a.size() != m * n || lp.b.size() != m || lp.c.size() != n) throw ValidationError("LP dimensions inconsistent");
  for (double v : lp.a)
    if (!std::isfinite(v)) throw ValidationError("LP has non-finite coefficients");

  const std::size_t total = n + m;  // real columns then artificials
  detail::Tableau t(m, total);
  std::vector<double> sign(m, 1.0);
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (lp.b[i] < 0.0) sign[i] = -1.0;
    for (std::size_t j = 0; j < n; ++j) t(i, j) = sign[i] * lp.at(i, j);
    t(i, n + i) = 1.0;
    t.rhs(i) = sign[i] * lp.b[i];
    basis[i] = n + i;
  }

  LpSolution sol;
  auto run = [&](std::size_t enter_limit) -> LpStatus {
    for (;;) {
      if (sol.iterations >= opt.max_iterations) return LpStatus::iteration_limit;
      std::size_t enter = enter_limit;
      for (std::size_t j = 0; j < enter_limit; ++j)
        if (t.cost(j) < -opt.cost_tol) {
          enter = j;
          break;
        }
      if (enter == enter_limit) return LpStatus::optimal;
      std::size_t leave = m;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        const double a = t(i, enter);
        if (a <= opt.pivot_tol) continue;
        const double ratio = t.rhs(i) / a;
        if (leave == m || ratio < best - 1e-12) {
          best = ratio;
          leave = i;
        } else if (ratio <= best + 1e-12 && basis[i] < basis[leave]) {
          best = std::min(best, ratio);
          leave = i;
        }
      }
      if (leave == m) return LpStatus::unbounded;
      t.pivot(leave, enter);
      basis[leave] = enter;
      ++sol.iterations;
    }
  };

  // Phase 1: minimize the sum of artificials.
  for (std::size_t j = 0; j <= total; ++j) {
    double s = 0.0;
    if (j < n) for (std::size_t i = 0; i < m; ++i) s -= t(i, j);
    else if (j == total) for (std::size_t i = 0; i < m; ++i) s -= t.rhs(i);
    t.cost(j) = s;
  }
  if (const auto st = run(n); st == LpStatus::iteration_limit) {
    sol.status = st;
    return sol;
  }
  double infeas = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] >= n) infeas += t.rhs(i);
  double bscale = 1.0;
  for (double v : lp.b) bscale = std::max(bscale, std::abs(v));
  if (infeas > 1e-9 * bscale) {
    sol.status = LpStatus::infeasible;
    return sol;
  }
  // Drive zero-level artificials out of the basis where a real column allows it.
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(t(i, j)) > opt.pivot_tol) {
        t.pivot(i, j);
        basis[i] = j;
        break;
      }
  }

  // Phase 2 objective row: reduced costs c_j - c_B' B^{-1} a_j.
  auto cost_of = [&](std::size_t j) { return j < n ? lp.c[j] : 0.0; };
  for (std::size_t j = 0; j <= total; ++j) {
    double d = j < total ? cost_of(j) : 0.0;
    for (std::size_t i = 0; i < m; ++i) d -= cost_of(basis[i]) * (j < total ? t(i, j) : t.rhs(i));
    t.cost(j) = d;
  }
  sol.status = run(n);
  if (sol.status != LpStatus::optimal) return sol;

  sol.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) sol.x[basis[i]] = t.rhs(i);
  sol.y.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) sol.y[i] = -sign[i] * t.cost(n + i);

  sol.value = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.value += lp.c[j] * sol.x[j];
  sol.dual_value = 0.0;
  for (std::size_t i = 0; i < m; ++i) sol.dual_value += lp.b[i] * sol.y[i];
  for (std::size_t i = 0; i < m; ++i) {
    double ax = 0.0;
    for (std::size_t j = 0; j < n; ++j) ax += lp.at(i, j) * sol.x[j];
    sol.primal_residual = std::max(sol.primal_residual, std::abs(ax - lp.b[i]));
  }
  for (double v : sol.x) sol.primal_residual = std::max(sol.primal_residual, -v);
  for (std::size_t j = 0; j < n; ++j) {
    double aty = 0.0;
    for (std::size_t i = 0; i < m; ++i) aty += lp.at(i, j) * sol.y[i];
    sol.dual_infeasibility = std::max(sol.dual_infeasibility, aty - lp.c[j]);
  }
  return sol;
}

}  // namespace robustseg
