#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace socdispatch {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Sparse row: (column, coefficient) pairs with distinct columns.
using LpRow = std::vector<std::pair<int, double>>;

// minimize c^T x  subject to  A x <= b,  E x = d,  l <= x <= u.
// Bounds may be +-infinity.
struct LinearProgram {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<LpRow> ineq_rows;
  std::vector<double> ineq_rhs;
  std::vector<LpRow> eq_rows;
  std::vector<double> eq_rhs;

  int add_variable(double lb, double ub, double cost);
  void add_ineq(LpRow row, double rhs);
  void add_eq(LpRow row, double rhs);

  int num_ineq() const { return static_cast<int>(ineq_rhs.size()); }
  int num_eq() const { return static_cast<int>(eq_rhs.size()); }
};

enum class LpStatus { optimal, infeasible, unbounded };

// Dual sign conventions, fixed so the duals are marginal values:
//   eq_duals[r]   = d(optimal value)/d(eq_rhs[r]), free sign;
//   ineq_duals[r] = -d(optimal value)/d(ineq_rhs[r]), >= 0 at optimum.
// reduced_costs[j] is the objective derivative of moving x_j off its bound
// (>= 0 at lower, <= 0 at upper, ~0 for basic variables).
// dual_objective = -b^T ineq_duals + d^T eq_duals
//                + sum_{j at lower} reduced_costs[j]*l_j
//                + sum_{j at upper} reduced_costs[j]*u_j,
// and equals the primal objective up to the certified gap.
struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::vector<double> ineq_duals;
  std::vector<double> eq_duals;
  std::vector<double> reduced_costs;
  double dual_objective = 0.0;
  int iterations = 0;
};

struct SimplexOptions {
  double feas_tol = 1e-8;    // primal feasibility and verification tolerance
  double opt_tol = 1e-9;     // reduced-cost optimality tolerance
  double pivot_tol = 1e-10;  // smallest pivot magnitude accepted
  int max_iterations = 200000;
  int bland_after = 2000;    // switch to Bland's rule after this many pivots
  int refactor_every = 64;
};

// Dense two-phase bounded-variable simplex with Dantzig pricing and a
// smallest-index (Bland) anti-cycling fallback. Deterministic: identical
// inputs produce bit-identical solutions. When the returned status is
// optimal, the solution has been verified against primal feasibility, dual
// feasibility, complementary slackness and the duality gap; verification
// failure raises numerical_error instead of returning a wrong "optimal".
LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options = {});

// Fixed-format text dump for external cross-checking. One line per
// objective term, row and bound, in index order.
std::string dump_lp(const LinearProgram& lp);

}  // namespace socdispatch
