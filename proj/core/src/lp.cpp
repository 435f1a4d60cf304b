#include "socdispatch/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "socdispatch/errors.hpp"
#include "util.hpp"

namespace socdispatch {

using detail::fmt;

int LinearProgram::add_variable(double lb, double ub, double cost) {
  lower.push_back(lb);
  upper.push_back(ub);
  objective.push_back(cost);
  return num_vars++;
}

void LinearProgram::add_ineq(LpRow row, double rhs) {
  ineq_rows.push_back(std::move(row));
  ineq_rhs.push_back(rhs);
}

void LinearProgram::add_eq(LpRow row, double rhs) {
  eq_rows.push_back(std::move(row));
  eq_rhs.push_back(rhs);
}

namespace {

enum class VarState : unsigned char { basic, at_lower, at_upper, free_zero };

void validate_lp(const LinearProgram& lp) {
  const int n = lp.num_vars;
  if (static_cast<int>(lp.objective.size()) != n ||
      static_cast<int>(lp.lower.size()) != n || static_cast<int>(lp.upper.size()) != n)
    throw input_error("lp: objective/bounds sizes do not match num_vars");
  if (lp.ineq_rows.size() != lp.ineq_rhs.size() || lp.eq_rows.size() != lp.eq_rhs.size())
    throw input_error("lp: row/rhs count mismatch");
  for (int j = 0; j < n; ++j) {
    if (std::isnan(lp.objective[j]) || !std::isfinite(lp.objective[j]))
      throw input_error("lp: objective[" + std::to_string(j) + "] must be finite");
    if (std::isnan(lp.lower[j]) || std::isnan(lp.upper[j]))
      throw input_error("lp: NaN bound on x" + std::to_string(j));
    if (lp.lower[j] > lp.upper[j])
      throw input_error("lp: crossed bounds on x" + std::to_string(j) + " (" +
                        fmt(lp.lower[j]) + " > " + fmt(lp.upper[j]) + ")");
  }
  auto check_rows = [n](const std::vector<LpRow>& rows, const std::vector<double>& rhs,
                        const char* kind) {
    for (size_t r = 0; r < rows.size(); ++r) {
      if (!std::isfinite(rhs[r]))
        throw input_error(std::string("lp: ") + kind + " rhs[" + std::to_string(r) +
                          "] must be finite");
      for (const auto& [col, coef] : rows[r]) {
        if (col < 0 || col >= n)
          throw input_error(std::string("lp: ") + kind + " row " + std::to_string(r) +
                            " references unknown column " + std::to_string(col));
        if (!std::isfinite(coef))
          throw input_error(std::string("lp: ") + kind + " row " + std::to_string(r) +
                            " has a non-finite coefficient");
      }
    }
  };
  check_rows(lp.ineq_rows, lp.ineq_rhs, "ineq");
  check_rows(lp.eq_rows, lp.eq_rhs, "eq");
}

// Bounded-variable two-phase simplex on the equality form
//   [A I; E 0] [x; s] + artificials = [b; d],
// with an explicit dense basis inverse, Dantzig pricing and a Bland
// fallback. All loops run in fixed index order, so identical inputs take
// identical pivot paths.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const SimplexOptions& opt) : lp_(lp), opt_(opt) {
    rows_ = lp.num_ineq() + lp.num_eq();
    structural_ = lp.num_vars;
    slack_begin_ = structural_;
    artificial_begin_ = structural_ + lp.num_ineq();
    total_ = artificial_begin_ + rows_;

    col_.assign(total_, std::vector<double>(rows_, 0.0));
    cost_.assign(total_, 0.0);
    lb_.assign(total_, 0.0);
    ub_.assign(total_, kInf);
    rhs_.assign(rows_, 0.0);

    for (int j = 0; j < structural_; ++j) {
      cost_[j] = lp.objective[j];
      lb_[j] = lp.lower[j];
      ub_[j] = lp.upper[j];
    }
    for (int r = 0; r < lp.num_ineq(); ++r) {
      for (const auto& [c, v] : lp.ineq_rows[r]) col_[c][r] += v;
      col_[slack_begin_ + r][r] = 1.0;
      rhs_[r] = lp.ineq_rhs[r];
    }
    for (int r = 0; r < lp.num_eq(); ++r) {
      const int row = lp.num_ineq() + r;
      for (const auto& [c, v] : lp.eq_rows[r]) col_[c][row] += v;
      rhs_[row] = lp.eq_rhs[r];
    }
  }

  LpSolution run() {
    place_nonbasic();
    install_artificial_basis();

    // Phase 1: drive the artificial sum to zero.
    std::vector<double> phase1_cost(total_, 0.0);
    for (int j = artificial_begin_; j < total_; ++j) phase1_cost[j] = 1.0;
    const bool phase1_bounded = iterate(phase1_cost);
    if (!phase1_bounded)
      throw numerical_error("lp: phase-1 unbounded, inconsistent state");
    double infeas = 0.0;
    for (int j = artificial_begin_; j < total_; ++j) infeas += std::abs(value_of(j));
    double rhs_scale = 0.0;
    for (double h : rhs_) rhs_scale = std::max(rhs_scale, std::abs(h));
    if (infeas > opt_.feas_tol * (1.0 + rhs_scale)) {
      LpSolution sol;
      sol.status = LpStatus::infeasible;
      sol.iterations = iterations_;
      return sol;
    }

    expel_artificials();
    for (int j = artificial_begin_; j < total_; ++j) {
      lb_[j] = 0.0;
      ub_[j] = 0.0;
      if (state_[j] != VarState::basic) {
        state_[j] = VarState::at_lower;
        nonbasic_value_[j] = 0.0;
      }
    }

    // Phase 2 on the real objective.
    if (!iterate(cost_)) {
      LpSolution sol;
      sol.status = LpStatus::unbounded;
      sol.iterations = iterations_;
      return sol;
    }

    refactorize();
    return extract(cost_);
  }

 private:
  double value_of(int j) const {
    if (state_[j] == VarState::basic) return xb_[row_of_[j]];
    return nonbasic_value_[j];
  }

  void place_nonbasic() {
    state_.assign(total_, VarState::at_lower);
    nonbasic_value_.assign(total_, 0.0);
    row_of_.assign(total_, -1);
    for (int j = 0; j < artificial_begin_; ++j) {
      if (std::isfinite(lb_[j])) {
        state_[j] = VarState::at_lower;
        nonbasic_value_[j] = lb_[j];
      } else if (std::isfinite(ub_[j])) {
        state_[j] = VarState::at_upper;
        nonbasic_value_[j] = ub_[j];
      } else {
        state_[j] = VarState::free_zero;
        nonbasic_value_[j] = 0.0;
      }
    }
  }

  void install_artificial_basis() {
    basis_.resize(rows_);
    xb_.assign(rows_, 0.0);
    binv_.assign(rows_, std::vector<double>(rows_, 0.0));
    for (int i = 0; i < rows_; ++i) {
      double residual = rhs_[i];
      for (int j = 0; j < artificial_begin_; ++j)
        if (nonbasic_value_[j] != 0.0) residual -= col_[j][i] * nonbasic_value_[j];
      const double sigma = residual >= 0.0 ? 1.0 : -1.0;
      const int a = artificial_begin_ + i;
      col_[a][i] = sigma;
      basis_[i] = a;
      state_[a] = VarState::basic;
      row_of_[a] = i;
      xb_[i] = std::abs(residual);
      binv_[i][i] = sigma;
    }
  }

  // Row duals for a cost vector: y^T = c_B^T B^{-1}.
  std::vector<double> row_duals(const std::vector<double>& cost) const {
    std::vector<double> y(rows_, 0.0);
    for (int i = 0; i < rows_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      const auto& bi = binv_[i];
      for (int r = 0; r < rows_; ++r) y[r] += cb * bi[r];
    }
    return y;
  }

  double reduced_cost(int j, const std::vector<double>& cost,
                      const std::vector<double>& y) const {
    double rc = cost[j];
    const auto& cj = col_[j];
    for (int r = 0; r < rows_; ++r) rc -= cj[r] * y[r];
    return rc;
  }

  // Returns false when the objective is unbounded below.
  bool iterate(const std::vector<double>& cost) {
    while (true) {
      if (iterations_ >= opt_.max_iterations)
        throw numerical_error("lp: iteration limit reached (" +
                              std::to_string(opt_.max_iterations) + ")");
      const bool bland = iterations_ >= opt_.bland_after;
      const std::vector<double> y = row_duals(cost);

      int entering = -1;
      int direction = 0;
      double best_merit = opt_.opt_tol;
      for (int j = 0; j < total_; ++j) {
        const VarState st = state_[j];
        if (st == VarState::basic) continue;
        if (lb_[j] == ub_[j]) continue;  // fixed (includes retired artificials)
        const double rc = reduced_cost(j, cost, y);
        int dir = 0;
        if (st == VarState::at_lower && rc < -opt_.opt_tol) dir = 1;
        else if (st == VarState::at_upper && rc > opt_.opt_tol) dir = -1;
        else if (st == VarState::free_zero && std::abs(rc) > opt_.opt_tol)
          dir = rc < 0.0 ? 1 : -1;
        if (dir == 0) continue;
        if (bland) {
          entering = j;
          direction = dir;
          break;
        }
        if (std::abs(rc) > best_merit) {
          best_merit = std::abs(rc);
          entering = j;
          direction = dir;
        }
      }
      if (entering < 0) return true;  // optimal for this cost vector

      // w = B^{-1} a_entering.
      std::vector<double> w(rows_, 0.0);
      const auto& ce = col_[entering];
      for (int i = 0; i < rows_; ++i) {
        const auto& bi = binv_[i];
        double acc = 0.0;
        for (int r = 0; r < rows_; ++r) acc += bi[r] * ce[r];
        w[i] = acc;
      }

      // Ratio test: blocking basic variable, or the entering variable's own
      // opposite bound.
      double theta = kInf;
      int leaving_row = -1;
      double leaving_coef = 0.0;
      for (int i = 0; i < rows_; ++i) {
        const double coef = direction * w[i];
        if (std::abs(coef) <= opt_.pivot_tol) continue;
        const int k = basis_[i];
        double limit = kInf;
        if (coef > 0.0 && std::isfinite(lb_[k])) limit = (xb_[i] - lb_[k]) / coef;
        else if (coef < 0.0 && std::isfinite(ub_[k])) limit = (ub_[k] - xb_[i]) / (-coef);
        if (limit >= theta) {
          // Tie-break: Bland wants the smallest variable index; otherwise
          // prefer the biggest pivot for stability.
          if (limit > theta || leaving_row < 0) continue;
          const bool take = bland ? basis_[i] < basis_[leaving_row]
                                  : std::abs(coef) > std::abs(leaving_coef);
          if (!take) continue;
        }
        theta = std::max(limit, 0.0);
        leaving_row = i;
        leaving_coef = coef;
      }
      double flip_range = kInf;
      if (std::isfinite(lb_[entering]) && std::isfinite(ub_[entering]))
        flip_range = ub_[entering] - lb_[entering];

      if (std::isfinite(flip_range) && flip_range <= theta) {
        // Bound flip: strictly positive move, no basis change.
        for (int i = 0; i < rows_; ++i) xb_[i] -= direction * flip_range * w[i];
        state_[entering] =
            state_[entering] == VarState::at_lower ? VarState::at_upper : VarState::at_lower;
        nonbasic_value_[entering] =
            state_[entering] == VarState::at_lower ? lb_[entering] : ub_[entering];
        ++iterations_;
        continue;
      }
      if (leaving_row < 0) return false;  // unbounded ray

      pivot(entering, direction, theta, leaving_row, w);
      ++iterations_;
      if (pivots_since_refactor_ >= opt_.refactor_every) refactorize();
    }
  }

  void pivot(int entering, int direction, double theta, int leaving_row,
             const std::vector<double>& w) {
    const int leaving = basis_[leaving_row];
    const double entering_value = nonbasic_value_[entering] + direction * theta;

    for (int i = 0; i < rows_; ++i)
      if (i != leaving_row) xb_[i] -= direction * theta * w[i];

    // Leaving variable exits exactly at the bound it hit.
    const double coef = direction * w[leaving_row];
    if (coef > 0.0) {
      state_[leaving] = VarState::at_lower;
      nonbasic_value_[leaving] = lb_[leaving];
    } else {
      state_[leaving] = VarState::at_upper;
      nonbasic_value_[leaving] = ub_[leaving];
    }
    row_of_[leaving] = -1;

    basis_[leaving_row] = entering;
    state_[entering] = VarState::basic;
    row_of_[entering] = leaving_row;
    xb_[leaving_row] = entering_value;

    // Product-form update of the inverse.
    const double pivot_value = w[leaving_row];
    auto& prow = binv_[leaving_row];
    for (int r = 0; r < rows_; ++r) prow[r] /= pivot_value;
    for (int i = 0; i < rows_; ++i) {
      if (i == leaving_row || w[i] == 0.0) continue;
      const double f = w[i];
      auto& bi = binv_[i];
      for (int r = 0; r < rows_; ++r) bi[r] -= f * prow[r];
    }
    ++pivots_since_refactor_;
  }

  // Rebuild B^{-1} by Gauss-Jordan with partial pivoting and recompute the
  // basic values from scratch.
  void refactorize() {
    pivots_since_refactor_ = 0;
    if (rows_ == 0) return;
    std::vector<std::vector<double>> a(rows_, std::vector<double>(rows_, 0.0));
    for (int i = 0; i < rows_; ++i)
      for (int r = 0; r < rows_; ++r) a[r][i] = col_[basis_[i]][r];
    std::vector<std::vector<double>> inv(rows_, std::vector<double>(rows_, 0.0));
    for (int i = 0; i < rows_; ++i) inv[i][i] = 1.0;
    for (int p = 0; p < rows_; ++p) {
      int best = p;
      for (int i = p + 1; i < rows_; ++i)
        if (std::abs(a[i][p]) > std::abs(a[best][p])) best = i;
      if (std::abs(a[best][p]) < 1e-12)
        throw numerical_error("lp: singular basis during refactorization");
      std::swap(a[p], a[best]);
      std::swap(inv[p], inv[best]);
      const double d = a[p][p];
      for (int r = 0; r < rows_; ++r) {
        a[p][r] /= d;
        inv[p][r] /= d;
      }
      for (int i = 0; i < rows_; ++i) {
        if (i == p) continue;
        const double f = a[i][p];
        if (f == 0.0) continue;
        for (int r = 0; r < rows_; ++r) {
          a[i][r] -= f * a[p][r];
          inv[i][r] -= f * inv[p][r];
        }
      }
    }
    binv_ = std::move(inv);

    std::vector<double> residual = rhs_;
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == VarState::basic || nonbasic_value_[j] == 0.0) continue;
      const double v = nonbasic_value_[j];
      const auto& cj = col_[j];
      for (int r = 0; r < rows_; ++r) residual[r] -= cj[r] * v;
    }
    for (int i = 0; i < rows_; ++i) {
      double acc = 0.0;
      const auto& bi = binv_[i];
      for (int r = 0; r < rows_; ++r) acc += bi[r] * residual[r];
      xb_[i] = acc;
    }
  }

  // After phase 1, swap zero-valued basic artificials for structural or
  // slack columns wherever the row admits one; rows that admit none are
  // redundant and keep their pinned artificial.
  void expel_artificials() {
    for (int i = 0; i < rows_; ++i) {
      if (basis_[i] < artificial_begin_) continue;
      int candidate = -1;
      double candidate_w = 0.0;
      for (int j = 0; j < artificial_begin_; ++j) {
        if (state_[j] == VarState::basic) continue;
        const auto& bi = binv_[i];
        const auto& cj = col_[j];
        double wi = 0.0;
        for (int r = 0; r < rows_; ++r) wi += bi[r] * cj[r];
        if (std::abs(wi) > 1e-7 && std::abs(wi) > std::abs(candidate_w)) {
          candidate = j;
          candidate_w = wi;
        }
      }
      if (candidate < 0) continue;
      std::vector<double> w(rows_, 0.0);
      const auto& cj = col_[candidate];
      for (int r2 = 0; r2 < rows_; ++r2) {
        const auto& br = binv_[r2];
        double acc = 0.0;
        for (int r = 0; r < rows_; ++r) acc += br[r] * cj[r];
        w[r2] = acc;
      }
      // Degenerate swap: the artificial sits at zero, so nothing moves.
      const double entering_value = nonbasic_value_[candidate];
      const int leaving = basis_[i];
      state_[leaving] = VarState::at_lower;
      nonbasic_value_[leaving] = 0.0;
      row_of_[leaving] = -1;
      basis_[i] = candidate;
      state_[candidate] = VarState::basic;
      row_of_[candidate] = i;

      const double pv = w[i];
      auto& prow = binv_[i];
      for (int r = 0; r < rows_; ++r) prow[r] /= pv;
      for (int r2 = 0; r2 < rows_; ++r2) {
        if (r2 == i || w[r2] == 0.0) continue;
        const double f = w[r2];
        auto& br = binv_[r2];
        for (int r = 0; r < rows_; ++r) br[r] -= f * prow[r];
      }
      xb_[i] = entering_value;
      refactorize();
    }
  }

  LpSolution extract(const std::vector<double>& cost) {
    LpSolution sol;
    sol.status = LpStatus::optimal;
    sol.iterations = iterations_;
    sol.x.resize(structural_);
    for (int j = 0; j < structural_; ++j) sol.x[j] = value_of(j);

    double obj = 0.0;
    for (int j = 0; j < structural_; ++j) obj += lp_.objective[j] * sol.x[j];
    sol.objective = obj;

    const std::vector<double> y = row_duals(cost);
    sol.ineq_duals.resize(lp_.num_ineq());
    for (int r = 0; r < lp_.num_ineq(); ++r) sol.ineq_duals[r] = -y[r];
    sol.eq_duals.resize(lp_.num_eq());
    for (int r = 0; r < lp_.num_eq(); ++r) sol.eq_duals[r] = y[lp_.num_ineq() + r];

    sol.reduced_costs.resize(structural_);
    for (int j = 0; j < structural_; ++j) sol.reduced_costs[j] = reduced_cost(j, cost, y);

    double dual_obj = 0.0;
    for (int r = 0; r < lp_.num_ineq(); ++r) dual_obj -= lp_.ineq_rhs[r] * sol.ineq_duals[r];
    for (int r = 0; r < lp_.num_eq(); ++r) dual_obj += lp_.eq_rhs[r] * sol.eq_duals[r];
    for (int j = 0; j < structural_; ++j) {
      if (state_[j] == VarState::at_lower && std::isfinite(lb_[j]))
        dual_obj += sol.reduced_costs[j] * lb_[j];
      else if (state_[j] == VarState::at_upper && std::isfinite(ub_[j]))
        dual_obj += sol.reduced_costs[j] * ub_[j];
    }
    sol.dual_objective = dual_obj;

    verify(sol);
    return sol;
  }

  // A result only leaves the solver as "optimal" after passing primal
  // feasibility, dual feasibility, complementary slackness and the duality
  // gap at the stated tolerances.
  void verify(const LpSolution& sol) const {
    const double ftol = opt_.feas_tol;
    double cost_scale = 1.0;
    for (int j = 0; j < structural_; ++j)
      cost_scale = std::max(cost_scale, std::abs(lp_.objective[j]));

    for (int j = 0; j < structural_; ++j) {
      const double bound_scale = ftol * (1.0 + std::abs(sol.x[j]));
      if (sol.x[j] < lb_[j] - bound_scale || sol.x[j] > ub_[j] + bound_scale)
        throw numerical_error("lp: verification failed, x" + std::to_string(j) +
                              " violates its bounds");
    }
    for (int r = 0; r < lp_.num_ineq(); ++r) {
      double ax = 0.0;
      for (const auto& [c, v] : lp_.ineq_rows[r]) ax += v * sol.x[c];
      const double slack = lp_.ineq_rhs[r] - ax;
      const double scale = ftol * (1.0 + std::abs(lp_.ineq_rhs[r]));
      if (slack < -scale)
        throw numerical_error("lp: verification failed, ineq row " + std::to_string(r) +
                              " violated by " + fmt(-slack));
      if (sol.ineq_duals[r] < -ftol * (1.0 + std::abs(sol.ineq_duals[r])))
        throw numerical_error("lp: verification failed, negative ineq dual on row " +
                              std::to_string(r));
      if (std::abs(sol.ineq_duals[r] * slack) > ftol * (1.0 + std::abs(sol.objective)))
        throw numerical_error("lp: verification failed, complementary slackness on row " +
                              std::to_string(r));
    }
    for (int r = 0; r < lp_.num_eq(); ++r) {
      double ex = 0.0;
      for (const auto& [c, v] : lp_.eq_rows[r]) ex += v * sol.x[c];
      if (std::abs(ex - lp_.eq_rhs[r]) > ftol * (1.0 + std::abs(lp_.eq_rhs[r])))
        throw numerical_error("lp: verification failed, eq row " + std::to_string(r) +
                              " off by " + fmt(ex - lp_.eq_rhs[r]));
    }
    for (int j = 0; j < structural_; ++j) {
      const double rc = sol.reduced_costs[j];
      const double rc_tol = 1e-7 * cost_scale;
      switch (state_[j]) {
        case VarState::at_lower:
          if (rc < -rc_tol && lb_[j] != ub_[j])
            throw numerical_error("lp: verification failed, dual feasibility at lower bound x" +
                                  std::to_string(j));
          break;
        case VarState::at_upper:
          if (rc > rc_tol && lb_[j] != ub_[j])
            throw numerical_error("lp: verification failed, dual feasibility at upper bound x" +
                                  std::to_string(j));
          break;
        case VarState::free_zero:
          if (std::abs(rc) > rc_tol)
            throw numerical_error("lp: verification failed, nonzero reduced cost on free x" +
                                  std::to_string(j));
          break;
        case VarState::basic:
          break;
      }
    }
    if (std::abs(sol.objective - sol.dual_objective) > ftol * (1.0 + std::abs(sol.objective)))
      throw numerical_error("lp: verification failed, duality gap " +
                            fmt(sol.objective - sol.dual_objective));
  }

  const LinearProgram& lp_;
  SimplexOptions opt_;
  int rows_ = 0, structural_ = 0, slack_begin_ = 0, artificial_begin_ = 0, total_ = 0;
  std::vector<std::vector<double>> col_;
  std::vector<double> cost_, lb_, ub_, rhs_;
  std::vector<int> basis_;
  std::vector<double> xb_;
  std::vector<std::vector<double>> binv_;
  std::vector<VarState> state_;
  std::vector<double> nonbasic_value_;
  std::vector<int> row_of_;
  int iterations_ = 0;
  int pivots_since_refactor_ = 0;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options) {
  validate_lp(lp);
  Simplex solver(lp, options);
  return solver.run();
}

std::string dump_lp(const LinearProgram& lp) {
  std::string out;
  out += "lp vars " + std::to_string(lp.num_vars) + " ineq " + std::to_string(lp.num_ineq()) +
         " eq " + std::to_string(lp.num_eq()) + "\n";
  out += "min";
  for (double c : lp.objective) out += " " + fmt(c);
  out += "\n";
  for (int r = 0; r < lp.num_ineq(); ++r) {
    out += "ineq";
    for (const auto& [c, v] : lp.ineq_rows[r]) out += " x" + std::to_string(c) + ":" + fmt(v);
    out += " <= " + fmt(lp.ineq_rhs[r]) + "\n";
  }
  for (int r = 0; r < lp.num_eq(); ++r) {
    out += "eq";
    for (const auto& [c, v] : lp.eq_rows[r]) out += " x" + std::to_string(c) + ":" + fmt(v);
    out += " = " + fmt(lp.eq_rhs[r]) + "\n";
  }
  for (int j = 0; j < lp.num_vars; ++j)
    out += "bound x" + std::to_string(j) + " [" + fmt(lp.lower[j]) + ", " + fmt(lp.upper[j]) +
           "]\n";
  return out;
}

}  // namespace socdispatch
