#include "socdispatch/edcr_fit.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "socdispatch/errors.hpp"
#include "util.hpp"

namespace socdispatch {

using detail::fmt;
using json = nlohmann::json;

namespace {

// Dense Gaussian elimination with partial pivoting; a is modified in place.
std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int p = 0; p < n; ++p) {
    int best = p;
    for (int i = p + 1; i < n; ++i)
      if (std::abs(a[i][p]) > std::abs(a[best][p])) best = i;
    if (std::abs(a[best][p]) < 1e-12)
      throw numerical_error("fit_edcr: singular KKT system");
    std::swap(a[p], a[best]);
    std::swap(b[p], b[best]);
    for (int i = p + 1; i < n; ++i) {
      const double f = a[i][p] / a[p][p];
      if (f == 0.0) continue;
      for (int j = p; j < n; ++j) a[i][j] -= f * a[p][j];
      b[i] -= f * b[p];
    }
  }
  std::vector<double> x(n, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double acc = b[i];
    for (int j = i + 1; j < n; ++j) acc -= a[i][j] * x[j];
    x[i] = acc / a[i][i];
  }
  return x;
}

struct Quadratic {
  // 1/2 z^T H z + g^T z, H strictly positive definite.
  std::vector<std::vector<double>> H;
  std::vector<double> g;
};

// Primal active-set method for min 1/2 z^T H z + g^T z s.t. C z <= e.
// Strict convexity makes every equality-constrained subproblem uniquely
// solvable, so the loop terminates. Constraint rows must be independent.
std::vector<double> active_set_qp(const Quadratic& q,
                                  const std::vector<std::vector<double>>& C,
                                  const std::vector<double>& e,
                                  std::vector<double> z) {
  const int n = static_cast<int>(q.g.size());
  const int m = static_cast<int>(e.size());
  std::vector<int> working;

  auto constraint_value = [&](int r, const std::vector<double>& v) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += C[r][j] * v[j];
    return acc;
  };

  const int max_outer = 50 + 10 * (n + m);
  for (int outer = 0; outer < max_outer; ++outer) {
    // Equality-constrained step on the working set via the KKT system.
    const int w = static_cast<int>(working.size());
    std::vector<std::vector<double>> kkt(n + w, std::vector<double>(n + w, 0.0));
    std::vector<double> rhs(n + w, 0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) kkt[i][j] = q.H[i][j];
      rhs[i] = -q.g[i];
    }
    for (int r = 0; r < w; ++r) {
      for (int j = 0; j < n; ++j) {
        kkt[n + r][j] = C[working[r]][j];
        kkt[j][n + r] = C[working[r]][j];
      }
      rhs[n + r] = e[working[r]];
    }
    const std::vector<double> sol = solve_dense(std::move(kkt), std::move(rhs));
    std::vector<double> candidate(sol.begin(), sol.begin() + n);

    // Feasible candidate: inspect multipliers, drop the most negative.
    bool feasible = true;
    for (int r = 0; r < m && feasible; ++r) {
      if (std::find(working.begin(), working.end(), r) != working.end()) continue;
      if (constraint_value(r, candidate) > e[r] + 1e-10 * (1.0 + std::abs(e[r])))
        feasible = false;
    }
    if (feasible) {
      int drop = -1;
      double most_negative = -1e-10;
      for (int r = 0; r < w; ++r) {
        const double nu = sol[n + r];
        if (nu < most_negative) {
          most_negative = nu;
          drop = r;
        }
      }
      if (drop < 0) return candidate;
      working.erase(working.begin() + drop);
      z = std::move(candidate);
      continue;
    }

    // Blocked: walk toward the candidate until the first constraint bites.
    double alpha = 1.0;
    int blocking = -1;
    for (int r = 0; r < m; ++r) {
      if (std::find(working.begin(), working.end(), r) != working.end()) continue;
      double step = 0.0;
      for (int j = 0; j < n; ++j) step += C[r][j] * (candidate[j] - z[j]);
      if (step <= 1e-12) continue;
      const double room = e[r] - constraint_value(r, z);
      const double limit = std::max(room, 0.0) / step;
      if (limit < alpha) {
        alpha = limit;
        blocking = r;
      }
    }
    for (int j = 0; j < n; ++j) z[j] += alpha * (candidate[j] - z[j]);
    if (blocking >= 0)
      working.push_back(blocking);
    else
      return z;  // full step was feasible after all
  }
  throw numerical_error("fit_edcr: active-set iteration limit");
}

}  // namespace

BidCurve fit_edcr(const BidCurve& true_curve, double eta_c, double eta_d,
                  const FitSpec& spec) {
  StorageAsset probe = make_asset(true_curve, eta_c, eta_d, 0.0, 0.0,
                                  true_curve.boundaries.empty() ? 0.0
                                                                : true_curve.boundaries.front());
  ValidationReport report = validate_bid(probe);
  if (!report.ok())
    throw input_error("fit_edcr: input curve invalid: " + report.violations.front());

  const int K = true_curve.num_segments();
  auto weights = [&](const std::vector<double>& w, const char* name) {
    if (w.empty()) return std::vector<double>(K, 1.0);
    if (static_cast<int>(w.size()) != K)
      throw input_error(std::string("fit_edcr: ") + name + " must have K=" +
                        std::to_string(K) + " entries");
    for (double v : w)
      if (!(v > 0.0)) throw input_error(std::string("fit_edcr: ") + name + " must be positive");
    return w;
  };
  const std::vector<double> wc = weights(spec.charge_weights, "charge_weights");
  const std::vector<double> wd = weights(spec.discharge_weights, "discharge_weights");
  if (!(spec.spread_margin > 0.0) || !std::isfinite(spec.spread_margin))
    throw input_error("fit_edcr: spread_margin must be positive");

  // Variables z = (a, D_1..D_K): a is the fitted leading charge marginal and
  // D the fitted discharge marginals; the EDCR equalities eliminate the
  // remaining charge marginals as a - ratio*(D_1 - D_k).
  const double ratio = eta_c * eta_d;
  const int n = K + 1;
  Quadratic q;
  q.H.assign(n, std::vector<double>(n, 0.0));
  q.g.assign(n, 0.0);
  auto add_residual = [&](const std::vector<double>& p, double target, double weight) {
    for (int i = 0; i < n; ++i) {
      if (p[i] == 0.0) continue;
      q.g[i] -= 2.0 * weight * target * p[i];
      for (int j = 0; j < n; ++j) q.H[i][j] += 2.0 * weight * p[i] * p[j];
    }
  };
  for (int k = 1; k <= K; ++k) {
    std::vector<double> p(n, 0.0);
    p[0] = 1.0;
    if (k > 1) {
      p[1] -= ratio;
      p[k] += ratio;
    }
    add_residual(p, true_curve.charge_benefits[k - 1], wc[k - 1]);
  }
  for (int k = 1; k <= K; ++k) {
    std::vector<double> p(n, 0.0);
    p[k] = 1.0;
    add_residual(p, true_curve.discharge_costs[k - 1], wd[k - 1]);
  }

  // Constraints: D nonincreasing, plus the margined spread condition
  // a/eta_c <= eta_d*D_K - margin.
  std::vector<std::vector<double>> C;
  std::vector<double> e;
  for (int k = 1; k < K; ++k) {
    std::vector<double> row(n, 0.0);
    row[k + 1] = 1.0;
    row[k] = -1.0;
    C.push_back(std::move(row));
    e.push_back(0.0);
  }
  {
    std::vector<double> row(n, 0.0);
    row[0] = 1.0 / eta_c;
    row[K] = -eta_d;
    C.push_back(std::move(row));
    e.push_back(-spec.spread_margin);
  }

  // Feasible start: the input discharge curve is already nonincreasing; pull
  // the leading charge marginal under the spread limit if needed.
  std::vector<double> z(n, 0.0);
  for (int k = 1; k <= K; ++k) z[k] = true_curve.discharge_costs[k - 1];
  z[0] = std::min(true_curve.charge_benefits.front(),
                  eta_c * (eta_d * z[K] - spec.spread_margin));

  const std::vector<double> fitted = active_set_qp(q, C, e, std::move(z));

  BidCurve out;
  out.boundaries = true_curve.boundaries;
  out.discharge_costs.assign(fitted.begin() + 1, fitted.end());
  out.charge_benefits.resize(K);
  for (int k = 1; k <= K; ++k)
    out.charge_benefits[k - 1] = fitted[0] - ratio * (fitted[1] - fitted[k]);
  return out;
}

FitReport fit_report(const BidCurve& true_curve, const BidCurve& fitted,
                     double eta_c, double eta_d, const FitSpec& spec) {
  const int K = true_curve.num_segments();
  FitReport report;
  std::vector<double> wc = spec.charge_weights.empty() ? std::vector<double>(K, 1.0)
                                                       : spec.charge_weights;
  std::vector<double> wd = spec.discharge_weights.empty() ? std::vector<double>(K, 1.0)
                                                          : spec.discharge_weights;
  for (int k = 0; k < K; ++k) {
    const double dc = fitted.charge_benefits[k] - true_curve.charge_benefits[k];
    const double dd = fitted.discharge_costs[k] - true_curve.discharge_costs[k];
    report.charge_deviations.push_back(dc);
    report.discharge_deviations.push_back(dd);
    report.objective += wc[k] * dc * dc + wd[k] * dd * dd;
    report.worst_abs_deviation =
        std::max({report.worst_abs_deviation, std::abs(dc), std::abs(dd)});
  }
  StorageAsset probe = make_asset(fitted, eta_c, eta_d, 0.0, 0.0,
                                  fitted.boundaries.empty() ? 0.0 : fitted.boundaries.front());
  report.edcr_residuals = edcr_residuals(probe).residuals;
  return report;
}

std::string fit_report_to_json(const FitReport& report) {
  json j;
  j["charge_deviations"] = report.charge_deviations;
  j["discharge_deviations"] = report.discharge_deviations;
  j["objective"] = report.objective;
  j["worst_abs_deviation"] = report.worst_abs_deviation;
  j["edcr_residuals"] = report.edcr_residuals;
  return j.dump(2);
}

}  // namespace socdispatch
