#include "socdispatch/dispatch.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "socdispatch/cost.hpp"
#include "socdispatch/errors.hpp"
#include "util.hpp"

namespace socdispatch {

using detail::fmt;
using detail::fmt_decimal;
using json = nlohmann::json;

const char* to_string(ExactnessVerdict v) {
  switch (v) {
    case ExactnessVerdict::exact: return "EXACT";
    case ExactnessVerdict::violation: return "VIOLATION";
    case ExactnessVerdict::precondition_unmet: return "PRECONDITION-UNMET";
  }
  return "?";
}

DispatchLp build_dispatch_lp(const Case& c, const DispatchOptions& options) {
  ValidationReport report = validate_case(c);
  if (!report.ok()) {
    std::string msg = "build_dispatch_lp: invalid case:";
    for (const auto& v : report.violations) msg += "\n  - " + v;
    throw input_error(msg);
  }
  for (const auto& [bus, asset] : c.storages) {
    if (!edcr_residuals(asset, options.edcr_tol).is_edcr)
      throw input_error("build_dispatch_lp: storage at bus " + std::to_string(bus + 1) +
                        " does not satisfy the EDCR condition; project the bid with fit-bid "
                        "before dispatching");
  }

  const int T = c.horizon;
  const int M = c.network.num_buses;
  DispatchLp out;
  LinearProgram& lp = out.lp;
  DispatchIndexMap& ix = out.index;

  for (const auto& [bus, gen] : c.generators)
    for (int t = 0; t < T; ++t) {
      std::vector<int> vars;
      vars.reserve(gen.blocks.size());
      for (const auto& block : gen.blocks)
        vars.push_back(lp.add_variable(0.0, block.capacity, block.cost));
      ix.gen_block_vars[{bus, t}] = std::move(vars);
    }

  for (const auto& [bus, asset] : c.storages) {
    for (int t = 0; t < T; ++t)
      ix.charge_var[{bus, t}] = lp.add_variable(0.0, asset.p_charge_max, 0.0);
    for (int t = 0; t < T; ++t)
      ix.discharge_var[{bus, t}] = lp.add_variable(0.0, asset.p_discharge_max, 0.0);
    for (int t = 0; t < T; ++t)
      ix.soc_var[{bus, t}] = lp.add_variable(asset.soc_min, asset.soc_max, 0.0);
    ix.theta_var[bus] = lp.add_variable(-kInf, kInf, 1.0);
  }

  // System balance per interval.
  for (int t = 0; t < T; ++t) {
    LpRow row;
    double rhs = 0.0;
    for (int i = 0; i < M; ++i) rhs += c.demand[i][t];
    for (const auto& [bus, gen] : c.generators)
      for (int v : ix.gen_block_vars[{bus, t}]) row.emplace_back(v, 1.0);
    for (const auto& [bus, asset] : c.storages) {
      row.emplace_back(ix.discharge_var[{bus, t}], 1.0);
      row.emplace_back(ix.charge_var[{bus, t}], -1.0);
    }
    ix.balance_row.push_back(lp.num_eq());
    lp.add_eq(std::move(row), rhs);
  }

  // SoC transitions; the initial SoC enters as data on the first row.
  for (const auto& [bus, asset] : c.storages)
    for (int t = 0; t < T; ++t) {
      LpRow row;
      row.emplace_back(ix.soc_var[{bus, t}], 1.0);
      if (t > 0) row.emplace_back(ix.soc_var[{bus, t - 1}], -1.0);
      row.emplace_back(ix.charge_var[{bus, t}], -asset.eta_c);
      row.emplace_back(ix.discharge_var[{bus, t}], 1.0 / asset.eta_d);
      ix.soc_row[{bus, t}] = lp.num_eq();
      lp.add_eq(std::move(row), t == 0 ? asset.initial_soc : 0.0);
    }

  // Branch limits, demand moved to the right-hand side.
  const auto& S = c.network.shift_factors;
  const int R = c.network.num_branch_rows();
  ix.branch_row.assign(T, {});
  for (int t = 0; t < T; ++t)
    for (int r = 0; r < R; ++r) {
      LpRow row;
      double rhs = c.network.branch_limits[r];
      for (int i = 0; i < M; ++i) rhs += S[r][i] * c.demand[i][t];
      for (const auto& [bus, gen] : c.generators) {
        if (S[r][bus] == 0.0) continue;
        for (int v : ix.gen_block_vars[{bus, t}]) row.emplace_back(v, S[r][bus]);
      }
      for (const auto& [bus, asset] : c.storages) {
        if (S[r][bus] == 0.0) continue;
        row.emplace_back(ix.discharge_var[{bus, t}], S[r][bus]);
        row.emplace_back(ix.charge_var[{bus, t}], -S[r][bus]);
      }
      ix.branch_row[t].push_back(lp.num_ineq());
      lp.add_ineq(std::move(row), rhs);
    }

  // Epigraph cuts: theta_i dominates every affine cut in the horizon totals.
  for (const auto& [bus, asset] : c.storages) {
    const CostCuts cuts = epigraph_cuts(asset.initial_soc, asset);
    for (int j = 1; j <= cuts.size(); ++j) {
      LpRow row;
      row.emplace_back(ix.theta_var[bus], -1.0);
      for (int t = 0; t < T; ++t) {
        row.emplace_back(ix.charge_var[{bus, t}], cuts.charge_coefs[j - 1]);
        row.emplace_back(ix.discharge_var[{bus, t}], cuts.discharge_coefs[j - 1]);
      }
      ix.cut_row[{bus, j}] = lp.num_ineq();
      lp.add_ineq(std::move(row), -cuts.intercepts[j - 1]);
    }
  }

  return out;
}

std::vector<std::vector<double>> compute_lmps(
    const std::vector<double>& lambda, const std::vector<std::vector<double>>& mu,
    const std::vector<std::vector<double>>& shift_factors, int num_buses) {
  const int T = static_cast<int>(lambda.size());
  std::vector<std::vector<double>> lmp(num_buses, std::vector<double>(T, 0.0));
  for (int i = 0; i < num_buses; ++i)
    for (int t = 0; t < T; ++t) {
      double pi = lambda[t];
      for (size_t r = 0; r < shift_factors.size(); ++r)
        pi -= shift_factors[r][i] * mu[t][r];
      lmp[i][t] = pi;
    }
  return lmp;
}

ExactnessReport check_exactness(const DispatchResult& result, double tol) {
  ExactnessReport report;
  report.min_lmp = kInf;
  for (const auto& row : result.lmp)
    for (double v : row) report.min_lmp = std::min(report.min_lmp, v);
  if (!std::isfinite(report.min_lmp)) report.min_lmp = 0.0;

  for (size_t i = 0; i < result.charge.size(); ++i)
    for (size_t t = 0; t < result.charge[i].size(); ++t)
      if (std::min(result.charge[i][t], result.discharge[i][t]) > tol)
        report.simultaneous.emplace_back(static_cast<int>(i), static_cast<int>(t));

  if (report.simultaneous.empty())
    report.verdict = ExactnessVerdict::exact;
  else if (report.min_lmp >= -tol)
    report.verdict = ExactnessVerdict::violation;
  else
    report.verdict = ExactnessVerdict::precondition_unmet;
  return report;
}

DispatchResult solve_dispatch(const Case& c, const DispatchOptions& options) {
  DispatchLp built = build_dispatch_lp(c, options);
  DispatchResult result;
  result.raw = solve_lp(built.lp, options.lp);
  result.status = result.raw.status;
  if (result.status != LpStatus::optimal) return result;

  const int T = c.horizon;
  const int M = c.network.num_buses;
  const auto& x = result.raw.x;
  const DispatchIndexMap& ix = built.index;

  result.gen.assign(M, std::vector<double>(T, 0.0));
  result.charge.assign(M, std::vector<double>(T, 0.0));
  result.discharge.assign(M, std::vector<double>(T, 0.0));
  for (const auto& [key, vars] : ix.gen_block_vars) {
    double sum = 0.0;
    for (int v : vars) sum += x[v];
    result.gen[key.first][key.second] = sum;
  }
  for (const auto& [key, v] : ix.charge_var) result.charge[key.first][key.second] = x[v];
  for (const auto& [key, v] : ix.discharge_var) result.discharge[key.first][key.second] = x[v];

  for (const auto& [bus, asset] : c.storages) {
    std::vector<double> path(T + 1, asset.initial_soc);
    for (int t = 0; t < T; ++t) path[t + 1] = x[ix.soc_var.at({bus, t})];
    result.soc[bus] = std::move(path);
    result.theta[bus] = x[ix.theta_var.at(bus)];
    std::vector<double> duals(T, 0.0);
    for (int t = 0; t < T; ++t) duals[t] = result.raw.eq_duals[ix.soc_row.at({bus, t})];
    result.phi[bus] = std::move(duals);
  }

  result.objective = result.raw.objective;
  result.lambda.resize(T);
  for (int t = 0; t < T; ++t) result.lambda[t] = result.raw.eq_duals[ix.balance_row[t]];
  result.mu.assign(T, std::vector<double>(c.network.num_branch_rows(), 0.0));
  for (int t = 0; t < T; ++t)
    for (int r = 0; r < c.network.num_branch_rows(); ++r)
      result.mu[t][r] = result.raw.ineq_duals[ix.branch_row[t][r]];
  result.lmp = compute_lmps(result.lambda, result.mu, c.network.shift_factors, M);
  result.exactness = check_exactness(result, options.exactness_tol);
  return result;
}

namespace {

json matrix_to_json(const std::vector<std::vector<double>>& m) {
  json rows = json::array();
  for (const auto& r : m) rows.push_back(r);
  return rows;
}

}  // namespace

std::string result_to_json(const DispatchResult& result) {
  json j;
  switch (result.status) {
    case LpStatus::optimal: j["status"] = "optimal"; break;
    case LpStatus::infeasible: j["status"] = "infeasible"; break;
    case LpStatus::unbounded: j["status"] = "unbounded"; break;
  }
  if (result.status != LpStatus::optimal) return j.dump(2);

  j["objective"] = result.objective;
  j["gen"] = matrix_to_json(result.gen);
  j["charge"] = matrix_to_json(result.charge);
  j["discharge"] = matrix_to_json(result.discharge);
  json soc = json::object();
  for (const auto& [bus, path] : result.soc) soc[std::to_string(bus + 1)] = path;
  j["soc"] = soc;
  json theta = json::object();
  for (const auto& [bus, v] : result.theta) theta[std::to_string(bus + 1)] = v;
  j["theta"] = theta;
  j["lambda"] = result.lambda;
  j["mu"] = matrix_to_json(result.mu);
  json phi = json::object();
  for (const auto& [bus, v] : result.phi) phi[std::to_string(bus + 1)] = v;
  j["phi"] = phi;
  j["lmp"] = matrix_to_json(result.lmp);
  json ex;
  ex["min_lmp"] = result.exactness.min_lmp;
  ex["verdict"] = to_string(result.exactness.verdict);
  json pairs = json::array();
  for (const auto& [bus, t] : result.exactness.simultaneous)
    pairs.push_back({bus + 1, t + 1});
  ex["simultaneous"] = pairs;
  j["exactness"] = ex;
  return j.dump(2);
}

std::string schedule_csv(const DispatchResult& result) {
  std::string out = "bus,t,gG,gC,gD,soc\n";
  const int M = static_cast<int>(result.gen.size());
  const int T = M > 0 ? static_cast<int>(result.gen.front().size()) : 0;
  for (int i = 0; i < M; ++i)
    for (int t = 0; t < T; ++t) {
      const auto soc_it = result.soc.find(i);
      const double e = soc_it != result.soc.end() ? soc_it->second[t + 1] : 0.0;
      out += std::to_string(i + 1) + "," + std::to_string(t + 1) + "," +
             fmt_decimal(result.gen[i][t]) + "," + fmt_decimal(result.charge[i][t]) + "," +
             fmt_decimal(result.discharge[i][t]) + "," + fmt_decimal(e) + "\n";
    }
  return out;
}

std::string lmp_csv(const DispatchResult& result) {
  std::string out = "bus,t,pi\n";
  for (size_t i = 0; i < result.lmp.size(); ++i)
    for (size_t t = 0; t < result.lmp[i].size(); ++t)
      out += std::to_string(i + 1) + "," + std::to_string(t + 1) + "," +
             fmt_decimal(result.lmp[i][t]) + "\n";
  return out;
}

}  // namespace socdispatch
