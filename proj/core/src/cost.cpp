#include "socdispatch/cost.hpp"

#include <algorithm>
#include <cmath>

#include "socdispatch/errors.hpp"
#include "util.hpp"

namespace socdispatch {

using detail::fmt;

double soc_step(double soc, double g_c, double g_d, const StorageAsset& asset) {
  if (g_c < 0.0 || g_d < 0.0)
    throw input_error("soc_step: negative power (g_c=" + fmt(g_c) + ", g_d=" + fmt(g_d) + ")");
  if (g_c > 0.0 && g_d > 0.0)
    throw input_error("soc_step: simultaneous charge and discharge (g_c=" + fmt(g_c) +
                      ", g_d=" + fmt(g_d) + ")");
  return soc + g_c * asset.eta_c - g_d / asset.eta_d;
}

double stage_cost(double soc, double g_c, double g_d, const StorageAsset& asset) {
  const BidCurve& bid = asset.bid;
  const double lo = bid.boundaries.front();
  const double hi = bid.boundaries.back();
  // Accept roundoff-sized overshoot of the partition ends; anything larger
  // is a genuine range violation.
  const double slack = 1e-9 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
  const double next = soc_step(soc, g_c, g_d, asset);
  if (!(soc >= lo - slack && soc <= hi + slack))
    throw input_error("stage_cost: soc=" + fmt(soc) + " outside partition range [" + fmt(lo) +
                      ", " + fmt(hi) + "]");
  if (!(next >= lo - slack && next <= hi + slack))
    throw input_error("stage_cost: resulting soc=" + fmt(next) +
                      " outside partition range [" + fmt(lo) + ", " + fmt(hi) + "]");
  soc = std::min(std::max(soc, lo), hi);
  const double next_clamped = std::min(std::max(next, lo), hi);
  const int m = segment_index(soc, bid);
  const int n = segment_index(next_clamped, bid);
  const auto& e = bid.boundaries;
  const auto& cc = bid.charge_benefits;
  const auto& cd = bid.discharge_costs;

  // Charging benefit: everything priced at the terminal segment's marginal,
  // plus one correction per boundary crossed on the way up.
  double benefit = 0.0;
  if (n >= m) benefit += g_c * cc[n - 1];
  if (n > m)
    for (int k = m; k <= n - 1; ++k)
      benefit += (cc[k - 1] - cc[k]) / asset.eta_c * (e[k] - soc);

  // Discharging cost, mirrored downwards.
  double cost = 0.0;
  if (n <= m) cost += g_d * cd[n - 1];
  if (n < m)
    for (int k = n + 1; k <= m; ++k)
      cost += asset.eta_d * (cd[k - 2] - cd[k - 1]) * (e[k - 1] - soc);

  return cost - benefit;
}

TrajectoryCost trajectory_cost(const Trajectory& traj, const StorageAsset& asset) {
  constexpr double kFeasTol = 1e-9;
  const int T = traj.horizon();
  if (static_cast<int>(traj.discharge.size()) != T)
    throw input_error("trajectory: charge and discharge must have equal length");

  const double lo = asset.soc_min;
  const double hi = asset.soc_max;
  auto interval_error = [](int t, const std::string& what) {
    return input_error("trajectory infeasible at interval " + std::to_string(t + 1) + ": " + what);
  };

  TrajectoryCost out;
  out.soc_path.reserve(T + 1);
  out.soc_path.push_back(traj.initial_soc);
  if (!(traj.initial_soc >= lo - kFeasTol && traj.initial_soc <= hi + kFeasTol))
    throw input_error("trajectory infeasible: initial_soc=" + fmt(traj.initial_soc) +
                      " outside operating bounds [" + fmt(lo) + ", " + fmt(hi) + "]");

  double e = traj.initial_soc;
  for (int t = 0; t < T; ++t) {
    const double g_c = traj.charge[t];
    const double g_d = traj.discharge[t];
    if (g_c < 0.0 || g_d < 0.0) throw interval_error(t, "negative power");
    if (g_c > 0.0 && g_d > 0.0) throw interval_error(t, "simultaneous charge and discharge");
    if (g_c > asset.p_charge_max + kFeasTol)
      throw interval_error(t, "charge " + fmt(g_c) + " exceeds cap " + fmt(asset.p_charge_max));
    if (g_d > asset.p_discharge_max + kFeasTol)
      throw interval_error(t, "discharge " + fmt(g_d) + " exceeds cap " + fmt(asset.p_discharge_max));
    const double next = soc_step(e, g_c, g_d, asset);
    if (!(next >= lo - kFeasTol && next <= hi + kFeasTol))
      throw interval_error(t, "soc " + fmt(next) + " outside operating bounds [" + fmt(lo) +
                           ", " + fmt(hi) + "]");
    e = next;
    out.soc_path.push_back(e);
  }

  // Evaluate stage costs with the path clamped to the partition range, so a
  // one-ulp overshoot of a bound cannot trip the range check.
  const double plo = asset.bid.boundaries.front();
  const double phi = asset.bid.boundaries.back();
  auto clamp = [plo, phi](double v) { return std::min(std::max(v, plo), phi); };
  double total = 0.0;
  for (int t = 0; t < T; ++t)
    total += stage_cost(clamp(out.soc_path[t]), traj.charge[t], traj.discharge[t], asset);
  out.total = total;
  return out;
}

namespace {

// Shared accumulation for the cut intercepts: marginal charge value of the
// span from the bottom boundary up to `soc`, priced as if `soc` sat in
// segment j. Intercepts are differences of this quantity, so computing both
// sides through the one routine makes the active segment's intercept an
// exact zero.
double charge_terms(int j, double soc, const StorageAsset& asset) {
  const auto& e = asset.bid.boundaries;
  const auto& cc = asset.bid.charge_benefits;
  double acc = cc[j - 1] * (soc - e.front()) / asset.eta_c;
  for (int k = 1; k <= j - 1; ++k)
    acc += (cc[k - 1] - cc[k]) * (e[k] - e.front()) / asset.eta_c;
  return acc;
}

void check_cut_index(int j, const StorageAsset& asset) {
  if (j < 1 || j > asset.bid.num_segments())
    throw input_error("cut index j=" + std::to_string(j) + " outside 1.." +
                      std::to_string(asset.bid.num_segments()));
}

void require_edcr(const StorageAsset& asset, const char* who) {
  if (!edcr_residuals(asset).is_edcr)
    throw input_error(std::string(who) +
                      ": bid does not satisfy the EDCR condition; project it with fit-bid first");
}

}  // namespace

double charge_benefit_integral(double soc, const StorageAsset& asset) {
  return charge_terms(segment_index(soc, asset.bid), soc, asset);
}

double cut_intercept(int j, double soc, const StorageAsset& asset) {
  check_cut_index(j, asset);
  const int i = segment_index(soc, asset.bid);
  return charge_terms(i, soc, asset) - charge_terms(j, soc, asset);
}

ConvexCost convex_horizon_cost(double total_charge, double total_discharge,
                               double initial_soc, const StorageAsset& asset) {
  require_edcr(asset, "convex_horizon_cost");
  const CostCuts cuts = epigraph_cuts(initial_soc, asset);
  ConvexCost best;
  best.argmax_index = 1;
  best.value = cuts.value(1, total_charge, total_discharge);
  for (int j = 2; j <= cuts.size(); ++j) {
    const double v = cuts.value(j, total_charge, total_discharge);
    if (v > best.value) {
      best.value = v;
      best.argmax_index = j;
    }
  }
  return best;
}

CostCuts epigraph_cuts(double initial_soc, const StorageAsset& asset) {
  require_edcr(asset, "epigraph_cuts");
  const int K = asset.bid.num_segments();
  CostCuts cuts;
  cuts.intercepts.reserve(K);
  cuts.charge_coefs.reserve(K);
  cuts.discharge_coefs.reserve(K);
  for (int j = 1; j <= K; ++j) {
    cuts.intercepts.push_back(cut_intercept(j, initial_soc, asset));
    cuts.charge_coefs.push_back(-asset.bid.charge_benefits[j - 1]);
    cuts.discharge_coefs.push_back(asset.bid.discharge_costs[j - 1]);
  }
  return cuts;
}

}  // namespace socdispatch
