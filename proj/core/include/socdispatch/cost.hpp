#pragma once

#include <vector>

#include "socdispatch/model.hpp"

namespace socdispatch {

// Charge/discharge decisions over a horizon, MWh per interval. At most one
// of charge[t], discharge[t] may be positive in any interval.
struct Trajectory {
  std::vector<double> charge;
  std::vector<double> discharge;
  double initial_soc = 0.0;

  int horizon() const { return static_cast<int>(charge.size()); }
};

// One SoC transition: e + g_c*eta_c - g_d/eta_d. Throws input_error if both
// powers are positive or either is negative.
double soc_step(double soc, double g_c, double g_d, const StorageAsset& asset);

// Exact single-interval bid-in cost (discharge cost minus charge benefit) of
// moving from `soc` under (g_c, g_d). Both the starting and resulting SoC
// must lie in the bid partition range. The value accounts for every segment
// the transition crosses at that segment's marginal.
double stage_cost(double soc, double g_c, double g_d, const StorageAsset& asset);

struct TrajectoryCost {
  double total = 0.0;              // $
  std::vector<double> soc_path;    // length T+1, starts at initial_soc
};

// Sum of stage costs along a feasible trajectory. Validates complementarity,
// power caps and SoC operating bounds first; throws input_error naming the
// first violated interval and constraint.
TrajectoryCost trajectory_cost(const Trajectory& traj, const StorageAsset& asset);

// Cumulative marginal charge benefit of filling from the bottom of the
// partition up to `soc`, scaled to grid-side energy by 1/eta_c. Zero at the
// lowest breakpoint; continuous and increasing in soc.
double charge_benefit_integral(double soc, const StorageAsset& asset);

// Intercept of affine cut j (1-based) of the convexified horizon cost at
// initial SoC s. Identically zero for the segment containing s.
double cut_intercept(int j, double soc, const StorageAsset& asset);

// The convexified horizon cost as a family of K affine cuts in the horizon
// totals: cut j evaluates to intercept[j] + charge_coef[j]*total_charge +
// discharge_coef[j]*total_discharge, with charge_coef = -c^C_j and
// discharge_coef = +c^D_j. The cost is the max over cuts.
struct CostCuts {
  std::vector<double> intercepts;
  std::vector<double> charge_coefs;
  std::vector<double> discharge_coefs;

  int size() const { return static_cast<int>(intercepts.size()); }
  double value(int j, double total_charge, double total_discharge) const {
    return intercepts[j - 1] + charge_coefs[j - 1] * total_charge +
           discharge_coefs[j - 1] * total_discharge;
  }
};

struct ConvexCost {
  double value = 0.0;
  int argmax_index = 0;  // 1-based; smallest index on ties
};

// Convexified total cost over the horizon, as a function of total charge,
// total discharge and the initial SoC. Only valid for bids satisfying the
// EDCR condition; throws input_error otherwise.
ConvexCost convex_horizon_cost(double total_charge, double total_discharge,
                               double initial_soc, const StorageAsset& asset);

// The K cuts behind convex_horizon_cost, packaged for the dispatch LP.
// Throws input_error for non-EDCR bids.
CostCuts epigraph_cuts(double initial_soc, const StorageAsset& asset);

}  // namespace socdispatch
