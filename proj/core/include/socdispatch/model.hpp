#pragma once

#include <string>
#include <vector>

namespace socdispatch {

// SoC-dependent bid: the SoC axis is partitioned into K segments by K+1
// strictly increasing breakpoints (MWh). Segment k (1-based) carries one
// marginal charge benefit and one marginal discharge cost ($/MWh).
// Marginals must be nonincreasing in k.
struct BidCurve {
  std::vector<double> boundaries;        // K+1 breakpoints, strictly increasing
  std::vector<double> charge_benefits;   // K entries
  std::vector<double> discharge_costs;   // K entries

  int num_segments() const { return static_cast<int>(charge_benefits.size()); }

  // Consecutive marginal decrements, k in 1..K-1 (1-based).
  double charge_decrement(int k) const {
    return charge_benefits[k - 1] - charge_benefits[k];
  }
  double discharge_decrement(int k) const {
    return discharge_costs[k - 1] - discharge_costs[k];
  }
};

// One storage unit: bid curve plus physical parameters. Power caps are
// energy per interval (interval length normalized to 1 h, so MW == MWh).
// Operating SoC bounds [soc_min, soc_max] must lie inside the bid
// partition range; they default to its endpoints.
struct StorageAsset {
  BidCurve bid;
  double eta_c = 1.0;           // charging efficiency, in (0,1]
  double eta_d = 1.0;           // discharging efficiency, in (0,1]
  double p_charge_max = 0.0;    // MWh per interval
  double p_discharge_max = 0.0; // MWh per interval
  double soc_min = 0.0;
  double soc_max = 0.0;
  double initial_soc = 0.0;
};

// Builds an asset with soc_min/soc_max defaulted to the partition endpoints.
StorageAsset make_asset(BidCurve bid, double eta_c, double eta_d,
                        double p_charge_max, double p_discharge_max,
                        double initial_soc);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Checks every bid-curve and asset invariant; violations are data, not
// errors. Each message names the failed inequality and the 1-based index.
ValidationReport validate_bid(const StorageAsset& asset);

struct EdcrCheck {
  std::vector<double> residuals;  // K-1 entries, empty for K=1
  bool is_edcr = false;
};

// Residuals of the equal decremental-cost ratio condition,
// r_k = (c^C_k - c^C_{k+1}) - eta_c*eta_d*(c^D_k - c^D_{k+1}).
// is_edcr holds iff max |r_k| <= tol. Throws input_error on invalid bids.
EdcrCheck edcr_residuals(const StorageAsset& asset, double tol = 1e-9);

// 1-based segment index of a SoC value. Segments are half-open
// [E_k, E_{k+1}) with the last segment closed, so every value in the
// partition range maps to exactly one segment. Throws input_error outside
// the partition range.
int segment_index(double soc, const BidCurve& curve);

// Bid JSON (decimal numbers, units MWh and $/MWh):
// {"boundaries":[...], "charge_benefits":[...], "discharge_costs":[...],
//  "eta_c":x, "eta_d":x, "p_charge_max":x, "p_discharge_max":x,
//  "soc_min":x, "soc_max":x, "initial_soc":x}
// soc_min/soc_max may be omitted and default to the partition endpoints.
StorageAsset parse_bid_json(const std::string& text);
std::string bid_to_json(const StorageAsset& asset);

}  // namespace socdispatch
