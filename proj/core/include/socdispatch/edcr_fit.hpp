#pragma once

#include <vector>

#include "socdispatch/model.hpp"

namespace socdispatch {

// Weighted least-squares projection settings. Empty weight vectors mean
// all-ones; spread_margin keeps the fitted curve strictly inside the
// willingness-to-trade condition.
struct FitSpec {
  std::vector<double> charge_weights;
  std::vector<double> discharge_weights;
  double spread_margin = 1e-6;
};

// Projects a valid bid curve onto the EDCR-compliant set: minimizes the
// weighted squared deviation of the marginals subject to the EDCR
// equalities, nonincreasing discharge costs and the spread condition with
// margin. Boundaries are kept fixed. The output passes validate_bid and
// edcr_residuals; fitting an already-EDCR curve is the identity.
BidCurve fit_edcr(const BidCurve& true_curve, double eta_c, double eta_d,
                  const FitSpec& spec = {});

struct FitReport {
  std::vector<double> charge_deviations;     // fitted - true, per segment
  std::vector<double> discharge_deviations;
  double objective = 0.0;                    // weighted sum of squares
  double worst_abs_deviation = 0.0;
  std::vector<double> edcr_residuals;        // of the fitted curve
};

FitReport fit_report(const BidCurve& true_curve, const BidCurve& fitted,
                     double eta_c, double eta_d, const FitSpec& spec = {});

std::string fit_report_to_json(const FitReport& report);

}  // namespace socdispatch
