#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "socdispatch/edcr_fit.hpp"
#include "socdispatch/errors.hpp"
#include "socdispatch/oracle.hpp"

using namespace socdispatch;

namespace {

BidCurve curve(std::vector<double> e, std::vector<double> cc, std::vector<double> cd) {
  BidCurve out;
  out.boundaries = std::move(e);
  out.charge_benefits = std::move(cc);
  out.discharge_costs = std::move(cd);
  return out;
}

bool passes_checks(const BidCurve& fitted, double eta_c, double eta_d) {
  StorageAsset probe = make_asset(fitted, eta_c, eta_d, 1.0, 1.0, fitted.boundaries.front());
  return validate_bid(probe).ok() && edcr_residuals(probe).is_edcr;
}

// Exhaustive reference: grid the free parameters (leading charge marginal
// plus all discharge marginals) over the constraint set and score the same
// objective.
double grid_search_objective(const BidCurve& true_curve, double eta_c, double eta_d,
                             double margin, double radius, int steps) {
  const double ratio = eta_c * eta_d;
  const int K = true_curve.num_segments();
  REQUIRE(K == 2);
  double best = 1e300;
  const double a0 = true_curve.charge_benefits[0];
  const double d10 = true_curve.discharge_costs[0];
  const double d20 = true_curve.discharge_costs[1];
  for (int ia = 0; ia <= steps; ++ia)
    for (int i1 = 0; i1 <= steps; ++i1)
      for (int i2 = 0; i2 <= steps; ++i2) {
        const double a = a0 - radius + 2.0 * radius * ia / steps;
        const double d1 = d10 - radius + 2.0 * radius * i1 / steps;
        const double d2 = d20 - radius + 2.0 * radius * i2 / steps;
        if (d2 > d1) continue;
        if (a / eta_c > eta_d * d2 - margin) continue;
        const double c2 = a - ratio * (d1 - d2);
        const double r1 = a - true_curve.charge_benefits[0];
        const double r2 = c2 - true_curve.charge_benefits[1];
        const double r3 = d1 - true_curve.discharge_costs[0];
        const double r4 = d2 - true_curve.discharge_costs[1];
        best = std::min(best, r1 * r1 + r2 * r2 + r3 * r3 + r4 * r4);
      }
  return best;
}

}  // namespace

TEST_CASE("an EDCR curve is a fixed point of the projection") {
  const BidCurve in = curve({0, 2, 4}, {10, 6}, {20, 16});
  const BidCurve out = fit_edcr(in, 1.0, 1.0);
  for (int k = 0; k < 2; ++k) {
    CHECK(out.charge_benefits[k] == doctest::Approx(in.charge_benefits[k]).epsilon(1e-12));
    CHECK(out.discharge_costs[k] == doctest::Approx(in.discharge_costs[k]).epsilon(1e-12));
  }
  CHECK(out.boundaries == in.boundaries);
}

TEST_CASE("the worked K=2 projection lands on the derived values") {
  const BidCurve in = curve({0, 2, 4}, {10, 6}, {21, 15});
  const BidCurve out = fit_edcr(in, 1.0, 1.0);
  CHECK(out.charge_benefits[0] == doctest::Approx(10.5).epsilon(1e-9));
  CHECK(out.charge_benefits[1] == doctest::Approx(5.5).epsilon(1e-9));
  CHECK(out.discharge_costs[0] == doctest::Approx(20.5).epsilon(1e-9));
  CHECK(out.discharge_costs[1] == doctest::Approx(15.5).epsilon(1e-9));

  const FitReport report = fit_report(in, out, 1.0, 1.0);
  CHECK(report.objective == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(report.worst_abs_deviation == doctest::Approx(0.5).epsilon(1e-9));
  for (double r : report.edcr_residuals) CHECK(std::abs(r) <= 1e-9);
}

TEST_CASE("single-segment curves pass through untouched") {
  const BidCurve in = curve({0, 5}, {4}, {9});
  const BidCurve out = fit_edcr(in, 0.9, 0.8);
  CHECK(out.charge_benefits[0] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(out.discharge_costs[0] == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("identical curves produce a zero-deviation report") {
  const BidCurve in = curve({0, 2, 4}, {10, 6}, {20, 16});
  const FitReport report = fit_report(in, in, 1.0, 1.0);
  CHECK(report.objective == 0.0);
  CHECK(report.worst_abs_deviation == 0.0);
}

TEST_CASE("projection output always satisfies the bid invariants") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const StorageAsset asset = random_monotone_asset(seed);
    const BidCurve fitted = fit_edcr(asset.bid, asset.eta_c, asset.eta_d);
    CHECK(passes_checks(fitted, asset.eta_c, asset.eta_d));
  }
}

TEST_CASE("projecting twice changes nothing") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const StorageAsset asset = random_monotone_asset(seed);
    const BidCurve once = fit_edcr(asset.bid, asset.eta_c, asset.eta_d);
    const BidCurve twice = fit_edcr(once, asset.eta_c, asset.eta_d);
    for (int k = 0; k < once.num_segments(); ++k) {
      CHECK(std::abs(twice.charge_benefits[k] - once.charge_benefits[k]) <= 1e-12 *
                (1.0 + std::abs(once.charge_benefits[k])));
      CHECK(std::abs(twice.discharge_costs[k] - once.discharge_costs[k]) <= 1e-12 *
                (1.0 + std::abs(once.discharge_costs[k])));
    }
  }
}

TEST_CASE("no grid point on the constraint set beats the projection") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    const double d2 = 10.0 + 10.0 * u(rng);
    const double d1 = d2 + 8.0 * u(rng);
    const double c1 = 0.8 * d2 * u(rng);
    const double c2 = c1 - 6.0 * u(rng);
    const BidCurve in = curve({0, 3, 7}, {c1, c2}, {d1, d2});
    FitSpec spec;
    const BidCurve out = fit_edcr(in, 1.0, 1.0, spec);
    const double fit_obj = fit_report(in, out, 1.0, 1.0, spec).objective;
    const double grid_obj =
        grid_search_objective(in, 1.0, 1.0, spec.spread_margin, 6.0, 60);
    CHECK(fit_obj <= grid_obj + 1e-6);
  }
}

TEST_CASE("weights steer the projection") {
  const BidCurve in = curve({0, 2, 4}, {10, 6}, {21, 15});
  FitSpec spec;
  spec.discharge_weights = {1e6, 1.0};
  const BidCurve out = fit_edcr(in, 1.0, 1.0, spec);
  // The heavily weighted first discharge marginal barely moves.
  CHECK(std::abs(out.discharge_costs[0] - 21.0) < 0.01);
  CHECK(passes_checks(out, 1.0, 1.0));
}

TEST_CASE("the spread margin binds when the input spread is too tight") {
  // Discharge barely above charge: the margined constraint becomes active
  // and the output still validates strictly.
  const BidCurve in = curve({0, 4}, {9.0}, {9.5});
  FitSpec spec;
  spec.spread_margin = 2.0;
  const BidCurve out = fit_edcr(in, 1.0, 1.0, spec);
  CHECK(out.discharge_costs[0] - out.charge_benefits[0] >= 2.0 - 1e-9);
  CHECK(passes_checks(out, 1.0, 1.0));
}

TEST_CASE("bad inputs are rejected") {
  const BidCurve invalid = curve({0, 2, 4}, {6, 10}, {20, 16});
  CHECK_THROWS_AS(fit_edcr(invalid, 1.0, 1.0), input_error);

  const BidCurve in = curve({0, 2, 4}, {10, 6}, {20, 16});
  FitSpec spec;
  spec.spread_margin = 0.0;
  CHECK_THROWS_AS(fit_edcr(in, 1.0, 1.0, spec), input_error);
  spec.spread_margin = 1e-6;
  spec.charge_weights = {1.0};
  CHECK_THROWS_AS(fit_edcr(in, 1.0, 1.0, spec), input_error);
  spec.charge_weights = {1.0, -1.0};
  CHECK_THROWS_AS(fit_edcr(in, 1.0, 1.0, spec), input_error);
}
