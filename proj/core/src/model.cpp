#include "socdispatch/model.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "socdispatch/errors.hpp"
#include "util.hpp"

namespace socdispatch {

using detail::fmt;
using json = nlohmann::json;

StorageAsset make_asset(BidCurve bid, double eta_c, double eta_d,
                        double p_charge_max, double p_discharge_max,
                        double initial_soc) {
  StorageAsset asset;
  asset.bid = std::move(bid);
  asset.eta_c = eta_c;
  asset.eta_d = eta_d;
  asset.p_charge_max = p_charge_max;
  asset.p_discharge_max = p_discharge_max;
  asset.soc_min = asset.bid.boundaries.empty() ? 0.0 : asset.bid.boundaries.front();
  asset.soc_max = asset.bid.boundaries.empty() ? 0.0 : asset.bid.boundaries.back();
  asset.initial_soc = initial_soc;
  return asset;
}

namespace {

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

ValidationReport validate_bid(const StorageAsset& asset) {
  ValidationReport report;
  auto fail = [&report](std::string msg) { report.violations.push_back(std::move(msg)); };

  const BidCurve& bid = asset.bid;
  const int K = bid.num_segments();
  if (K < 1) {
    fail("bid must have at least one segment");
    return report;
  }
  if (static_cast<int>(bid.boundaries.size()) != K + 1)
    fail("boundaries must have exactly one more entry than the marginals (" +
         std::to_string(bid.boundaries.size()) + " vs K=" + std::to_string(K) + ")");
  if (bid.discharge_costs.size() != bid.charge_benefits.size())
    fail("charge_benefits and discharge_costs must have equal length");
  if (!all_finite(bid.boundaries) || !all_finite(bid.charge_benefits) ||
      !all_finite(bid.discharge_costs))
    fail("bid parameters must be finite");
  if (!report.ok()) return report;

  for (int k = 1; k <= K; ++k) {
    if (!(bid.boundaries[k - 1] < bid.boundaries[k]))
      fail("boundaries not strictly increasing at k=" + std::to_string(k) + " (" +
           fmt(bid.boundaries[k - 1]) + " >= " + fmt(bid.boundaries[k]) + ")");
  }
  for (int k = 1; k < K; ++k) {
    if (!(bid.charge_benefits[k - 1] >= bid.charge_benefits[k]))
      fail("charge_benefits not nonincreasing at k=" + std::to_string(k) + " (" +
           fmt(bid.charge_benefits[k - 1]) + " < " + fmt(bid.charge_benefits[k]) + ")");
    if (!(bid.discharge_costs[k - 1] >= bid.discharge_costs[k]))
      fail("discharge_costs not nonincreasing at k=" + std::to_string(k) + " (" +
           fmt(bid.discharge_costs[k - 1]) + " < " + fmt(bid.discharge_costs[k]) + ")");
  }

  if (!(asset.eta_c > 0.0 && asset.eta_c <= 1.0))
    fail("eta_c must be in (0,1], got " + fmt(asset.eta_c));
  if (!(asset.eta_d > 0.0 && asset.eta_d <= 1.0))
    fail("eta_d must be in (0,1], got " + fmt(asset.eta_d));

  if (report.ok()) {
    const double buy = bid.charge_benefits.front() / asset.eta_c;
    const double sell = bid.discharge_costs.back() * asset.eta_d;
    if (!(buy < sell))
      fail("spread: cC_1/eta_c=" + fmt(buy) + " >= cD_K*eta_d=" + fmt(sell));
  }

  if (!(asset.p_charge_max >= 0.0)) fail("p_charge_max must be >= 0");
  if (!(asset.p_discharge_max >= 0.0)) fail("p_discharge_max must be >= 0");

  if (!report.violations.empty()) return report;

  const double lo = bid.boundaries.front();
  const double hi = bid.boundaries.back();
  if (!(asset.soc_min >= lo && asset.soc_max <= hi && asset.soc_min <= asset.soc_max))
    fail("operating bounds [" + fmt(asset.soc_min) + ", " + fmt(asset.soc_max) +
         "] must lie inside the partition range [" + fmt(lo) + ", " + fmt(hi) + "]");
  else if (!(asset.initial_soc >= asset.soc_min && asset.initial_soc <= asset.soc_max))
    fail("initial_soc=" + fmt(asset.initial_soc) + " outside operating bounds [" +
         fmt(asset.soc_min) + ", " + fmt(asset.soc_max) + "]");

  return report;
}

EdcrCheck edcr_residuals(const StorageAsset& asset, double tol) {
  ValidationReport report = validate_bid(asset);
  if (!report.ok())
    throw input_error("edcr_residuals: invalid bid: " + report.violations.front());

  const BidCurve& bid = asset.bid;
  const int K = bid.num_segments();
  EdcrCheck check;
  check.residuals.reserve(K > 0 ? K - 1 : 0);
  const double ratio = asset.eta_c * asset.eta_d;
  double worst = 0.0;
  for (int k = 1; k < K; ++k) {
    const double r = bid.charge_decrement(k) - ratio * bid.discharge_decrement(k);
    check.residuals.push_back(r);
    worst = std::max(worst, std::abs(r));
  }
  check.is_edcr = worst <= tol;
  return check;
}

int segment_index(double soc, const BidCurve& curve) {
  const auto& e = curve.boundaries;
  if (e.size() < 2 || !(soc >= e.front() && soc <= e.back()))
    throw input_error("segment_index: soc=" + fmt(soc) + " outside partition range [" +
                      (e.empty() ? "?" : fmt(e.front())) + ", " +
                      (e.empty() ? "?" : fmt(e.back())) + "]");
  // Half-open [E_k, E_{k+1}); the last segment also owns its upper endpoint.
  auto it = std::upper_bound(e.begin(), e.end(), soc);
  int k = static_cast<int>(it - e.begin());
  return std::min(std::max(k, 1), curve.num_segments());
}

StorageAsset parse_bid_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw input_error(std::string("bid JSON parse error at byte ") +
                      std::to_string(e.byte) + ": " + e.what());
  }
  if (!j.is_object()) throw input_error("bid JSON must be an object");

  auto require = [&j](const char* key) -> const json& {
    auto it = j.find(key);
    if (it == j.end()) throw input_error(std::string("bid JSON missing key \"") + key + "\"");
    return *it;
  };
  auto as_vector = [](const json& node, const char* key) {
    if (!node.is_array()) throw input_error(std::string(key) + " must be an array of numbers");
    std::vector<double> out;
    out.reserve(node.size());
    for (const auto& x : node) {
      if (!x.is_number()) throw input_error(std::string(key) + " must contain only numbers");
      out.push_back(x.get<double>());
    }
    return out;
  };
  auto as_number = [](const json& node, const char* key) {
    if (!node.is_number()) throw input_error(std::string(key) + " must be a number");
    return node.get<double>();
  };

  StorageAsset asset;
  asset.bid.boundaries = as_vector(require("boundaries"), "boundaries");
  asset.bid.charge_benefits = as_vector(require("charge_benefits"), "charge_benefits");
  asset.bid.discharge_costs = as_vector(require("discharge_costs"), "discharge_costs");
  asset.eta_c = as_number(require("eta_c"), "eta_c");
  asset.eta_d = as_number(require("eta_d"), "eta_d");
  asset.p_charge_max = as_number(require("p_charge_max"), "p_charge_max");
  asset.p_discharge_max = as_number(require("p_discharge_max"), "p_discharge_max");
  asset.soc_min = j.contains("soc_min") ? as_number(j["soc_min"], "soc_min")
                                        : (asset.bid.boundaries.empty() ? 0.0
                                                                        : asset.bid.boundaries.front());
  asset.soc_max = j.contains("soc_max") ? as_number(j["soc_max"], "soc_max")
                                        : (asset.bid.boundaries.empty() ? 0.0
                                                                        : asset.bid.boundaries.back());
  asset.initial_soc = as_number(require("initial_soc"), "initial_soc");
  return asset;
}

std::string bid_to_json(const StorageAsset& asset) {
  json j;
  j["boundaries"] = asset.bid.boundaries;
  j["charge_benefits"] = asset.bid.charge_benefits;
  j["discharge_costs"] = asset.bid.discharge_costs;
  j["eta_c"] = asset.eta_c;
  j["eta_d"] = asset.eta_d;
  j["p_charge_max"] = asset.p_charge_max;
  j["p_discharge_max"] = asset.p_discharge_max;
  j["soc_min"] = asset.soc_min;
  j["soc_max"] = asset.soc_max;
  j["initial_soc"] = asset.initial_soc;
  return j.dump(2);
}

}  // namespace socdispatch
