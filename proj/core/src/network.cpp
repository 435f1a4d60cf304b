#include "socdispatch/network.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "socdispatch/errors.hpp"
#include "util.hpp"

namespace socdispatch {

using detail::fmt;
using json = nlohmann::json;

double Generator::total_capacity() const {
  double total = 0.0;
  for (const auto& b : blocks) total += b.capacity;
  return total;
}

double Generator::production_cost(double output) const {
  if (output < -1e-9 || output > total_capacity() + 1e-9)
    throw input_error("generator output " + fmt(output) + " outside [0, " +
                      fmt(total_capacity()) + "]");
  double remaining = std::max(output, 0.0);
  double cost = 0.0;
  for (const auto& b : blocks) {
    const double take = std::min(remaining, b.capacity);
    cost += take * b.cost;
    remaining -= take;
    if (remaining <= 0.0) break;
  }
  return cost;
}

namespace {

std::vector<double> number_array(const json& node, const std::string& path) {
  if (!node.is_array()) throw input_error(path + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(node.size());
  for (size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_number())
      throw input_error(path + "[" + std::to_string(i) + "]: expected a number");
    out.push_back(node[i].get<double>());
  }
  return out;
}

int bus_key_to_index(const std::string& key, int num_buses, const std::string& path) {
  size_t pos = 0;
  int bus = 0;
  try {
    bus = std::stoi(key, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != key.size() || bus < 1 || bus > num_buses)
    throw input_error(path + "." + key + ": bus keys must be 1.." + std::to_string(num_buses));
  return bus - 1;
}

}  // namespace

Case load_case(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw input_error(std::string("case JSON parse error at byte ") + std::to_string(e.byte) +
                      ": " + e.what());
  }
  if (!j.is_object()) throw input_error("case file must be a JSON object");

  auto require = [&j](const char* key) -> const json& {
    auto it = j.find(key);
    if (it == j.end()) throw input_error(std::string("missing key \"") + key + "\"");
    return *it;
  };

  Case c;
  const json& nb = require("num_buses");
  if (!nb.is_number_integer() || nb.get<int>() < 1)
    throw input_error("num_buses: expected a positive integer");
  c.network.num_buses = nb.get<int>();

  const json& hz = require("horizon");
  if (!hz.is_number_integer() || hz.get<int>() < 0)
    throw input_error("horizon: expected a nonnegative integer");
  c.horizon = hz.get<int>();

  const json& sf = require("shift_factors");
  if (!sf.is_array()) throw input_error("shift_factors: expected an array of rows");
  for (size_t r = 0; r < sf.size(); ++r)
    c.network.shift_factors.push_back(
        number_array(sf[r], "shift_factors[" + std::to_string(r) + "]"));
  c.network.branch_limits = number_array(require("branch_limits"), "branch_limits");

  const json& dm = require("demand");
  if (!dm.is_array()) throw input_error("demand: expected M rows");
  for (size_t r = 0; r < dm.size(); ++r)
    c.demand.push_back(number_array(dm[r], "demand[" + std::to_string(r) + "]"));

  if (j.contains("generators")) {
    const json& gens = j["generators"];
    if (!gens.is_object()) throw input_error("generators: expected a map of bus -> generator");
    for (auto it = gens.begin(); it != gens.end(); ++it) {
      const int bus = bus_key_to_index(it.key(), c.network.num_buses, "generators");
      const json& g = it.value();
      if (!g.is_object() || !g.contains("blocks"))
        throw input_error("generators." + it.key() + ": expected {\"blocks\": [[cap,cost],...]}");
      Generator gen;
      const json& blocks = g["blocks"];
      if (!blocks.is_array())
        throw input_error("generators." + it.key() + ".blocks: expected an array");
      for (size_t b = 0; b < blocks.size(); ++b) {
        const auto pair = number_array(blocks[b], "generators." + it.key() + ".blocks[" +
                                                      std::to_string(b) + "]");
        if (pair.size() != 2)
          throw input_error("generators." + it.key() + ".blocks[" + std::to_string(b) +
                            "]: expected [capacity, cost]");
        gen.blocks.push_back({pair[0], pair[1]});
      }
      if (!c.generators.emplace(bus, std::move(gen)).second)
        throw input_error("generators." + it.key() + ": duplicate bus");
    }
  }

  if (j.contains("storages")) {
    const json& st = j["storages"];
    if (!st.is_object()) throw input_error("storages: expected a map of bus -> bid object");
    for (auto it = st.begin(); it != st.end(); ++it) {
      const int bus = bus_key_to_index(it.key(), c.network.num_buses, "storages");
      StorageAsset asset;
      try {
        asset = parse_bid_json(it.value().dump());
      } catch (const input_error& e) {
        throw input_error("storages." + it.key() + ": " + e.what());
      }
      if (!c.storages.emplace(bus, std::move(asset)).second)
        throw input_error("storages." + it.key() + ": duplicate bus");
    }
  }

  ValidationReport report = validate_case(c);
  if (!report.ok()) {
    std::string msg = "invalid case:";
    for (const auto& v : report.violations) msg += "\n  - " + v;
    throw input_error(msg);
  }
  return c;
}

std::string serialize_case(const Case& c) {
  json j;
  j["num_buses"] = c.network.num_buses;
  j["horizon"] = c.horizon;
  j["shift_factors"] = c.network.shift_factors;
  j["branch_limits"] = c.network.branch_limits;
  j["demand"] = c.demand;
  json gens = json::object();
  for (const auto& [bus, gen] : c.generators) {
    json blocks = json::array();
    for (const auto& b : gen.blocks) blocks.push_back({b.capacity, b.cost});
    gens[std::to_string(bus + 1)] = {{"blocks", blocks}};
  }
  j["generators"] = gens;
  json storages = json::object();
  for (const auto& [bus, asset] : c.storages)
    storages[std::to_string(bus + 1)] = json::parse(bid_to_json(asset));
  j["storages"] = storages;
  return j.dump(2);
}

ValidationReport validate_case(const Case& c) {
  ValidationReport report;
  auto fail = [&report](std::string msg) { report.violations.push_back(std::move(msg)); };

  const int M = c.network.num_buses;
  const size_t rows = c.network.shift_factors.size();
  if (rows != c.network.branch_limits.size())
    fail("branch_limits length " + std::to_string(c.network.branch_limits.size()) +
         " != shift_factors row count " + std::to_string(rows));
  if (rows % 2 != 0) fail("shift_factors must have an even row count (both flow directions)");
  for (size_t r = 0; r < rows; ++r) {
    if (static_cast<int>(c.network.shift_factors[r].size()) != M)
      fail("shift_factors[" + std::to_string(r) + "] has " +
           std::to_string(c.network.shift_factors[r].size()) + " columns, expected num_buses=" +
           std::to_string(M));
    for (double v : c.network.shift_factors[r])
      if (!std::isfinite(v)) {
        fail("shift_factors[" + std::to_string(r) + "] contains a non-finite entry");
        break;
      }
  }
  for (size_t r = 0; r < c.network.branch_limits.size(); ++r)
    if (!(c.network.branch_limits[r] >= 0.0))
      fail("branch_limits[" + std::to_string(r) + "]=" + fmt(c.network.branch_limits[r]) +
           " must be >= 0");

  if (static_cast<int>(c.demand.size()) != M)
    fail("demand has " + std::to_string(c.demand.size()) + " rows, expected num_buses=" +
         std::to_string(M));
  for (size_t i = 0; i < c.demand.size(); ++i) {
    if (static_cast<int>(c.demand[i].size()) != c.horizon)
      fail("demand[" + std::to_string(i) + "] has " + std::to_string(c.demand[i].size()) +
           " columns, expected horizon=" + std::to_string(c.horizon));
    for (size_t t = 0; t < c.demand[i].size(); ++t) {
      const double d = c.demand[i][t];
      if (!std::isfinite(d) || d < 0.0)
        fail("demand at (bus " + std::to_string(i + 1) + ", t " + std::to_string(t + 1) +
             ") = " + fmt(d) + " must be finite and >= 0");
    }
  }

  for (const auto& [bus, gen] : c.generators) {
    if (bus < 0 || bus >= M) {
      fail("generator at bus " + std::to_string(bus + 1) + " outside 1.." + std::to_string(M));
      continue;
    }
    const std::string where = "generators." + std::to_string(bus + 1);
    for (size_t b = 0; b < gen.blocks.size(); ++b) {
      if (!(gen.blocks[b].capacity > 0.0))
        fail(where + ".blocks[" + std::to_string(b) + "]: capacity must be > 0");
      if (!std::isfinite(gen.blocks[b].cost))
        fail(where + ".blocks[" + std::to_string(b) + "]: cost must be finite");
      if (b > 0 && !(gen.blocks[b].cost >= gen.blocks[b - 1].cost))
        fail(where + ": marginal costs must be nondecreasing across blocks (block " +
             std::to_string(b) + ")");
    }
  }

  for (const auto& [bus, asset] : c.storages) {
    if (bus < 0 || bus >= M) {
      fail("storage at bus " + std::to_string(bus + 1) + " outside 1.." + std::to_string(M));
      continue;
    }
    ValidationReport bid_report = validate_bid(asset);
    for (const auto& v : bid_report.violations)
      fail("storages." + std::to_string(bus + 1) + ": " + v);
  }

  return report;
}

}  // namespace socdispatch
