#pragma once

#include <map>
#include <string>
#include <vector>

#include "socdispatch/model.hpp"

namespace socdispatch {

struct GeneratorBlock {
  double capacity = 0.0;  // MWh per interval, > 0
  double cost = 0.0;      // $/MWh, nondecreasing across blocks
};

// Piecewise-linear convex generator: blocks fill cheapest-first.
struct Generator {
  std::vector<GeneratorBlock> blocks;

  double total_capacity() const;
  // Cost of producing `output`, filling blocks in order. Throws input_error
  // above total capacity or below zero.
  double production_cost(double output) const;
};

// DC network in shift-factor form: 2B rows (both flow directions) mapping
// bus injections to branch flows, with nonnegative limits. B = 0 networks
// are valid and mean no branch constraints.
struct Network {
  int num_buses = 1;
  std::vector<std::vector<double>> shift_factors;  // 2B rows x M columns
  std::vector<double> branch_limits;               // length 2B, MW

  int num_branch_rows() const { return static_cast<int>(branch_limits.size()); }
};

// A complete dispatch instance. Buses are 0-based internally; case files are
// 1-based. At most one generator and one storage per bus; absent units mean
// zero capacity. Demand is M x T, MWh per interval.
struct Case {
  Network network;
  int horizon = 0;
  std::vector<std::vector<double>> demand;
  std::map<int, Generator> generators;
  std::map<int, StorageAsset> storages;
};

// Parses and fully validates a case file (JSON, schema in README). Throws
// input_error with a field path on schema violations, dimension mismatches
// or invariant violations.
Case load_case(const std::string& text);

// Round-trips through load_case bit-exactly.
std::string serialize_case(const Case& c);

// Aggregates every case-level and per-asset invariant check into a report;
// never throws on bad data.
ValidationReport validate_case(const Case& c);

}  // namespace socdispatch
