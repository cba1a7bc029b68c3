#pragma once

// Exhaustive reference clearing for small instances. Enumerates every block
// acceptance pattern and, per hour, every admissible UPP execution set (which
// orders are in the money, which single order sits at the money and how much
// of it clears). Each candidate gets a primal LP for its welfare; candidates
// are then visited best-first and the first one whose dual-optimal set admits
// prices satisfying the market rules wins.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "uppclear/clearing.hpp"
#include "uppclear/orderbook.hpp"

namespace uppclear {

struct OracleLimits {
  int max_zones = 3;
  int max_upp_per_hour = 6;
  int max_supply_per_zone = 4;  // per hour
  int max_blocks = 2;
  int max_hours = 3;
  std::int64_t atm_grid_step = 1;  // units of 10^-c MWh
  std::int64_t max_candidates = 200000;
  bool count_all = false;  // also count every rule-feasible candidate
};

class OracleLimitError : public std::runtime_error {
 public:
  OracleLimitError(const std::string& what, std::vector<std::string> reasons)
      : std::runtime_error(what), reasons_(std::move(reasons)) {}
  const std::vector<std::string>& reasons() const { return reasons_; }

 private:
  std::vector<std::string> reasons_;
};

struct OracleResult {
  bool feasible = false;
  double best_welfare = 0.0;
  ClearingResult best;
  std::string best_candidate;
  std::int64_t enumerated = 0;
  std::optional<std::int64_t> rule_feasible;
  /// Other rule-feasible candidates within 1e-9 of the best welfare.
  std::vector<std::string> ties;
  /// Number of distinct executed-quantity vectors among best + ties.
  int distinct_outcomes = 0;
};

/// Number of candidates the oracle would evaluate (saturates at INT64_MAX).
std::int64_t oracle_candidate_count(const MarketInstance& inst, std::int64_t atm_grid_step = 1);

/// Throws OracleLimitError listing every exceeded limit.
void check_oracle_limits(const MarketInstance& inst, const OracleLimits& limits = {});

/// OpenMP version.
OracleResult enumerate_clear(const MarketInstance& inst, const OracleLimits& limits = {});
/// Serial reference; identical results.
OracleResult enumerate_clear_serial(const MarketInstance& inst, const OracleLimits& limits = {});

struct CompareReport {
  bool pass = false;
  bool milp_feasible = false;
  bool oracle_feasible = false;
  double milp_welfare = 0.0;
  double oracle_welfare = 0.0;
  double gap = 0.0;
  double tol = 1e-6;
  std::vector<std::string> diverging;  // orders whose quantities differ

  std::string summary() const;
};

/// `milp` may be null when the MILP reported infeasibility.
CompareReport compare(const MarketInstance& inst, const ClearingResult* milp, const OracleResult& oracle,
                      double tol = 1e-6);

}  // namespace uppclear
