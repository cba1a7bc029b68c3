#pragma once

// Decoded market clearing: quantities, prices and the dual values the
// validator needs. Produced by the MILP decoder and by the oracle.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "uppclear/orderbook.hpp"

namespace uppclear {

struct HourResult {
  Hour hour = 0;
  double pi = 0.0;
  bool pi_determined = false;  // false when no UPP quantity is executed
  double kappa = 0.0;
};

struct ZonePrice {
  Hour hour = 0;
  std::string zone;
  double zeta = 0.0;
};

/// One entry per instance demand order, same order as MarketInstance::demands.
struct DemandResult {
  std::string id;
  double executed = 0.0;  // d^pi for UPP orders, d^zeta otherwise
  int ug = 0, ue = 0, uw = 0, ud = 0;
  double dw = 0.0, dd = 0.0;
  double phi_w = 0.0, phi_wlo = 0.0;  // UPP orders
  double phi_z = 0.0;                 // zonal orders
};

struct SupplyResult {
  std::string id;
  double cleared = 0.0;
  double phi_s = 0.0;
};

/// Ordered zone pair; `flow` is the export from `from` to `to`.
struct FlowResult {
  Hour hour = 0;
  std::string from, to;
  double flow = 0.0;
  double delta = 0.0;
  double eta = 0.0;
};

struct BlockResult {
  std::string id;
  int accepted = 0;
  double ratio = 0.0;
  double phi_max = 0.0, phi_min = 0.0;
};

/// Binary expansion of the dispatched ATM quantity of one (hour, UPP zone).
struct ExpansionResult {
  Hour hour = 0;
  std::string zone;
  std::vector<int> bits;
};

struct ClearingResult {
  std::string source;  // "milp" or "oracle"
  double welfare = 0.0;
  std::vector<HourResult> hours;
  std::vector<ZonePrice> zone_prices;
  std::vector<DemandResult> demands;
  std::vector<SupplyResult> supplies;
  std::vector<FlowResult> flows;
  std::vector<BlockResult> blocks;
  std::vector<ExpansionResult> expansions;

  const HourResult* hour(Hour t) const;
  HourResult* hour(Hour t);
  double zeta(Hour t, const std::string& zone) const;
  void set_zeta(Hour t, const std::string& zone, double v);
  const FlowResult* flow(Hour t, const std::string& from, const std::string& to) const;
};

/// Unordered connected zone pairs (i < j by zone position) that have a link in
/// at least one direction. Flow variables exist for both orientations.
std::vector<std::pair<std::size_t, std::size_t>> connected_pairs(const MarketInstance& inst);

/// F^max for the directed pair at hour t (0 when the link is absent).
Qty link_capacity(const MarketInstance& inst, const std::string& from, const std::string& to, Hour t);

/// Welfare of objective (33) evaluated from cleared quantities.
double clearing_welfare(const MarketInstance& inst, const ClearingResult& res);

/// Surplus sigma_p = sum_t S^B_tp (zeta_t,zone - P^B).
double block_surplus(const MarketInstance& inst, const ClearingResult& res, const BlockOrder& b);

/// Same-shape empty result: ids filled, all values zero.
ClearingResult empty_clearing(const MarketInstance& inst, std::string source);

}  // namespace uppclear
