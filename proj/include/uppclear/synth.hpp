#pragma once

#include <cstdint>
#include <string>

#include "uppclear/orderbook.hpp"

namespace uppclear {

struct ZoneSplit {
  std::string upp_zone;
  std::string other_zone;
};

struct HourSpan {
  Hour first = 9;
  Hour last = 20;
};

/// Adds `n_blocks` curtailable profile blocks to `base`, alternating between
/// the two zones of `split`. Quantities ~ U(1, 75) MWh per hour, prices
/// ~ N(50, 10) truncated to [0, price_cap] and rounded to cents, MAR 0.10.
/// Throws std::invalid_argument for an invalid span or zone split.
MarketInstance add_synthetic_blocks(MarketInstance base, std::uint64_t seed, int n_blocks,
                                    const ZoneSplit& split, HourSpan span);

struct MarketShape {
  int hours = 24;
  int demand_steps = 6;   // per zone and hour
  int supply_steps = 8;   // per zone and hour
  int digits = 3;
};

/// Two-zone stepwise market (UPP zone "NORD", plain zone "SVIZ") with a
/// bidirectional link. Deterministic per seed.
MarketInstance synthetic_market(std::uint64_t seed, const MarketShape& shape);

/// The command-line generator: synthetic_market + add_synthetic_blocks.
MarketInstance generate_synthetic(std::uint64_t seed, int n_blocks, const ZoneSplit& split, HourSpan span,
                                  const MarketShape& shape = {});

struct RandomShape {
  int max_zones = 3;
  int max_hours = 3;
  int max_upp_per_hour = 6;
  int max_supply_per_zone = 4;
  int max_blocks = 2;
  bool allow_blocks = true;
  std::int64_t max_candidates = 4000;  // oracle enumeration budget
};

/// Small random instance suitable for exhaustive enumeration: distinct UPP
/// prices within each hour, integer-ish quantities, optional blocks.
MarketInstance random_instance(std::uint64_t seed, const RandomShape& shape = {});

}  // namespace uppclear
