#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "uppclear/builder.hpp"
#include "uppclear/clearing.hpp"
#include "uppclear/solver.hpp"

namespace uppclear {

class IntegralityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kIntegralityTol = 1e-6;

/// Rounds a relaxed binary value; throws IntegralityError beyond 1e-6.
int round_binary(double v, const std::string& name);

/// Raw solver values -> ClearingResult. Requires an optimal or feasible status.
ClearingResult decode(const MarketInstance& inst, const BuiltModel& built, const RawSolution& raw);

// JSON interchange used by the CLI.
std::string clearing_to_json(const ClearingResult& r);
ClearingResult clearing_from_json(std::string_view text);

}  // namespace uppclear
