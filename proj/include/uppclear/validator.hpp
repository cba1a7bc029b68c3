#pragma once

// Independent a-posteriori checks of a ClearingResult: market rules, UPP
// definition, block acceptance, network physics, lower-level optimality.
// Works on decoded values only, never on the MILP rows.

#include <string>
#include <vector>

#include "uppclear/clearing.hpp"
#include "uppclear/milp_model.hpp"
#include "uppclear/orderbook.hpp"

namespace uppclear {

enum class Severity { Warn, Fail };

struct CheckEntry {
  std::string rule;
  std::string scope;  // order, block, zone or hour the entry refers to
  double residual = 0.0;
  double tol = 0.0;
  bool pass = true;
  Severity severity = Severity::Fail;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckEntry> entries;

  /// True when no entry of severity Fail failed.
  bool passed() const;
  std::vector<CheckEntry> failures(bool include_warnings = false) const;
  /// Entries (any outcome) whose rule equals `rule`.
  std::vector<CheckEntry> by_rule(const std::string& rule) const;
  void add(CheckEntry e) { entries.push_back(std::move(e)); }
  void merge(const ValidationReport& other);
};

struct ValidatorOptions {
  double tol_p = 1e-6;     // prices, quantities, balances
  double tol_s = 1e-4;     // block surplus
  double tol_dual = 1e-6;  // dual feasibility rows
  double tol_sd = 1e-4;    // strong duality and complementarity
  Severity atm_merit = Severity::Warn;
};

ValidationReport check_upp_rule(const MarketInstance& inst, const ClearingResult& res, const ValidatorOptions& o = {});
ValidationReport check_upp_equation(const MarketInstance& inst, const ClearingResult& res,
                                    const ValidatorOptions& o = {});
ValidationReport check_expansion(const MarketInstance& inst, const ClearingResult& res,
                                 const ValidatorOptions& o = {});
ValidationReport check_blocks(const MarketInstance& inst, const ClearingResult& res, const ValidatorOptions& o = {});
ValidationReport check_physics(const MarketInstance& inst, const ClearingResult& res, const ValidatorOptions& o = {});
ValidationReport check_duality(const MarketInstance& inst, const ClearingResult& res, const ValidatorOptions& o = {});
ValidationReport check_merit(const MarketInstance& inst, const ClearingResult& res, const ValidatorOptions& o = {});
ValidationReport check_indicators(const MarketInstance& inst, const ClearingResult& res,
                                  const ValidatorOptions& o = {});

/// Row, bound and integrality residuals of a raw MILP point, one entry per
/// row family.
ValidationReport check_model_rows(const MilpModel& model, const std::vector<double>& x, double tol = 1e-6);

ValidationReport validate_all(const MarketInstance& inst, const ClearingResult& res, const ValidatorOptions& o = {});

std::string report_to_json(const ValidationReport& rep);

}  // namespace uppclear
