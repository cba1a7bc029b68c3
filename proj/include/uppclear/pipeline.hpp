#pragma once

// build -> emit -> solve -> decode -> validate, either for the whole day in
// one MILP or hour by hour when no block order couples the hours.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "uppclear/builder.hpp"
#include "uppclear/clearing.hpp"
#include "uppclear/solver.hpp"
#include "uppclear/validator.hpp"

namespace uppclear {

enum class Decomposition { Auto, Hourly, WholeDay };

struct ClearOptions {
  BuildOptions build;
  SolveOptions solve = default_solve_options();
  ValidatorOptions validate;
  Decomposition decomposition = Decomposition::Auto;
  int jobs = 0;                   // concurrent hourly solves, 0 = OpenMP default
  bool refine_prices = true;      // second LP pass: binaries fixed, minimize sum |kappa|
  std::filesystem::path out_dir;  // keeps model.mps / solution.sol when set
};

struct SubSolve {
  std::vector<Hour> hours;
  SolveStatus status = SolveStatus::Error;
  double objective = 0.0;
  double bound = 0.0;
  double solve_time = 0.0;
  std::size_t columns = 0, rows = 0, binaries = 0;
  std::filesystem::path work_dir;
  std::string message;
};

struct ClearOutcome {
  SolveStatus status = SolveStatus::Error;
  bool decomposed = false;
  std::optional<ClearingResult> result;
  ValidationReport report;
  std::vector<SubSolve> parts;

  bool ok() const { return status == SolveStatus::Optimal && result && report.passed(); }
};

/// LP over the MILP rows with every binary fixed at `x`, welfare held at its
/// optimum and objective sum_t |kappa_t|. Selects, among the price vectors
/// compatible with the MILP's dispatch, the one closest to the exact average.
MilpModel price_refinement_model(const BuiltModel& built, const std::vector<double>& x, double welfare);

/// Hourly decomposition applies to blockless instances unless overridden.
/// Throws std::invalid_argument when Hourly is forced on an instance with blocks.
bool use_hourly(const MarketInstance& inst, Decomposition mode);

ClearOutcome clear_instance(const MarketInstance& inst, const ClearOptions& options = {});

}  // namespace uppclear
