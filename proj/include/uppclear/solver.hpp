#pragma once

// Solver bridge: MPS exchange files, external backend subprocess, solution
// parsing.

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "uppclear/milp_model.hpp"

namespace uppclear {

enum class MpsFlavor { Free, Fixed };

/// Canonical exchange file: columns and rows ordered by family name, then by
/// creation order; numbers printed with 15 significant digits. The fixed
/// flavor replaces names by 8-character aliases (C0000001, R0000001).
std::string model_to_mps(const MilpModel& model, MpsFlavor flavor = MpsFlavor::Free);
void emit_model(const MilpModel& model, const std::filesystem::path& path, MpsFlavor flavor = MpsFlavor::Free);

/// Column order used by the writer (indices into model.vars()).
std::vector<int> canonical_column_order(const MilpModel& model);
std::vector<int> canonical_row_order(const MilpModel& model);

enum class SolveStatus { Optimal, Feasible, Infeasible, Timeout, Error };
std::string to_string(SolveStatus s);

struct SolveOptions {
  std::string backend = "highspy";  // highspy | scipy | highs
  double rel_gap = 1e-9;
  double abs_gap = 1e-7;
  double time_limit = 300.0;
  int threads = 1;
  bool priorities = true;  // forwarded when the backend supports them
  MpsFlavor flavor = MpsFlavor::Free;
  std::string command;  // overrides the backend command template
  std::string python;   // interpreter for the helper backends
  std::string helper;   // path of solve_mps.py
  std::filesystem::path work_dir;  // empty = fresh temporary directory
  bool keep_files = false;
};

/// Defaults overridden by UPPCLEAR_BACKEND, UPPCLEAR_SOLVER_CMD,
/// UPPCLEAR_PYTHON and UPPCLEAR_HELPER when set.
SolveOptions default_solve_options();
void validate_solve_options(const SolveOptions& o);

struct RawSolution {
  SolveStatus status = SolveStatus::Error;
  double objective = 0.0;
  double bound = 0.0;
  std::vector<double> values;  // aligned with model.vars()
  double solve_time = 0.0;
  std::string message;
  std::filesystem::path work_dir;
};

class BackendNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BackendCrash : public std::runtime_error {
 public:
  BackendCrash(const std::string& what, std::string stderr_text)
      : std::runtime_error(what + (stderr_text.empty() ? "" : "\n--- backend stderr ---\n" + stderr_text)),
        stderr_(std::move(stderr_text)) {}
  const std::string& stderr_text() const { return stderr_; }

 private:
  std::string stderr_;
};

class SolutionParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// HiGHS raw solution text -> status, objective and name -> value map.
struct ParsedSolution {
  std::string model_status;
  bool has_primal = false;
  double objective = 0.0;
  std::map<std::string, double> columns;
};
ParsedSolution parse_highs_solution(const std::string& text);

RawSolution solve(const MilpModel& model, const SolveOptions& options = default_solve_options());

}  // namespace uppclear
