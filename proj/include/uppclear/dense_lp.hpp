#pragma once

// Small dense LP solver (bounded-variable primal simplex, Bland's rule).
// Meant for the tiny lower-level problems the oracle enumerates; no sparsity,
// no scaling, no presolve.

#include <utility>
#include <vector>

#include "uppclear/milp_model.hpp"

namespace uppclear::lp {

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Solution {
  Status status = Status::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
  int iterations = 0;
};

class DenseLp {
 public:
  int add_var(double lb, double ub, double cost = 0.0);
  void add_row(const std::vector<std::pair<int, double>>& terms, Sense sense, double rhs);
  void set_cost(int j, double c) { cost_[j] = c; }
  void set_bounds(int j, double lb, double ub) { lb_[j] = lb; ub_[j] = ub; }

  int num_vars() const { return static_cast<int>(cost_.size()); }
  int num_rows() const { return static_cast<int>(rhs_.size()); }

  /// Minimizes cost·x.
  Solution minimize(int max_iterations = 20000) const;

 private:
  std::vector<double> lb_, ub_, cost_;
  std::vector<std::vector<std::pair<int, double>>> rows_;
  std::vector<Sense> sense_;
  std::vector<double> rhs_;
};

}  // namespace uppclear::lp
