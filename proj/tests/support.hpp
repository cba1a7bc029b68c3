#pragma once

#include <filesystem>
#include <string>

#include "uppclear/clearing.hpp"
#include "uppclear/dense_lp.hpp"
#include "uppclear/milp_model.hpp"
#include "uppclear/orderbook.hpp"

namespace testing_support {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(UPPCLEAR_FIXTURES) / name;
}

inline uppclear::MarketInstance load_fixture(const std::string& name) {
  return uppclear::load_instance(fixture(name));
}

/// LP relaxation of a MilpModel through the oracle's simplex, binaries
/// relaxed to their bounds. Only for tiny models.
inline uppclear::lp::Solution solve_relaxation(const uppclear::MilpModel& m) {
  uppclear::lp::DenseLp lp;
  const double sign = m.maximize() ? -1.0 : 1.0;
  for (std::size_t j = 0; j < m.vars().size(); ++j)
    lp.add_var(m.vars()[j].lb, m.vars()[j].ub, sign * m.objective()[j]);
  for (const auto& r : m.rows()) {
    std::vector<std::pair<int, double>> terms;
    for (const auto& t : r.terms) terms.emplace_back(t.var, t.coef);
    lp.add_row(terms, r.sense, r.rhs);
  }
  auto sol = lp.minimize();
  sol.objective *= sign;
  return sol;
}

/// Welfare of one hour (blocks excluded).
inline double hour_welfare(const uppclear::MarketInstance& inst, const uppclear::ClearingResult& res,
                           uppclear::Hour t) {
  double w = 0.0;
  for (std::size_t k = 0; k < inst.demands.size(); ++k)
    if (inst.demands[k].hour == t) w += inst.demands[k].price * res.demands[k].executed;
  for (std::size_t p = 0; p < inst.supplies.size(); ++p)
    if (inst.supplies[p].hour == t) w -= inst.supplies[p].price * res.supplies[p].cleared;
  return w;
}

}  // namespace testing_support
