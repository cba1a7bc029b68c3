#include "uppclear/milp_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uppclear {

int MilpModel::add_var(std::string name, std::string family, double lb, double ub, VarType type) {
  if (lb > ub) throw std::invalid_argument("variable " + name + ": lb > ub");
  int id = static_cast<int>(vars_.size());
  if (!var_index_.emplace(name, id).second) throw std::logic_error("duplicate variable " + name);
  vars_.push_back(Variable{std::move(name), std::move(family), lb, ub, type, 0});
  objective_.push_back(0.0);
  return id;
}

int MilpModel::add_row(std::string name, std::string family, std::vector<Term> terms, Sense sense, double rhs) {
  // Merge duplicate references and drop exact zeros.
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  for (const auto& t : terms) {
    if (t.var < 0 || t.var >= static_cast<int>(vars_.size()))
      throw std::logic_error("row " + name + " references an unregistered variable");
    if (!merged.empty() && merged.back().var == t.var)
      merged.back().coef += t.coef;
    else
      merged.push_back(t);
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  int id = static_cast<int>(rows_.size());
  if (!row_index_.emplace(name, id).second) throw std::logic_error("duplicate row " + name);
  rows_.push_back(Constraint{std::move(name), std::move(family), std::move(merged), sense, rhs});
  return id;
}

void MilpModel::set_objective(int var, double coef) { objective_.at(var) = coef; }

int MilpModel::find_var(const std::string& name) const {
  auto it = var_index_.find(name);
  return it == var_index_.end() ? -1 : it->second;
}

int MilpModel::find_row(const std::string& name) const {
  auto it = row_index_.find(name);
  return it == row_index_.end() ? -1 : it->second;
}

std::size_t MilpModel::count_family(const std::string& family) const {
  return std::count_if(vars_.begin(), vars_.end(), [&](const Variable& v) { return v.family == family; });
}

std::size_t MilpModel::count_row_family(const std::string& family) const {
  return std::count_if(rows_.begin(), rows_.end(), [&](const Constraint& c) { return c.family == family; });
}

std::size_t MilpModel::binary_count() const {
  return std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) { return v.type == VarType::Binary; });
}

double MilpModel::objective_value(const std::vector<double>& x) const {
  double s = 0.0;
  for (std::size_t j = 0; j < objective_.size(); ++j) s += objective_[j] * x[j];
  return s;
}

double MilpModel::row_activity(std::size_t r, const std::vector<double>& x) const {
  double a = 0.0;
  for (const auto& t : rows_[r].terms) a += t.coef * x[t.var];
  return a;
}

double MilpModel::row_violation(std::size_t r, const std::vector<double>& x) const {
  double a = row_activity(r, x);
  const auto& c = rows_[r];
  switch (c.sense) {
    case Sense::LE: return std::max(0.0, a - c.rhs);
    case Sense::GE: return std::max(0.0, c.rhs - a);
    case Sense::EQ: return std::abs(a - c.rhs);
  }
  return 0.0;
}

}  // namespace uppclear
