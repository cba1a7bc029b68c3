#pragma once

// Solver-neutral mixed-integer linear model.

#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

namespace uppclear {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarType { Continuous, Binary };
enum class Sense { LE, GE, EQ };

struct Variable {
  std::string name;
  std::string family;
  double lb = 0.0;
  double ub = kInf;
  VarType type = VarType::Continuous;
  int priority = 0;  // branching hint, higher branches first; 0 = default
};

struct Term {
  int var = -1;
  double coef = 0.0;
};

struct Constraint {
  std::string name;
  std::string family;
  std::vector<Term> terms;
  Sense sense = Sense::EQ;
  double rhs = 0.0;
};

class MilpModel {
 public:
  int add_var(std::string name, std::string family, double lb, double ub, VarType type = VarType::Continuous);
  int add_binary(std::string name, std::string family) { return add_var(std::move(name), std::move(family), 0, 1, VarType::Binary); }
  int add_row(std::string name, std::string family, std::vector<Term> terms, Sense sense, double rhs);

  void set_objective(int var, double coef);
  void set_maximize(bool m) { maximize_ = m; }

  const std::vector<Variable>& vars() const { return vars_; }
  std::vector<Variable>& vars() { return vars_; }
  const std::vector<Constraint>& rows() const { return rows_; }
  const std::vector<double>& objective() const { return objective_; }
  bool maximize() const { return maximize_; }

  int find_var(const std::string& name) const;
  int find_row(const std::string& name) const;
  std::size_t count_family(const std::string& family) const;
  std::size_t count_row_family(const std::string& family) const;
  std::size_t binary_count() const;

  double objective_value(const std::vector<double>& x) const;
  /// Signed violation of row r at x (0 when satisfied).
  double row_violation(std::size_t r, const std::vector<double>& x) const;
  double row_activity(std::size_t r, const std::vector<double>& x) const;

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  std::vector<double> objective_;
  std::unordered_map<std::string, int> var_index_;
  std::unordered_map<std::string, int> row_index_;
  bool maximize_ = true;
};

/// Human-readable index formatting: idx("ug", 9, "K1") -> "ug[9,K1]".
template <typename... Args>
std::string idx(const std::string& family, const Args&... args) {
  std::string out = family + "[";
  bool first = true;
  auto add = [&](const auto& a) {
    if (!first) out += ",";
    first = false;
    if constexpr (std::is_arithmetic_v<std::decay_t<decltype(a)>>)
      out += std::to_string(a);
    else
      out += a;
  };
  (add(args), ...);
  return out + "]";
}

}  // namespace uppclear
