#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "uppclear/solver.hpp"

namespace uppclear {

namespace {

std::string num(double v) {
  if (v == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

template <typename T, typename Key>
std::vector<int> family_order(const std::vector<T>& items, Key key) {
  std::vector<int> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key(items[a]) < key(items[b]); });
  return order;
}

std::string alias(char prefix, int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%07d", prefix, i + 1);
  return buf;
}

// Fixed-format MPS fields start at columns 2, 5, 15, 25, 40, 50.
std::string fixed_line(const std::string& f1, const std::string& f2, const std::string& f3 = "",
                       const std::string& f4 = "", const std::string& f5 = "", const std::string& f6 = "") {
  std::string line = " " + f1;
  auto pad = [&](std::size_t col, const std::string& s) {
    if (s.empty()) return;
    if (line.size() < col - 1) line.resize(col - 1, ' ');
    else line += ' ';
    line += s;
  };
  pad(5, f2);
  pad(15, f3);
  pad(25, f4);
  pad(40, f5);
  pad(50, f6);
  while (!line.empty() && line.back() == ' ') line.pop_back();
  return line;
}

}  // namespace

std::vector<int> canonical_column_order(const MilpModel& model) {
  return family_order(model.vars(), [](const Variable& v) -> const std::string& { return v.family; });
}

std::vector<int> canonical_row_order(const MilpModel& model) {
  return family_order(model.rows(), [](const Constraint& c) -> const std::string& { return c.family; });
}

std::string model_to_mps(const MilpModel& model, MpsFlavor flavor) {
  const bool fixed = flavor == MpsFlavor::Fixed;
  const auto& vars = model.vars();
  const auto& rows = model.rows();
  auto corder = canonical_column_order(model);
  auto rorder = canonical_row_order(model);
  std::vector<std::string> cname(vars.size()), rname(rows.size());
  for (std::size_t p = 0; p < corder.size(); ++p)
    cname[corder[p]] = fixed ? alias('C', static_cast<int>(p)) : vars[corder[p]].name;
  for (std::size_t p = 0; p < rorder.size(); ++p)
    rname[rorder[p]] = fixed ? alias('R', static_cast<int>(p)) : rows[rorder[p]].name;

  // Column-wise entries in canonical row order.
  std::vector<std::vector<std::pair<int, double>>> col(vars.size());
  for (int r : rorder)
    for (const auto& t : rows[r].terms) col[t.var].emplace_back(r, t.coef);

  std::ostringstream os;
  auto line = [&](const std::string& f1, const std::string& f2, const std::string& f3 = "",
                  const std::string& f4 = "") {
    if (fixed)
      os << fixed_line(f1, f2, f3, f4) << '\n';
    else {
      os << ' ' << f1;
      for (const auto* s : {&f2, &f3, &f4})
        if (!s->empty()) os << "  " << *s;
      os << '\n';
    }
  };

  os << "NAME          UPPCLEAR\n";
  os << "OBJSENSE\n    " << (model.maximize() ? "MAX" : "MIN") << "\n";
  os << "ROWS\n";
  line("N", "OBJ");
  for (int r : rorder) {
    const char* s = rows[r].sense == Sense::LE ? "L" : rows[r].sense == Sense::GE ? "G" : "E";
    line(s, rname[r]);
  }
  os << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  auto toggle = [&](bool want) {
    if (want == in_int) return;
    std::string m = "MARKER" + std::to_string(marker++);
    if (fixed)
      os << fixed_line("", m, "'MARKER'", "", want ? "'INTORG'" : "'INTEND'") << '\n';
    else
      os << "    " << m << "  'MARKER'  " << (want ? "'INTORG'" : "'INTEND'") << '\n';
    in_int = want;
  };
  for (int j : corder) {
    toggle(vars[j].type == VarType::Binary);
    double c = model.objective()[j];
    if (c != 0.0 || col[j].empty()) line("", cname[j], "OBJ", num(c));
    for (const auto& [r, a] : col[j]) line("", cname[j], rname[r], num(a));
  }
  toggle(false);
  os << "RHS\n";
  for (int r : rorder)
    if (rows[r].rhs != 0.0) line("", "RHS", rname[r], num(rows[r].rhs));
  os << "BOUNDS\n";
  for (int j : corder) {
    const auto& v = vars[j];
    const auto& n = cname[j];
    const bool lfin = std::isfinite(v.lb), ufin = std::isfinite(v.ub);
    if (lfin && ufin && v.lb == v.ub) {
      line("FX", "BND", n, num(v.lb));
    } else if (!lfin && !ufin) {
      line("FR", "BND", n);
    } else {
      if (!lfin)
        line("MI", "BND", n);
      else if (v.lb != 0.0 || (ufin && v.ub < 0.0))
        line("LO", "BND", n, num(v.lb));
      if (ufin) line("UP", "BND", n, num(v.ub));
      else if (v.type == VarType::Binary) line("PL", "BND", n);
    }
  }
  os << "ENDATA\n";
  return os.str();
}

void emit_model(const MilpModel& model, const std::filesystem::path& path, MpsFlavor flavor) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << model_to_mps(model, flavor);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace uppclear
