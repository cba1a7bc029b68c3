#include "uppclear/dense_lp.hpp"

#include <cmath>
#include <stdexcept>

namespace uppclear::lp {

namespace {
constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kPhase1Tol = 1e-7;
}  // namespace

int DenseLp::add_var(double lb, double ub, double cost) {
  if (lb > ub) throw std::invalid_argument("DenseLp: lb > ub");
  lb_.push_back(lb);
  ub_.push_back(ub);
  cost_.push_back(cost);
  return static_cast<int>(cost_.size()) - 1;
}

void DenseLp::add_row(const std::vector<std::pair<int, double>>& terms, Sense sense, double rhs) {
  for (const auto& [j, a] : terms)
    if (j < 0 || j >= num_vars()) throw std::out_of_range("DenseLp: row references unknown column");
  rows_.push_back(terms);
  sense_.push_back(sense);
  rhs_.push_back(rhs);
}

Solution DenseLp::minimize(int max_iterations) const {
  const int n = num_vars();
  const int m = num_rows();
  int n_slack = 0;
  for (Sense s : sense_)
    if (s != Sense::EQ) ++n_slack;
  const int N = n + n_slack;  // tableau columns; artificials N..N+m-1 are implicit
  const int total = N + m;

  std::vector<double> lo(total, 0.0), hi(total, kInf), x(total, 0.0);
  for (int j = 0; j < n; ++j) {
    lo[j] = lb_[j];
    hi[j] = ub_[j];
    x[j] = std::isfinite(lo[j]) ? lo[j] : (std::isfinite(hi[j]) ? hi[j] : 0.0);
  }

  std::vector<double> T(static_cast<std::size_t>(m) * N, 0.0);
  auto at = [&](int i, int j) -> double& { return T[static_cast<std::size_t>(i) * N + j]; };
  {
    int s = n;
    for (int i = 0; i < m; ++i) {
      for (const auto& [j, a] : rows_[i]) at(i, j) += a;
      if (sense_[i] == Sense::LE) at(i, s++) = 1.0;
      else if (sense_[i] == Sense::GE) at(i, s++) = -1.0;
    }
  }
  std::vector<int> basis(m);
  std::vector<char> basic(total, 0);
  for (int i = 0; i < m; ++i) {
    double r = rhs_[i];
    for (int j = 0; j < N; ++j) r -= at(i, j) * x[j];
    if (r < 0) {
      for (int j = 0; j < N; ++j) at(i, j) = -at(i, j);
      r = -r;
    }
    basis[i] = N + i;
    basic[N + i] = 1;
    x[N + i] = r;
  }

  Solution sol;
  std::vector<double> c(total, 0.0), d(N);

  auto run_phase = [&]() -> Status {
    while (true) {
      if (sol.iterations >= max_iterations) return Status::IterationLimit;
      // Reduced costs of nonbasic tableau columns.
      for (int j = 0; j < N; ++j) d[j] = c[j];
      for (int i = 0; i < m; ++i) {
        double cb = c[basis[i]];
        if (cb == 0.0) continue;
        const double* row = &T[static_cast<std::size_t>(i) * N];
        for (int j = 0; j < N; ++j) d[j] -= cb * row[j];
      }
      int enter = -1, dir = 0;
      for (int j = 0; j < N; ++j) {
        if (basic[j] || lo[j] == hi[j]) continue;
        if (d[j] < -kCostTol && x[j] < hi[j]) { enter = j; dir = 1; break; }
        if (d[j] > kCostTol && x[j] > lo[j]) { enter = j; dir = -1; break; }
      }
      if (enter < 0) return Status::Optimal;

      double theta = kInf;
      int leave_row = -1;
      if (dir > 0 && std::isfinite(hi[enter])) theta = hi[enter] - x[enter];
      if (dir < 0 && std::isfinite(lo[enter])) theta = x[enter] - lo[enter];
      for (int i = 0; i < m; ++i) {
        double g = -dir * at(i, enter);
        int b = basis[i];
        double lim;
        if (g < -kPivotTol && std::isfinite(lo[b]))
          lim = (x[b] - lo[b]) / -g;
        else if (g > kPivotTol && std::isfinite(hi[b]))
          lim = (hi[b] - x[b]) / g;
        else
          continue;
        if (lim < 0) lim = 0;
        if (lim < theta - 1e-12 || (lim <= theta + 1e-12 && leave_row >= 0 && b < basis[leave_row])) {
          theta = lim;
          leave_row = i;
        }
      }
      if (!std::isfinite(theta)) return Status::Unbounded;
      ++sol.iterations;

      for (int i = 0; i < m; ++i) x[basis[i]] -= dir * at(i, enter) * theta;
      x[enter] += dir * theta;
      if (leave_row < 0) continue;  // bound flip

      int leaving = basis[leave_row];
      double g = -dir * at(leave_row, enter);
      x[leaving] = g < 0 ? lo[leaving] : hi[leaving];
      double piv = at(leave_row, enter);
      double* prow = &T[static_cast<std::size_t>(leave_row) * N];
      for (int j = 0; j < N; ++j) prow[j] /= piv;
      for (int i = 0; i < m; ++i) {
        if (i == leave_row) continue;
        double f = at(i, enter);
        if (f == 0.0) continue;
        double* row = &T[static_cast<std::size_t>(i) * N];
        for (int j = 0; j < N; ++j) row[j] -= f * prow[j];
        row[enter] = 0.0;
      }
      basic[leaving] = 0;
      basic[enter] = 1;
      basis[leave_row] = enter;
    }
  };

  for (int i = 0; i < m; ++i) c[N + i] = 1.0;
  Status st = run_phase();
  if (st == Status::IterationLimit) {
    sol.status = st;
    return sol;
  }
  double infeas = 0.0;
  for (int i = 0; i < m; ++i) infeas += x[N + i];
  if (infeas > kPhase1Tol) {
    sol.status = Status::Infeasible;
    return sol;
  }

  for (int i = 0; i < m; ++i) {
    c[N + i] = 0.0;
    hi[N + i] = 0.0;
  }
  for (int j = 0; j < n; ++j) c[j] = cost_[j];
  st = run_phase();
  sol.status = st;
  if (st != Status::Optimal) return sol;
  sol.x.assign(x.begin(), x.begin() + n);
  for (int j = 0; j < n; ++j) sol.objective += cost_[j] * sol.x[j];
  return sol;
}

}  // namespace uppclear::lp
