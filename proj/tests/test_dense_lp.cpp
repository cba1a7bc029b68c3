#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "uppclear/dense_lp.hpp"

using namespace uppclear;
using lp::DenseLp;
using lp::Status;

TEST_CASE("bounded variable simplex basics") {
  DenseLp lp;
  int x = lp.add_var(0, kInf, -1);
  int y = lp.add_var(0, kInf, -1);
  lp.add_row({{x, 1}, {y, 2}}, Sense::LE, 4);
  lp.add_row({{x, 3}, {y, 1}}, Sense::LE, 6);
  auto s = lp.minimize();
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.objective == doctest::Approx(-2.8));
  CHECK(s.x[x] == doctest::Approx(1.6));
  CHECK(s.x[y] == doctest::Approx(1.2));
}

TEST_CASE("equality, free variables and negative bounds") {
  DenseLp lp;
  int x = lp.add_var(-kInf, kInf, 1);
  int y = lp.add_var(-3, 2, 0);
  lp.add_row({{x, 1}, {y, 1}}, Sense::EQ, 1);
  auto s = lp.minimize();
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.x[x] == doctest::Approx(-1));
  CHECK(s.x[y] == doctest::Approx(2));
}

TEST_CASE("infeasible and unbounded") {
  DenseLp a;
  int x = a.add_var(0, 1, 0);
  a.add_row({{x, 1}}, Sense::GE, 2);
  CHECK(a.minimize().status == Status::Infeasible);

  DenseLp b;
  int y = b.add_var(0, kInf, -1);
  b.add_row({{y, 1}}, Sense::GE, 1);
  CHECK(b.minimize().status == Status::Unbounded);
}

TEST_CASE("empty rows and crossed bounds") {
  DenseLp a;
  a.add_var(0, 1, 1);
  a.add_row({}, Sense::LE, 1);
  CHECK(a.minimize().status == Status::Optimal);
  a.add_row({}, Sense::GE, 1);
  CHECK(a.minimize().status == Status::Infeasible);

  DenseLp b;
  CHECK_THROWS_AS(b.add_var(2, 1, 0), std::invalid_argument);
}

TEST_CASE("transportation problem against a hand optimum") {
  // 2 sources (cap 20, 30), 3 sinks (demand 10, 25, 15)
  const double cost[2][3] = {{8, 6, 10}, {9, 12, 13}};
  DenseLp lp;
  int v[2][3];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) v[i][j] = lp.add_var(0, kInf, cost[i][j]);
  const double cap[2] = {20, 30}, dem[3] = {10, 25, 15};
  for (int i = 0; i < 2; ++i) lp.add_row({{v[i][0], 1}, {v[i][1], 1}, {v[i][2], 1}}, Sense::LE, cap[i]);
  for (int j = 0; j < 3; ++j) lp.add_row({{v[0][j], 1}, {v[1][j], 1}}, Sense::GE, dem[j]);
  auto s = lp.minimize();
  REQUIRE(s.status == Status::Optimal);
  // all 50 units must ship; brute force over the two free splits
  double best = kInf;
  for (int a = 0; a <= 10; ++a)
    for (int b = 0; b <= 20 - a; ++b) {
      int c = 20 - a - b;
      if (c > 15 || b > 25) continue;
      best = std::min(best, 8.0 * a + 6.0 * b + 10.0 * c + 9.0 * (10 - a) + 12.0 * (25 - b) + 13.0 * (15 - c));
    }
  CHECK(s.objective == doctest::Approx(best));
}

TEST_CASE("random box LPs: solution is feasible and no grid point is better") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 40; ++trial) {
    DenseLp lp;
    const double c[2] = {u(rng), u(rng)};
    for (int j = 0; j < 2; ++j) lp.add_var(-1, 1, c[j]);
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    for (int r = 0; r < 3; ++r) {
      A.push_back({u(rng), u(rng)});
      b.push_back(0.5 + std::abs(u(rng)));  // origin stays feasible
      lp.add_row({{0, A[r][0]}, {1, A[r][1]}}, Sense::LE, b[r]);
    }
    auto s = lp.minimize();
    REQUIRE(s.status == Status::Optimal);
    CHECK(s.objective == doctest::Approx(c[0] * s.x[0] + c[1] * s.x[1]));
    for (int r = 0; r < 3; ++r) CHECK(A[r][0] * s.x[0] + A[r][1] * s.x[1] <= b[r] + 1e-9);
    for (int i = 0; i <= 40; ++i)
      for (int k = 0; k <= 40; ++k) {
        const double x0 = -1 + i / 20.0, x1 = -1 + k / 20.0;
        bool ok = true;
        for (int r = 0; r < 3; ++r) ok = ok && A[r][0] * x0 + A[r][1] * x1 <= b[r];
        if (ok) CHECK(s.objective <= c[0] * x0 + c[1] * x1 + 1e-9);
      }
  }
}
