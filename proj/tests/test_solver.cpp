#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "uppclear/builder.hpp"
#include "uppclear/decode.hpp"
#include "uppclear/oracle.hpp"
#include "uppclear/solver.hpp"

using namespace uppclear;
namespace fs = std::filesystem;

namespace {

MilpModel max_x() {
  MilpModel m;
  int x = m.add_var("x", "x", 0.0, kInf);
  m.add_row("cap", "cap", {{x, 1.0}}, Sense::LE, 5.0);
  m.set_objective(x, 1.0);
  return m;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("uppclear_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("empty model emits an empty constraint section") {
  MilpModel m;
  const auto text = model_to_mps(m);
  CHECK(text.find("ROWS\n N  OBJ\nCOLUMNS\n") != std::string::npos);
  CHECK(text.find("ENDATA") != std::string::npos);
  auto raw = solve(m);
  CHECK(raw.status == SolveStatus::Optimal);
  CHECK(raw.values.empty());
}

TEST_CASE("binaries are declared integral with bounds 0..1") {
  MilpModel m;
  int u = m.add_binary("u[1]", "u");
  m.set_objective(u, 1.0);
  const auto text = model_to_mps(m);
  const auto org = text.find("'INTORG'");
  const auto col = text.find(" u[1]  OBJ  1");
  const auto end = text.find("'INTEND'");
  REQUIRE(org != std::string::npos);
  REQUIRE(col != std::string::npos);
  REQUIRE(end != std::string::npos);
  CHECK(org < col);
  CHECK(col < end);
  CHECK(text.find(" UP  BND  u[1]  1") != std::string::npos);
  auto raw = solve(m);
  CHECK(raw.status == SolveStatus::Optimal);
  CHECK(raw.values.at(0) == 1.0);
}

TEST_CASE("emission is byte-identical and idempotent") {
  auto built = build_model(testing_support::load_fixture("two_zone_hours.txt"));
  auto dir = scratch("emit");
  emit_model(built.model, dir / "a.mps");
  emit_model(built.model, dir / "b.mps");
  emit_model(built.model, dir / "b.mps");
  auto read = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  CHECK(read(dir / "a.mps") == read(dir / "b.mps"));
  CHECK(read(dir / "a.mps") == model_to_mps(built.model));
  fs::remove_all(dir);
}

TEST_CASE("canonical order groups by family then creation") {
  MilpModel m;
  m.add_var("z[1]", "z", 0, 1);
  m.add_var("a[1]", "a", 0, 1);
  m.add_var("z[2]", "z", 0, 1);
  m.add_var("a[2]", "a", 0, 1);
  CHECK(canonical_column_order(m) == std::vector<int>{1, 3, 0, 2});
}

TEST_CASE("numbers keep 15 significant digits") {
  MilpModel m;
  int x = m.add_var("x", "x", 0.0, 1.0 / 3.0);
  m.set_objective(x, 123456.789012345678);
  const auto text = model_to_mps(m);
  CHECK(text.find("0.333333333333333") != std::string::npos);
  CHECK(text.find("123456.789012346") != std::string::npos);
}

TEST_CASE("max x with x <= 5 solves to 5") {
  auto raw = solve(max_x());
  REQUIRE(raw.status == SolveStatus::Optimal);
  CHECK(raw.objective == doctest::Approx(5.0));
  CHECK(raw.values.at(0) == doctest::Approx(5.0));
  CHECK(raw.work_dir.empty());
}

TEST_CASE("contradictory bounds are infeasible") {
  MilpModel m;
  int x = m.add_var("x", "x", -kInf, kInf);
  m.add_row("lo", "lo", {{x, 1.0}}, Sense::GE, 1.0);
  m.add_row("hi", "hi", {{x, 1.0}}, Sense::LE, 0.0);
  CHECK(solve(m).status == SolveStatus::Infeasible);
}

TEST_CASE("fixed flavor round-trips through aliases") {
  SolveOptions o = default_solve_options();
  o.flavor = MpsFlavor::Fixed;
  auto m = max_x();
  const auto text = model_to_mps(m, MpsFlavor::Fixed);
  CHECK(text.find("C0000001") != std::string::npos);
  CHECK(text.find("R0000001") != std::string::npos);
  CHECK(text.find(" x ") == std::string::npos);
  auto raw = solve(m, o);
  REQUIRE(raw.status == SolveStatus::Optimal);
  CHECK(raw.values.at(0) == doctest::Approx(5.0));
}

TEST_CASE("the scipy engine agrees on a small MILP") {
  SolveOptions o = default_solve_options();
  o.backend = "scipy";
  MilpModel m;
  int u = m.add_binary("u[1]", "u");
  int x = m.add_var("x[1]", "x", 0, 10);
  m.add_row("link", "link", {{x, 1.0}, {u, -7.5}}, Sense::LE, 0.0);
  m.set_objective(x, 1.0);
  m.set_objective(u, -1.0);
  auto raw = solve(m, o);
  REQUIRE(raw.status == SolveStatus::Optimal);
  CHECK(raw.objective == doctest::Approx(6.5));
}

TEST_CASE("work directory is kept on request") {
  SolveOptions o = default_solve_options();
  o.work_dir = scratch("keep");
  o.keep_files = true;
  auto raw = solve(max_x(), o);
  CHECK(raw.status == SolveStatus::Optimal);
  CHECK(fs::exists(o.work_dir / "model.mps"));
  CHECK(fs::exists(o.work_dir / "solution.sol"));
  fs::remove_all(o.work_dir);
}

TEST_CASE("backend failures surface as typed errors") {
  SolveOptions o = default_solve_options();
  o.command = "definitely-not-a-solver-binary {model}";
  CHECK_THROWS_AS(solve(max_x(), o), BackendNotFound);

  o = default_solve_options();
  o.helper = "/nonexistent/solve_mps.py";
  CHECK_THROWS_AS(solve(max_x(), o), BackendNotFound);

  o = default_solve_options();
  o.command = "sh -c 'echo solver exploded >&2; exit 3'";
  try {
    solve(max_x(), o);
    FAIL("expected BackendCrash");
  } catch (const BackendCrash& e) {
    CHECK(e.stderr_text().find("solver exploded") != std::string::npos);
    CHECK(std::string(e.what()).find("solver exploded") != std::string::npos);
  }

  o.command = "sh -c 'echo garbage > {solution}'";
  CHECK_THROWS_AS(solve(max_x(), o), SolutionParseError);
  o.command = "true";
  CHECK_THROWS_AS(solve(max_x(), o), SolutionParseError);

  o = default_solve_options();
  o.backend = "cplex";
  CHECK_THROWS_AS(validate_solve_options(o), std::invalid_argument);
  o = default_solve_options();
  o.rel_gap = -1;
  CHECK_THROWS_AS(validate_solve_options(o), std::invalid_argument);
  o = default_solve_options();
  o.time_limit = 0;
  CHECK_THROWS_AS(validate_solve_options(o), std::invalid_argument);
}

TEST_CASE("solution parser") {
  auto p = parse_highs_solution(
      "Model status\nOptimal\n\n# Primal solution values\nFeasible\nObjective 12.5\n# Columns 2\nx 1.5\ny[1,a] 2\n# Rows 0\n");
  CHECK(p.model_status == "Optimal");
  CHECK(p.has_primal);
  CHECK(p.objective == 12.5);
  CHECK(p.columns.at("y[1,a]") == 2.0);

  auto none = parse_highs_solution("Model status\nInfeasible\n\n# Primal solution values\nNone\n");
  CHECK(none.model_status == "Infeasible");
  CHECK_FALSE(none.has_primal);

  CHECK_THROWS_AS(parse_highs_solution(""), SolutionParseError);
  CHECK_THROWS_AS(parse_highs_solution("Model status\nOptimal\n\n# Primal solution values\nFeasible\nObjective x\n"),
                  SolutionParseError);
  CHECK_THROWS_AS(
      parse_highs_solution("Model status\nOptimal\n\n# Primal solution values\nFeasible\nObjective 1\n# Columns 2\nx 1\n"),
      SolutionParseError);
}

TEST_CASE("single-zone market solves to the oracle welfare") {
  auto inst = testing_support::load_fixture("single_zone_curves.txt");
  auto built = build_model(inst);
  auto raw = solve(built.model);
  REQUIRE(raw.status == SolveStatus::Optimal);
  auto oracle = enumerate_clear_serial(inst);
  REQUIRE(oracle.feasible);
  CHECK(raw.objective == doctest::Approx(oracle.best_welfare).epsilon(1e-9));
  CHECK(raw.objective == doctest::Approx(700.0));
}

TEST_CASE("solved values satisfy every model row") {
  for (const char* f : {"upp_partial_execution.txt", "blocks_moneyness.txt", "two_zone_hours.txt"}) {
    auto inst = testing_support::load_fixture(f);
    if (inst.hours.size() > 1 && inst.blocks.empty()) inst = restrict_to_hour(inst, inst.hours[1]);
    auto built = build_model(inst);
    auto raw = solve(built.model);
    REQUIRE(raw.status == SolveStatus::Optimal);
    for (std::size_t r = 0; r < built.model.rows().size(); ++r)
      CHECK_MESSAGE(std::abs(built.model.row_violation(r, raw.values)) <= 1e-6, built.model.rows()[r].name);
    for (std::size_t j = 0; j < built.model.vars().size(); ++j) {
      const auto& v = built.model.vars()[j];
      CHECK(raw.values[j] >= v.lb - 1e-6);
      CHECK(raw.values[j] <= v.ub + 1e-6);
    }
  }
}
