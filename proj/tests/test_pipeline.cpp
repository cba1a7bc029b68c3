#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "support.hpp"
#include "uppclear/oracle.hpp"
#include "uppclear/pipeline.hpp"
#include "uppclear/synth.hpp"

using namespace uppclear;
namespace fs = std::filesystem;

TEST_CASE("fixtures clear and validate") {
  for (const char* f : {"single_zone_curves.txt", "upp_partial_execution.txt", "blocks_moneyness.txt", "two_zone_hours.txt"}) {
    auto inst = testing_support::load_fixture(f);
    auto out = clear_instance(inst);
    for (const auto& e : out.report.failures()) MESSAGE(f, ": ", e.rule, " ", e.scope, " ", e.detail);
    CHECK_MESSAGE(out.ok(), f);
    CHECK(out.decomposed == (inst.blocks.empty() && inst.hours.size() > 1));
  }
}

TEST_CASE("empty order book is refused") {
  MarketInstance inst;
  inst.hours = {1};
  inst.zones = {{"Z", true}};
  CHECK_THROWS_AS(clear_instance(inst), EmptyInstanceError);
}

TEST_CASE("decomposition selection") {
  auto blocks = testing_support::load_fixture("blocks_moneyness.txt");
  auto plain = testing_support::load_fixture("two_zone_hours.txt");
  CHECK_FALSE(use_hourly(blocks, Decomposition::Auto));
  CHECK_THROWS_AS(use_hourly(blocks, Decomposition::Hourly), std::invalid_argument);
  CHECK(use_hourly(plain, Decomposition::Auto));
  CHECK_FALSE(use_hourly(plain, Decomposition::WholeDay));
  CHECK_FALSE(use_hourly(restrict_to_hour(plain, 1), Decomposition::Auto));
}

TEST_CASE("hourly and whole-day solves agree on blockless instances") {
  RandomShape shape;
  shape.allow_blocks = false;
  shape.max_zones = 2;
  int compared = 0;
  for (std::uint64_t seed = 900; seed < 906; ++seed) {
    auto inst = random_instance(seed, shape);
    if (inst.hours.size() < 2) continue;
    ClearOptions hourly, whole;
    hourly.decomposition = Decomposition::Hourly;
    whole.decomposition = Decomposition::WholeDay;
    auto a = clear_instance(inst, hourly);
    auto b = clear_instance(inst, whole);
    REQUIRE(a.status == b.status);
    if (a.status != SolveStatus::Optimal) continue;
    CHECK(a.ok());
    CHECK(b.ok());
    for (Hour t : inst.hours)
      CHECK(testing_support::hour_welfare(inst, *a.result, t) ==
            doctest::Approx(testing_support::hour_welfare(inst, *b.result, t)).epsilon(1e-9));
    ++compared;
  }
  CHECK(compared > 0);
}

TEST_CASE("artifacts land in the output directory") {
  auto dir = fs::temp_directory_path() / "uppclear_test_pipeline";
  fs::remove_all(dir);
  ClearOptions o;
  o.out_dir = dir;
  auto out = clear_instance(testing_support::load_fixture("two_zone_hours.txt"), o);
  REQUIRE(out.ok());
  REQUIRE(out.parts.size() == 3);
  for (int t = 1; t <= 3; ++t) {
    CHECK(fs::exists(dir / ("hour_" + std::to_string(t)) / "model.mps"));
    CHECK(fs::exists(dir / ("hour_" + std::to_string(t)) / "solution.sol"));
  }
  fs::remove_all(dir);

  o.out_dir = dir;
  out = clear_instance(testing_support::load_fixture("upp_partial_execution.txt"), o);
  REQUIRE(out.ok());
  CHECK(fs::exists(dir / "model.mps"));
  CHECK(fs::exists(dir / "refine" / "model.mps"));
  fs::remove_all(dir);
}

TEST_CASE("price refinement lands on the exact average") {
  auto inst = testing_support::load_fixture("upp_partial_execution.txt");
  auto out = clear_instance(inst);
  REQUIRE(out.ok());
  const auto* h = out.result->hour(1);
  CHECK(h->pi_determined);
  CHECK(h->pi == doctest::Approx(50.0));
  CHECK(h->kappa == doctest::Approx(0.0));
  CHECK(out.result->zeta(1, "Z") == doctest::Approx(50.0));
  CHECK(out.result->welfare == doctest::Approx(250.0));

  ClearOptions raw;
  raw.refine_prices = false;
  auto unrefined = clear_instance(inst, raw);
  REQUIRE(unrefined.ok());
  CHECK(unrefined.result->welfare == doctest::Approx(250.0));
  CHECK(std::abs(unrefined.result->hour(1)->kappa) >= std::abs(h->kappa) - 1e-9);
}

TEST_CASE("block moneyness") {
  auto inst = testing_support::load_fixture("blocks_moneyness.txt");
  auto out = clear_instance(inst);
  REQUIRE(out.ok());
  const auto& res = *out.result;
  for (std::size_t p = 0; p < inst.blocks.size(); ++p) {
    const auto& b = inst.blocks[p];
    const double r = res.blocks[p].ratio;
    const double surplus = block_surplus(inst, res, b);
    if (b.id == "ITM") {
      CHECK(r == doctest::Approx(1.0));
      CHECK(surplus > 0);
    } else if (b.id == "OTM") {
      CHECK(r == doctest::Approx(0.0));
      CHECK(surplus < 0);
    } else {
      CHECK(r == doctest::Approx(2.0 / 3.0));
      CHECK(r > b.mar);
      CHECK(r < 1.0);
      CHECK(surplus == doctest::Approx(0.0).epsilon(1e-6));
    }
  }
  OracleLimits lim;
  lim.max_blocks = 3;
  auto oracle = enumerate_clear(inst, lim);
  REQUIRE(oracle.feasible);
  CHECK(res.welfare == doctest::Approx(oracle.best_welfare).epsilon(1e-9));
}
