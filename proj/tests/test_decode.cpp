#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "uppclear/builder.hpp"
#include "uppclear/decode.hpp"

using namespace uppclear;

namespace {

MarketInstance one_block() {
  MarketInstance inst;
  inst.hours = {1, 2};
  inst.zones = {{"Z", false}};
  inst.supplies = {{"s1", "Z", 1, 30, Qty{10000}}, {"s2", "Z", 2, 30, Qty{10000}}};
  inst.blocks = {{"B15", "Z", 45.0, 0.10, {{1, Qty{5000}}, {2, Qty{5000}}}}};
  return inst;
}

}  // namespace

TEST_CASE("round_binary") {
  CHECK(round_binary(0.9999999, "ug[1,k1]") == 1);
  CHECK(round_binary(1.0000009, "ug[1,k1]") == 1);
  CHECK(round_binary(-1e-7, "ug[1,k1]") == 0);
  CHECK(round_binary(0.0, "ug[1,k1]") == 0);
  CHECK_THROWS_AS(round_binary(0.4, "ug[1,k1]"), IntegralityError);
  CHECK_THROWS_AS(round_binary(0.999998, "ug[1,k1]"), IntegralityError);
  try {
    round_binary(0.4, "ug[1,k1]");
  } catch (const IntegralityError& e) {
    CHECK(std::string(e.what()).find("ug[1,k1]") != std::string::npos);
  }
}

TEST_CASE("decode reads acceptance ratio and rounds binaries") {
  auto inst = one_block();
  auto built = build_model(inst);
  RawSolution raw;
  raw.status = SolveStatus::Optimal;
  raw.values.assign(built.model.vars().size(), 0.0);
  raw.values[built.catalog.at("uB[B15]")] = 0.9999999;
  raw.values[built.catalog.at("r[B15]")] = 0.86;
  raw.values[built.catalog.at("zeta[1,Z]")] = 45.0;
  auto res = decode(inst, built, raw);
  REQUIRE(res.blocks.size() == 1);
  CHECK(res.blocks[0].accepted == 1);
  CHECK(res.blocks[0].ratio == doctest::Approx(0.86));
  CHECK(res.zeta(1, "Z") == 45.0);
  CHECK(res.source == "milp");

  raw.values[built.catalog.at("uB[B15]")] = 0.4;
  CHECK_THROWS_AS(decode(inst, built, raw), IntegralityError);

  raw.values[built.catalog.at("uB[B15]")] = 1.0;
  raw.status = SolveStatus::Infeasible;
  CHECK_THROWS_AS(decode(inst, built, raw), std::invalid_argument);
  raw.status = SolveStatus::Feasible;
  raw.values.pop_back();
  CHECK_THROWS_AS(decode(inst, built, raw), std::invalid_argument);
}

TEST_CASE("decoded UPP quantity recaps ug D + dw + dd") {
  auto inst = testing_support::load_fixture("upp_partial_execution.txt");
  auto built = build_model(inst);
  auto raw = solve(built.model);
  REQUIRE(raw.status == SolveStatus::Optimal);
  auto res = decode(inst, built, raw);
  for (std::size_t k = 0; k < inst.demands.size(); ++k) {
    const auto& r = res.demands[k];
    CHECK(r.executed == doctest::Approx(r.ug * inst.mwh(inst.demands[k].quantity) + r.dw + r.dd));
  }
  CHECK(res.demands[0].executed == doctest::Approx(10.0));
  CHECK(res.demands[1].executed == doctest::Approx(5.0));
  CHECK(res.hour(1)->pi_determined);
  CHECK(res.welfare == doctest::Approx(250.0));
}

TEST_CASE("pi is undetermined without executed UPP quantity") {
  auto inst = testing_support::load_fixture("single_zone_curves.txt");
  auto built = build_model(inst);
  auto raw = solve(built.model);
  REQUIRE(raw.status == SolveStatus::Optimal);
  auto res = decode(inst, built, raw);
  CHECK_FALSE(res.hour(1)->pi_determined);
}

TEST_CASE("clearing JSON round-trip") {
  auto inst = testing_support::load_fixture("blocks_moneyness.txt");
  auto built = build_model(inst);
  auto raw = solve(built.model);
  REQUIRE(raw.status == SolveStatus::Optimal);
  auto res = decode(inst, built, raw);
  const auto text = clearing_to_json(res);
  auto back = clearing_from_json(text);
  CHECK(clearing_to_json(back) == text);
  CHECK(back.welfare == res.welfare);
  REQUIRE(back.blocks.size() == res.blocks.size());
  for (std::size_t p = 0; p < res.blocks.size(); ++p) CHECK(back.blocks[p].ratio == res.blocks[p].ratio);
  REQUIRE(back.expansions.size() == res.expansions.size());
  for (std::size_t e = 0; e < res.expansions.size(); ++e) CHECK(back.expansions[e].bits == res.expansions[e].bits);

  CHECK_THROWS_AS(clearing_from_json("{"), std::runtime_error);
  CHECK_THROWS_AS(clearing_from_json("[]"), std::runtime_error);
}
