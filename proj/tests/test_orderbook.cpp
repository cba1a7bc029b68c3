#include <doctest.h>

#include <cmath>
#include <set>

#include "support.hpp"
#include "uppclear/synth.hpp"

using namespace uppclear;

namespace {

std::string header(const std::string& hours = "1", int digits = 3) {
  return "FORMAT;upp-instance/1\n[CONFIG]\nkey;value\ndigits;" + std::to_string(digits) + "\nhours;" + hours +
         "\n[ZONE]\nid;upp\nNORD;1\nSUD;0\n";
}

}  // namespace

TEST_CASE("quantities are exact multiples of the resolution") {
  CHECK(parse_quantity("12.345", 3)->units == 12345);
  CHECK(parse_quantity("7", 3)->units == 7000);
  CHECK(parse_quantity("0.5", 1)->units == 5);
  CHECK_FALSE(parse_quantity("1.0005", 3).has_value());
  CHECK(parse_quantity("1.0005", 4)->units == 10005);
  CHECK_FALSE(parse_quantity("abc", 3).has_value());
  CHECK(format_quantity(Qty{12345}, 3) == "12.345");
  CHECK(format_quantity(Qty{5}, 0) == "5");
  CHECK(to_mwh(Qty{1500}, 3) == doctest::Approx(1.5));
}

TEST_CASE("load_instance reads the fixtures") {
  auto inst = testing_support::load_fixture("upp_partial_execution.txt");
  REQUIRE(inst.demands.size() == 2);
  CHECK(inst.demands[0].merit == 1);
  CHECK(inst.demands[1].merit == 2);
  CHECK(inst.mwh(inst.supplies[0].quantity) == doctest::Approx(15.0));
  auto blocks = testing_support::load_fixture("blocks_moneyness.txt");
  REQUIRE(blocks.blocks.size() == 3);
  CHECK(blocks.blocks[1].mar == doctest::Approx(0.1));
  CHECK(blocks.blocks[1].profile.at(2).units == 60);
}

TEST_CASE("parse errors carry the line number") {
  try {
    parse_instance(header() + "[DEMAND]\nid;zone;hour;price;quantity;upp;merit\nk1;NORD;1;abc;1.000;1;1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 12);
  }
  CHECK_THROWS_AS(parse_instance("NOPE\n"), ParseError);
  CHECK_THROWS_AS(parse_instance(header() + "[WHAT]\n"), ParseError);
}

TEST_CASE("validation errors name the order and the rule") {
  try {
    parse_instance(header() + "[DEMAND]\nid;zone;hour;price;quantity;upp;merit\nk1;SUD;1;50;1.000;1;1\n");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.subject() == "k1");
    CHECK(e.rule() == "UPP order in non-UPP zone");
  }
  try {
    parse_instance(header() + "[SUPPLY]\nid;zone;hour;price;quantity\ns1;NORD;1;3500;1.000\n");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.subject() == "s1");
    CHECK(e.rule() == "price outside [0, price_cap]");
  }
  CHECK_THROWS_AS(parse_instance(header() + "[SUPPLY]\nid;zone;hour;price;quantity\ns1;NORD;1;30;1.0005\n"),
                  ValidationError);
}

TEST_CASE("unknown zones and hours are reference errors") {
  CHECK_THROWS_AS(parse_instance(header() + "[SUPPLY]\nid;zone;hour;price;quantity\ns1;EST;1;30;1.000\n"),
                  ReferenceError);
  CHECK_THROWS_AS(parse_instance(header() + "[SUPPLY]\nid;zone;hour;price;quantity\ns1;NORD;7;30;1.000\n"),
                  ReferenceError);
}

TEST_CASE("assign_merit orders by price then id") {
  MarketInstance inst;
  inst.hours = {1};
  inst.zones = {{"Z", true}};
  inst.demands = {{"a", "Z", 1, 60, Qty{1}, true}, {"b", "Z", 1, 50, Qty{1}, true}, {"c", "Z", 1, 60, Qty{1}, true}};
  auto m = assign_merit(inst);
  CHECK(m.demands[0].merit == 1);
  CHECK(m.demands[2].merit == 2);
  CHECK(m.demands[1].merit == 3);

  inst.demands = {{"z", "Z", 1, 40, Qty{1}, true}, {"a", "Z", 1, 40, Qty{1}, true}};
  m = assign_merit(inst);
  CHECK(m.demands[1].merit == 1);
  CHECK(m.demands[0].merit == 2);
}

TEST_CASE("serialize and parse round-trip") {
  for (const char* f : {"single_zone_curves.txt", "upp_partial_execution.txt", "blocks_moneyness.txt", "two_zone_hours.txt"}) {
    auto inst = testing_support::load_fixture(f);
    CHECK(parse_instance(serialize_instance(inst)) == inst);
  }
  auto gen = generate_synthetic(3, 4, {"NORD", "SVIZ"}, {9, 20});
  CHECK(parse_instance(serialize_instance(gen)) == gen);
}

TEST_CASE("restrict_to_hour keeps one hour of orders and capacity") {
  auto inst = testing_support::load_fixture("two_zone_hours.txt");
  auto h2 = restrict_to_hour(inst, 2);
  CHECK(h2.hours == std::vector<Hour>{2});
  CHECK(h2.demands.size() == 3);
  CHECK(h2.supplies.size() == 4);
  REQUIRE(h2.links.size() == 2);
  CHECK(h2.links[0].capacity_at(2).units == 20);
  CHECK(h2.links[0].capacity_at(1).units == 0);
  CHECK(h2.links[0].capacity.size() == 1);
  CHECK_THROWS_AS(restrict_to_hour(testing_support::load_fixture("blocks_moneyness.txt"), 1), std::invalid_argument);
}

TEST_CASE("synthetic blocks follow the generator recipe") {
  auto inst = generate_synthetic(11, 50, {"NORD", "SVIZ"}, {9, 20});
  REQUIRE(inst.blocks.size() == 50);
  int nord = 0;
  for (const auto& b : inst.blocks) {
    CHECK(b.profile.size() == 12);
    CHECK(b.profile.begin()->first == 9);
    CHECK(b.profile.rbegin()->first == 20);
    CHECK(b.mar == doctest::Approx(0.10));
    CHECK(b.price >= 0.0);
    CHECK(b.price <= inst.config.price_cap);
    CHECK(std::abs(b.price * 100 - std::round(b.price * 100)) < 1e-9);
    for (const auto& [t, q] : b.profile) {
      CHECK(inst.mwh(q) >= 1.0);
      CHECK(inst.mwh(q) <= 75.0);
    }
    nord += b.zone == "NORD";
  }
  CHECK(nord == 25);
  CHECK(generate_synthetic(11, 0, {"NORD", "SVIZ"}, {9, 20}).blocks.empty());
  CHECK(serialize_instance(generate_synthetic(11, 50, {"NORD", "SVIZ"}, {9, 20})) == serialize_instance(inst));
  CHECK(serialize_instance(generate_synthetic(12, 50, {"NORD", "SVIZ"}, {9, 20})) != serialize_instance(inst));
  CHECK_THROWS_AS(generate_synthetic(1, 2, {"NORD", "NORD"}, {9, 20}), std::invalid_argument);
  CHECK_THROWS_AS(generate_synthetic(1, 2, {"NORD", "SVIZ"}, {20, 9}), std::invalid_argument);
}

TEST_CASE("random instances stay within the oracle shape") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto inst = random_instance(seed);
    CHECK(inst.zones.size() <= 3);
    CHECK(inst.hours.size() <= 3);
    CHECK(inst.blocks.size() <= 2);
    CHECK_NOTHROW(validate_instance(inst));
    for (Hour t : inst.hours) {
      std::set<double> prices;
      int n = 0;
      for (const auto& d : inst.demands)
        if (d.hour == t && d.pays_upp) {
          ++n;
          CHECK(prices.insert(d.price).second);
        }
      CHECK(n <= 6);
    }
    CHECK(serialize_instance(random_instance(seed)) == serialize_instance(inst));
  }
}
