#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "uppclear/builder.hpp"
#include "uppclear/decode.hpp"
#include "uppclear/oracle.hpp"
#include "uppclear/synth.hpp"
#include "uppclear/validator.hpp"

using namespace uppclear;

namespace {

bool failed(const ValidationReport& rep, const std::string& rule) {
  for (const auto& e : rep.by_rule(rule))
    if (!e.pass) return true;
  return false;
}

bool failed_with(const ValidationReport& rep, const std::string& rule, const std::string& detail) {
  for (const auto& e : rep.by_rule(rule))
    if (!e.pass && e.detail.find(detail) != std::string::npos) return true;
  return false;
}

// One UPP zone, one hour, one order of 10 MWh.
struct UppCase {
  MarketInstance inst;
  ClearingResult res;

  UppCase(double price, double pi, double executed) {
    inst.config.digits = 3;
    inst.hours = {1};
    inst.zones = {{"Z", true}};
    inst.demands = {{"k", "Z", 1, price, Qty{10000}, true, 1}};
    res = empty_clearing(inst, "test");
    res.hours[0].pi = pi;
    res.demands[0].executed = executed;
  }
};

MarketInstance block_market(double block_price, double mar) {
  MarketInstance inst;
  inst.config.digits = 2;
  inst.hours = {1};
  inst.zones = {{"Z", false}};
  inst.blocks = {{"BLK", "Z", block_price, mar, {{1, Qty{1000}}}}};
  return inst;
}

ClearingResult block_result(const MarketInstance& inst, double zeta, int accepted, double r) {
  auto res = empty_clearing(inst, "test");
  res.set_zeta(1, "Z", zeta);
  res.blocks[0].accepted = accepted;
  res.blocks[0].ratio = r;
  return res;
}

// demand d 20 MWh @ 60; supply s1 15 @ 30, s2 10 @ 50; clears 20 at 50.
struct PlainCase {
  MarketInstance inst;
  ClearingResult res;

  PlainCase() {
    inst.config.digits = 0;
    inst.hours = {1};
    inst.zones = {{"Z", false}};
    inst.demands = {{"d", "Z", 1, 60, Qty{20}, false}};
    inst.supplies = {{"s1", "Z", 1, 30, Qty{15}}, {"s2", "Z", 1, 50, Qty{10}}};
    res = empty_clearing(inst, "test");
    res.set_zeta(1, "Z", 50);
    res.demands[0].executed = 20;
    res.demands[0].phi_z = 10;
    res.supplies[0].cleared = 15;
    res.supplies[0].phi_s = 20;
    res.supplies[1].cleared = 5;
    res.supplies[1].phi_s = 0;
  }
};

}  // namespace

TEST_CASE("UPP clearing rule") {
  {
    UppCase c(60, 50, 10.0);
    CHECK(check_upp_rule(c.inst, c.res).passed());
  }
  {
    UppCase c(40, 50, 0.001);
    auto rep = check_upp_rule(c.inst, c.res);
    CHECK_FALSE(rep.passed());
    CHECK(failed_with(rep, "upp_rule", "OTM executed"));
  }
  {
    UppCase c(50, 50, 5.0);
    CHECK(check_upp_rule(c.inst, c.res).passed());
  }
  {
    UppCase c(60, 50, 9.99);
    CHECK(failed_with(check_upp_rule(c.inst, c.res), "upp_rule", "ITM not fully executed"));
  }
  {
    UppCase c(50, 50 + 5e-7, 5.0);  // inside the price tolerance: still at the money
    CHECK(check_upp_rule(c.inst, c.res).passed());
  }
}

TEST_CASE("UPP equation band") {
  {
    UppCase c(60, 50, 10.0);
    c.res.set_zeta(1, "Z", 50);
    auto rep = check_upp_equation(c.inst, c.res);
    CHECK(rep.passed());
    REQUIRE(rep.by_rule("upp_equation").size() == 1);
    CHECK(rep.by_rule("upp_equation")[0].residual == 0.0);
  }
  {
    // a PUN 0.000043 below the zonal price, equal quantities: kappa = -0.00043
    UppCase c(60, 50 - 0.000043, 10.0);
    c.res.set_zeta(1, "Z", 50);
    c.res.hours[0].kappa = -0.00043;
    CHECK(check_upp_equation(c.inst, c.res).passed());
  }
  {
    UppCase c(60, 50.51, 10.0);
    c.res.set_zeta(1, "Z", 50);
    c.res.hours[0].kappa = 5.1;
    auto rep = check_upp_equation(c.inst, c.res);
    CHECK(failed(rep, "upp_equation"));
    CHECK_FALSE(failed(rep, "upp_kappa"));
  }
  {
    // reported kappa disagrees with the recomputed one
    UppCase c(60, 50.1, 10.0);
    c.res.set_zeta(1, "Z", 50);
    c.res.hours[0].kappa = 0.0;
    CHECK(failed(check_upp_equation(c.inst, c.res), "upp_kappa"));
  }
  {
    UppCase c(40, 50, 0.0);  // nothing executed: no entry
    CHECK(check_upp_equation(c.inst, c.res).entries.empty());
  }
}

TEST_CASE("block acceptance") {
  auto inst = block_market(40.00, 0.10);
  // surplus 757.71 fully accepted
  auto itm = block_result(inst, 40 + 75.771, 1, 1.0);
  CHECK(block_surplus(inst, itm, inst.blocks[0]) == doctest::Approx(757.71));
  CHECK(check_blocks(inst, itm).passed());
  // zero surplus, partial
  auto atm = block_result(inst, 40, 1, 0.86);
  CHECK(check_blocks(inst, atm).passed());
  // surplus -170.42 with acceptance 0.5
  auto pab = block_result(inst, 40 - 17.042, 1, 0.5);
  CHECK(block_surplus(inst, pab, inst.blocks[0]) == doctest::Approx(-170.42));
  auto rep = check_blocks(inst, pab);
  CHECK_FALSE(rep.passed());
  CHECK(failed_with(rep, "block_surplus", "PAB"));
  // ratio below the minimum acceptance ratio
  CHECK(failed(check_blocks(inst, block_result(inst, 40, 1, 0.05)), "block_ratio"));
  // rejected blocks carry no quantity
  CHECK(failed(check_blocks(inst, block_result(inst, 30, 0, 0.2)), "block_ratio"));
  // rejected in the money: logged, not failed
  auto prb = check_blocks(inst, block_result(inst, 60, 0, 0.0));
  CHECK(prb.passed());
  REQUIRE(prb.failures(true).size() == 1);
  CHECK(prb.failures(true)[0].rule == "block_prb");
  CHECK(prb.failures(true)[0].severity == Severity::Warn);
}

TEST_CASE("network physics") {
  PlainCase c;
  CHECK(check_physics(c.inst, c.res).passed());
  c.res.supplies[1].cleared = 5.1;
  CHECK(failed(check_physics(c.inst, c.res), "balance"));

  MarketInstance two;
  two.config.digits = 0;
  two.hours = {1};
  two.zones = {{"A", false}, {"B", false}};
  two.links = {{"A", "B", {{1, Qty{100}}}}, {"B", "A", {{1, Qty{100}}}}};
  two.demands = {{"dB", "B", 1, 60, Qty{200}, false}};
  two.supplies = {{"sA", "A", 1, 10, Qty{200}}};
  auto res = empty_clearing(two, "test");
  auto set_flow = [&](double f) {
    for (auto& fl : res.flows) fl.flow = fl.from == "A" ? f : -f;
    res.demands[0].executed = f;
    res.supplies[0].cleared = f;
  };
  set_flow(100);
  CHECK(check_physics(two, res).passed());
  set_flow(100.01);
  auto rep = check_physics(two, res);
  CHECK(failed(rep, "flow_limit"));
  CHECK_FALSE(failed(rep, "balance"));
  set_flow(50);
  res.flows[1].flow = -49;
  CHECK(failed(check_physics(two, res), "flow_antisymmetry"));
}

TEST_CASE("duality at a textbook clearing") {
  PlainCase c;
  auto rep = check_duality(c.inst, c.res);
  CHECK(rep.passed());
  // marginal step: phi_s = 0 by slackness
  for (const auto& e : rep.by_rule("complementarity")) CHECK(e.residual == 0.0);
  // inframarginal step fully cleared: phi_s = zeta - c
  CHECK(c.res.supplies[0].phi_s == doctest::Approx(c.res.zeta(1, "Z") - 30));
  CHECK(rep.by_rule("strong_duality")[0].residual == doctest::Approx(0.0));

  auto bad = c;
  bad.res.supplies[1].phi_s = 3;  // marginal step with a positive dual
  auto r2 = check_duality(bad.inst, bad.res);
  CHECK(failed(r2, "complementarity"));
  CHECK(failed(r2, "strong_duality"));
}

TEST_CASE("corrupted UPP zonal price shows in strong duality") {
  auto inst = testing_support::load_fixture("upp_partial_execution.txt");
  auto res = enumerate_clear(inst).best;
  REQUIRE(check_duality(inst, res).passed());
  // expected residual: the zeta coefficient of the dual objective,
  // sum_k (u^g_k D_k + d^d_k), times the +1 shift
  double expected = 0.0;
  for (std::size_t k = 0; k < inst.demands.size(); ++k)
    expected += res.demands[k].ug * inst.mwh(inst.demands[k].quantity) + res.demands[k].dd;
  CHECK(expected > 0.0);
  res.set_zeta(1, "Z", res.zeta(1, "Z") + 1.0);
  auto rep = check_duality(inst, res);
  auto sd = rep.by_rule("strong_duality");
  REQUIRE(sd.size() == 1);
  CHECK(sd[0].residual == doctest::Approx(expected).epsilon(1e-6));
  CHECK_FALSE(sd[0].pass);
}

TEST_CASE("merit order") {
  MarketInstance inst;
  inst.config.digits = 0;
  inst.hours = {1};
  inst.zones = {{"Z", true}};
  inst.demands = {{"a", "Z", 1, 70, Qty{1}, true, 1}, {"b", "Z", 1, 60, Qty{1}, true, 2}, {"c", "Z", 1, 50, Qty{1}, true, 3}};
  auto res = empty_clearing(inst, "test");
  auto set = [&](std::vector<int> ug) {
    for (std::size_t k = 0; k < ug.size(); ++k) res.demands[k].ug = ug[k];
  };
  set({1, 1, 0});
  CHECK(check_merit(inst, res).passed());
  set({1, 0, 1});
  auto rep = check_merit(inst, res);
  CHECK_FALSE(rep.passed());
  CHECK(failed(rep, "merit_chain"));
}

TEST_CASE("ATM merit with and without a congested path") {
  MarketInstance inst;
  inst.config.digits = 0;
  inst.hours = {1};
  inst.zones = {{"A", true}, {"B", true}};
  inst.links = {{"B", "A", {{1, Qty{5}}}}};
  inst.demands = {{"h", "A", 1, 50, Qty{10}, true, 1}, {"k", "B", 1, 50, Qty{10}, true, 2}};
  auto res = empty_clearing(inst, "test");
  res.demands[0].executed = 5;   // higher merit short by 5
  res.demands[1].executed = 4;   // lower merit executed at the money
  ValidatorOptions strict;
  strict.atm_merit = Severity::Fail;

  for (auto& f : res.flows) f.flow = f.from == "B" ? 5 : -5;  // B -> A saturated
  CHECK(check_merit(inst, res, strict).passed());

  for (auto& f : res.flows) f.flow = f.from == "B" ? 3 : -3;  // spare capacity
  auto rep = check_merit(inst, res, strict);
  CHECK(failed(rep, "merit_atm"));
  CHECK_FALSE(rep.passed());
  // default severity only warns
  auto soft = check_merit(inst, res);
  CHECK(soft.passed());
  CHECK(soft.failures(true).size() == 1);
}

TEST_CASE("indicators, recap and expansion") {
  UppCase c(50, 50, 4.0);
  auto& d = c.res.demands[0];
  d.ue = 1;
  d.ud = 1;
  d.dd = 4.0;
  c.res.expansions.push_back({1, "Z", {0, 0, 0}});
  // 4000 units = 0b111110100000
  for (int j = 0; j < 13; ++j) c.res.expansions[0].bits.resize(13);
  for (int j : {5, 7, 8, 9, 10, 11}) c.res.expansions[0].bits[j] = 1;
  CHECK(check_indicators(c.inst, c.res).passed());
  CHECK(check_expansion(c.inst, c.res).passed());

  c.res.expansions[0].bits[5] = 0;
  auto rep = check_expansion(c.inst, c.res);
  CHECK(failed(rep, "expansion"));
  CHECK(rep.by_rule("expansion")[0].residual == doctest::Approx(32.0));

  d.ug = 1;
  CHECK(failed(check_indicators(c.inst, c.res), "recap"));
  c.res.hours[0].pi = 51;
  CHECK(failed(check_indicators(c.inst, c.res), "indicator_itm"));
  CHECK(failed(check_indicators(c.inst, c.res), "indicator_atm"));
  c.res.hours[0].pi = 50;
  d.ug = 0;
  d.uw = 1;
  CHECK(failed(check_indicators(c.inst, c.res), "indicator_mode"));
  d.uw = 0;
  d.ue = 0;
  CHECK(failed(check_indicators(c.inst, c.res), "indicator_mode"));
}

TEST_CASE("validator passes solved clearings and is pure") {
  for (const char* f : {"single_zone_curves.txt", "upp_partial_execution.txt", "blocks_moneyness.txt", "two_zone_hours.txt"}) {
    auto inst = testing_support::load_fixture(f);
    if (inst.hours.size() > 1 && inst.blocks.empty()) inst = restrict_to_hour(inst, inst.hours[1]);
    auto built = build_model(inst);
    auto raw = solve(built.model);
    REQUIRE(raw.status == SolveStatus::Optimal);
    auto res = decode(inst, built, raw);
    auto a = validate_all(inst, res);
    for (const auto& e : a.failures()) MESSAGE(f, ": ", e.rule, " ", e.scope, " ", e.detail);
    CHECK(a.passed());
    CHECK(report_to_json(a) == report_to_json(validate_all(inst, res)));
    CHECK(check_model_rows(built.model, raw.values).passed());
  }
}

TEST_CASE("mutations of a valid clearing are caught") {
  int mutations = 0;
  for (std::uint64_t seed = 400; seed < 440; ++seed) {
    auto inst = random_instance(seed);
    auto oracle = enumerate_clear(inst);
    if (!oracle.feasible) continue;
    const auto& base = oracle.best;
    REQUIRE(validate_all(inst, base).passed());
    for (std::size_t k = 0; k < inst.demands.size(); ++k) {
      if (!inst.demands[k].pays_upp) continue;
      auto m = base;
      m.demands[k].ug = 1 - m.demands[k].ug;
      CHECK_FALSE(validate_all(inst, m).passed());
      ++mutations;
    }
    for (auto& z : base.zone_prices) {
      auto m = base;
      m.set_zeta(z.hour, z.zone, z.zeta + 1.0);
      const bool caught = !validate_all(inst, m).passed();
      CHECK_MESSAGE(caught, serialize_instance(inst), z.zone, " hour ", z.hour);
      ++mutations;
    }
  }
  CHECK(mutations > 50);
}

TEST_CASE("model row check reports the worst row per family") {
  MilpModel m;
  int x = m.add_var("x", "x", 0, 10);
  int u = m.add_binary("u", "u");
  m.add_row("r1", "cap", {{x, 1.0}}, Sense::LE, 4.0);
  m.add_row("r2", "cap", {{x, 2.0}}, Sense::LE, 4.0);
  auto rep = check_model_rows(m, {5.0, 0.5});
  auto cap = rep.by_rule("model_rows");
  bool saw_cap = false, saw_int = false;
  for (const auto& e : cap) {
    if (e.scope == "cap") {
      saw_cap = true;
      CHECK(e.residual == doctest::Approx(6.0));
      CHECK(e.detail.find("r2") != std::string::npos);
    }
    if (e.scope == "integrality") {
      saw_int = true;
      CHECK_FALSE(e.pass);
    }
  }
  CHECK(saw_cap);
  CHECK(saw_int);
  (void)u;
}

TEST_CASE("report JSON") {
  PlainCase c;
  c.res.supplies[1].cleared = 6;
  auto rep = validate_all(c.inst, c.res);
  auto j = report_to_json(rep);
  CHECK(j.find("\"passed\": false") != std::string::npos);
  CHECK(j.find("\"rule\": \"balance\"") != std::string::npos);
  CHECK(j.find("imbalance") != std::string::npos);
}
