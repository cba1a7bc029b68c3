#include "uppclear/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <stdexcept>

#include "uppclear/oracle.hpp"

namespace uppclear {

namespace {

std::string numbered(const char* prefix, int i, int width = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, i);
  return buf;
}

Qty uniform_qty(std::mt19937_64& rng, double lo, double hi, int digits) {
  std::uniform_real_distribution<double> u(lo, hi);
  return Qty{std::llround(u(rng) * static_cast<double>(pow10_i64(digits)))};
}

double round_cents(double p) { return std::round(p * 100.0) / 100.0; }

}  // namespace

MarketInstance add_synthetic_blocks(MarketInstance base, std::uint64_t seed, int n_blocks,
                                    const ZoneSplit& split, HourSpan span) {
  if (n_blocks < 0) throw std::invalid_argument("n_blocks must be nonnegative");
  if (span.first > span.last) throw std::invalid_argument("invalid span: first hour after last hour");
  for (Hour t = span.first; t <= span.last; ++t)
    if (!base.hour_index(t))
      throw std::invalid_argument("invalid span: hour " + std::to_string(t) + " not in instance");
  auto zu = base.zone_index(split.upp_zone);
  auto zo = base.zone_index(split.other_zone);
  if (!zu || !zo) throw std::invalid_argument("zone split names an unknown zone");
  if (!base.zones[*zu].upp_member || base.zones[*zo].upp_member)
    throw std::invalid_argument("zone split must name one UPP zone and one non-UPP zone");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> price(50.0, 10.0);
  const double cap = base.config.price_cap;
  base.blocks.clear();
  for (int i = 0; i < n_blocks; ++i) {
    BlockOrder b;
    b.id = numbered("BLK", i + 1);
    b.zone = (i % 2 == 0) ? split.upp_zone : split.other_zone;
    double p;
    do p = price(rng);
    while (p < 0.0 || p > cap);
    b.price = std::clamp(round_cents(p), 0.0, cap);
    b.mar = 0.10;
    for (Hour t = span.first; t <= span.last; ++t) b.profile[t] = uniform_qty(rng, 1.0, 75.0, base.config.digits);
    base.blocks.push_back(std::move(b));
  }
  validate_instance(base);
  return base;
}

MarketInstance synthetic_market(std::uint64_t seed, const MarketShape& shape) {
  if (shape.hours < 1 || shape.hours > 24 || shape.demand_steps < 1 || shape.supply_steps < 1)
    throw std::invalid_argument("invalid market shape");
  MarketInstance inst;
  inst.config.digits = shape.digits;
  for (Hour t = 1; t <= shape.hours; ++t) inst.hours.push_back(t);
  inst.zones = {{"NORD", true}, {"SVIZ", false}};
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const int c = shape.digits;
  TransmissionLink out{"NORD", "SVIZ", {}}, back{"SVIZ", "NORD", {}};
  for (Hour t : inst.hours) {
    out.capacity[t] = uniform_qty(rng, 200.0, 800.0, 0);
    out.capacity[t].units *= pow10_i64(c);
    back.capacity[t] = uniform_qty(rng, 200.0, 800.0, 0);
    back.capacity[t].units *= pow10_i64(c);
  }
  inst.links = {out, back};

  std::uniform_real_distribution<double> dprice(20.0, 120.0), sprice(0.0, 110.0);
  int nd = 0, ns = 0;
  for (Hour t : inst.hours) {
    for (const auto& z : inst.zones) {
      for (int k = 0; k < shape.demand_steps; ++k) {
        DemandOrder d;
        d.id = numbered("D", ++nd, 5);
        d.zone = z.id;
        d.hour = t;
        // the first step of every zone-hour is inelastic at the cap
        d.price = k == 0 ? inst.config.price_cap : round_cents(dprice(rng));
        d.quantity = uniform_qty(rng, k == 0 ? 500.0 : 20.0, k == 0 ? 1500.0 : 300.0, c);
        d.pays_upp = z.upp_member;
        inst.demands.push_back(std::move(d));
      }
      for (int p = 0; p < shape.supply_steps; ++p) {
        SupplyOrder s;
        s.id = numbered("S", ++ns, 5);
        s.zone = z.id;
        s.hour = t;
        s.price = round_cents(sprice(rng));
        s.quantity = uniform_qty(rng, 100.0, 600.0, c);
        inst.supplies.push_back(std::move(s));
      }
    }
  }
  inst = assign_merit(std::move(inst));
  validate_instance(inst);
  return inst;
}

MarketInstance generate_synthetic(std::uint64_t seed, int n_blocks, const ZoneSplit& split, HourSpan span,
                                  const MarketShape& shape) {
  return add_synthetic_blocks(synthetic_market(seed, shape), seed, n_blocks, split, span);
}

namespace {

MarketInstance draw_random(std::mt19937_64& rng, const RandomShape& shape) {
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };

  MarketInstance inst;
  const int c = coin(0.7) ? 0 : 1;
  inst.config.digits = c;
  const int scale = c == 0 ? 1 : 4;  // grid points per MWh-ish
  const int nz = uni(1, shape.max_zones);
  const int nh = uni(1, shape.max_hours);
  for (Hour t = 1; t <= nh; ++t) inst.hours.push_back(t);
  for (int i = 0; i < nz; ++i) inst.zones.push_back({"Z" + std::to_string(i + 1), i == 0 || coin(0.5)});
  std::vector<std::string> upp_zones;
  for (const auto& z : inst.zones)
    if (z.upp_member) upp_zones.push_back(z.id);

  for (int i = 0; i + 1 < nz; ++i) {
    for (int dir = 0; dir < 2; ++dir) {
      TransmissionLink l{inst.zones[i + dir].id, inst.zones[i + 1 - dir].id, {}};
      for (Hour t : inst.hours) l.capacity[t] = Qty{coin(0.25) ? 0 : uni(1, 6 * scale)};
      inst.links.push_back(std::move(l));
    }
  }

  int nd = 0, ns = 0;
  for (Hour t : inst.hours) {
    const int n_upp = uni(0, shape.max_upp_per_hour);
    std::set<int> used;
    for (int k = 0; k < n_upp; ++k) {
      int p;
      do p = coin(0.04) ? static_cast<int>(inst.config.price_cap) : uni(10, 90);
      while (!used.insert(p).second);
      DemandOrder d;
      d.id = "K" + std::to_string(++nd);
      d.zone = upp_zones[uni(0, static_cast<int>(upp_zones.size()) - 1)];
      d.hour = t;
      d.price = p;
      d.quantity = Qty{uni(1, 4 * scale)};
      d.pays_upp = true;
      inst.demands.push_back(std::move(d));
    }
    for (const auto& z : inst.zones) {
      if (coin(0.35)) {
        DemandOrder d;
        d.id = "K" + std::to_string(++nd);
        d.zone = z.id;
        d.hour = t;
        d.price = uni(5, 95);
        d.quantity = Qty{uni(1, 5 * scale)};
        inst.demands.push_back(std::move(d));
      }
      const int n_sup = uni(1, shape.max_supply_per_zone);
      for (int p = 0; p < n_sup; ++p) {
        SupplyOrder s;
        s.id = "S" + std::to_string(++ns);
        s.zone = z.id;
        s.hour = t;
        s.price = uni(0, 80);
        s.quantity = Qty{uni(1, 6 * scale)};
        inst.supplies.push_back(std::move(s));
      }
    }
  }

  if (shape.allow_blocks) {
    const int nb = uni(0, shape.max_blocks);
    static constexpr double kMar[] = {0.0, 0.1, 0.5, 1.0};
    for (int b = 0; b < nb; ++b) {
      BlockOrder blk;
      blk.id = "B" + std::to_string(b + 1);
      blk.zone = inst.zones[uni(0, nz - 1)].id;
      blk.price = uni(15, 70);
      blk.mar = kMar[uni(0, 3)];
      for (Hour t : inst.hours)
        if (coin(0.7)) blk.profile[t] = Qty{uni(1, 4 * scale)};
      if (blk.profile.empty()) blk.profile[inst.hours.front()] = Qty{uni(1, 4 * scale)};
      inst.blocks.push_back(std::move(blk));
    }
  }
  inst = assign_merit(std::move(inst));
  validate_instance(inst);
  return inst;
}

}  // namespace

MarketInstance random_instance(std::uint64_t seed, const RandomShape& shape) {
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    MarketInstance inst = draw_random(rng, shape);
    if (inst.empty_book()) continue;
    if (oracle_candidate_count(inst) <= shape.max_candidates) return inst;
  }
  throw std::runtime_error("random_instance: no instance within the candidate budget");
}

}  // namespace uppclear
