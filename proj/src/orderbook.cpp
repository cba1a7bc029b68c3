#include "uppclear/orderbook.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <tuple>

namespace uppclear {

std::int64_t pow10_i64(int digits) {
  if (digits < 0 || digits > 15) throw std::out_of_range("decimal digits must be in [0, 15]");
  std::int64_t p = 1;
  for (int i = 0; i < digits; ++i) p *= 10;
  return p;
}

double to_mwh(Qty q, int digits) {
  return static_cast<double>(q.units) / static_cast<double>(pow10_i64(digits));
}

std::optional<std::size_t> MarketInstance::zone_index(std::string_view id) const {
  for (std::size_t i = 0; i < zones.size(); ++i)
    if (zones[i].id == id) return i;
  return std::nullopt;
}

std::optional<std::size_t> MarketInstance::hour_index(Hour t) const {
  for (std::size_t i = 0; i < hours.size(); ++i)
    if (hours[i] == t) return i;
  return std::nullopt;
}

bool operator==(const Zone& a, const Zone& b) { return a.id == b.id && a.upp_member == b.upp_member; }
bool operator==(const TransmissionLink& a, const TransmissionLink& b) {
  return a.from == b.from && a.to == b.to && a.capacity == b.capacity;
}
bool operator==(const DemandOrder& a, const DemandOrder& b) {
  return std::tie(a.id, a.zone, a.hour, a.price, a.quantity, a.pays_upp, a.merit) ==
         std::tie(b.id, b.zone, b.hour, b.price, b.quantity, b.pays_upp, b.merit);
}
bool operator==(const SupplyOrder& a, const SupplyOrder& b) {
  return std::tie(a.id, a.zone, a.hour, a.price, a.quantity) ==
         std::tie(b.id, b.zone, b.hour, b.price, b.quantity);
}
bool operator==(const BlockOrder& a, const BlockOrder& b) {
  return std::tie(a.id, a.zone, a.price, a.mar, a.profile) ==
         std::tie(b.id, b.zone, b.price, b.mar, b.profile);
}
bool operator==(const MarketInstance& a, const MarketInstance& b) {
  return a.hours == b.hours && a.zones == b.zones && a.links == b.links && a.demands == b.demands &&
         a.supplies == b.supplies && a.blocks == b.blocks && a.config == b.config;
}

namespace {

void require(bool ok, const std::string& subject, const std::string& rule) {
  if (!ok) throw ValidationError(subject, rule);
}

bool valid_id(std::string_view id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

void check_price(const MarketInstance& inst, const std::string& id, double price) {
  require(std::isfinite(price) && price >= 0.0 && price <= inst.config.price_cap, id,
          "price outside [0, price_cap]");
}

void check_qty(const std::string& id, Qty q) { require(q.units >= 0, id, "negative quantity"); }

}  // namespace

void validate_instance(const MarketInstance& inst) {
  const auto& cfg = inst.config;
  require(cfg.digits >= 0 && cfg.digits <= 9, "config", "digits outside [0, 9]");
  require(cfg.kappa_lo <= cfg.kappa_hi, "config", "kappa_lo > kappa_hi");
  require(cfg.price_cap > 0.0, "config", "price_cap must be positive");
  require(cfg.epsilon > 0.0 && cfg.epsilon_f > 0.0, "config", "epsilon values must be positive");
  require(!inst.hours.empty(), "hours", "no hours declared");
  {
    std::set<Hour> seen(inst.hours.begin(), inst.hours.end());
    require(seen.size() == inst.hours.size(), "hours", "duplicate hour");
    require(std::is_sorted(inst.hours.begin(), inst.hours.end()), "hours", "hours not ascending");
  }
  require(!inst.zones.empty(), "zones", "at least one zone required");
  std::set<std::string> zone_ids;
  for (const auto& z : inst.zones) {
    require(valid_id(z.id), z.id, "invalid identifier");
    require(zone_ids.insert(z.id).second, z.id, "duplicate zone id");
  }

  auto zone_of = [&](const std::string& who, const std::string& zid) -> const Zone& {
    auto idx = inst.zone_index(zid);
    if (!idx) throw ReferenceError(who + ": unknown zone '" + zid + "'");
    return inst.zones[*idx];
  };
  auto check_hour = [&](const std::string& who, Hour t) {
    if (!inst.hour_index(t)) throw ReferenceError(who + ": unknown hour " + std::to_string(t));
  };

  std::set<std::pair<std::string, std::string>> link_keys;
  for (const auto& l : inst.links) {
    std::string who = "link " + l.from + "->" + l.to;
    zone_of(who, l.from);
    zone_of(who, l.to);
    require(l.from != l.to, who, "link from == to");
    require(link_keys.insert({l.from, l.to}).second, who, "duplicate link");
    for (const auto& [t, cap] : l.capacity) {
      check_hour(who, t);
      require(cap.units >= 0, who, "negative capacity");
    }
  }

  std::set<std::string> ids;
  for (const auto& d : inst.demands) {
    require(valid_id(d.id), d.id, "invalid identifier");
    require(ids.insert("d:" + d.id).second, d.id, "duplicate demand id");
    const Zone& z = zone_of(d.id, d.zone);
    check_hour(d.id, d.hour);
    check_price(inst, d.id, d.price);
    check_qty(d.id, d.quantity);
    if (d.pays_upp) {
      require(z.upp_member, d.id, "UPP order in non-UPP zone");
      require(d.merit > 0, d.id, "merit missing");
    }
  }
  for (const auto& s : inst.supplies) {
    require(valid_id(s.id), s.id, "invalid identifier");
    require(ids.insert("s:" + s.id).second, s.id, "duplicate supply id");
    zone_of(s.id, s.zone);
    check_hour(s.id, s.hour);
    check_price(inst, s.id, s.price);
    check_qty(s.id, s.quantity);
  }
  for (const auto& b : inst.blocks) {
    require(valid_id(b.id), b.id, "invalid identifier");
    require(ids.insert("b:" + b.id).second, b.id, "duplicate block id");
    zone_of(b.id, b.zone);
    check_price(inst, b.id, b.price);
    require(b.mar >= 0.0 && b.mar <= 1.0, b.id, "minimum acceptance ratio outside [0, 1]");
    bool positive = false;
    for (const auto& [t, q] : b.profile) {
      check_hour(b.id, t);
      check_qty(b.id, q);
      positive = positive || q.units > 0;
    }
    require(positive, b.id, "block profile has no positive quantity");
  }

  // Merit: strict total order per hour, consistent with prices.
  for (Hour t : inst.hours) {
    std::vector<const DemandOrder*> upp;
    for (const auto& d : inst.demands)
      if (d.pays_upp && d.hour == t) upp.push_back(&d);
    std::sort(upp.begin(), upp.end(),
              [](const DemandOrder* a, const DemandOrder* b) { return a->merit < b->merit; });
    for (std::size_t i = 1; i < upp.size(); ++i) {
      require(upp[i - 1]->merit != upp[i]->merit, upp[i]->id, "merit not strict total order");
      require(upp[i - 1]->price >= upp[i]->price, upp[i]->id, "merit inconsistent with price ranking");
    }
  }
}

MarketInstance assign_merit(MarketInstance inst) {
  for (Hour t : inst.hours) {
    std::vector<DemandOrder*> upp;
    for (auto& d : inst.demands)
      if (d.pays_upp && d.hour == t) upp.push_back(&d);
    std::sort(upp.begin(), upp.end(), [](const DemandOrder* a, const DemandOrder* b) {
      if (a->price != b->price) return a->price > b->price;
      return a->id < b->id;
    });
    for (std::size_t i = 0; i < upp.size(); ++i) upp[i]->merit = static_cast<int>(i) + 1;
  }
  for (auto& d : inst.demands)
    if (!d.pays_upp) d.merit = 0;
  return inst;
}

MarketInstance restrict_to_hour(const MarketInstance& inst, Hour t) {
  if (!inst.blocks.empty())
    throw std::invalid_argument("restrict_to_hour: block orders couple hours");
  MarketInstance out;
  out.hours = {t};
  out.zones = inst.zones;
  out.config = inst.config;
  for (const auto& l : inst.links) {
    TransmissionLink r{l.from, l.to, {}};
    if (auto it = l.capacity.find(t); it != l.capacity.end()) r.capacity.emplace(t, it->second);
    out.links.push_back(std::move(r));
  }
  for (const auto& d : inst.demands)
    if (d.hour == t) out.demands.push_back(d);
  for (const auto& s : inst.supplies)
    if (s.hour == t) out.supplies.push_back(s);
  return out;
}

}  // namespace uppclear
