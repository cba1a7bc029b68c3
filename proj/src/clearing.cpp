#include "uppclear/clearing.hpp"

namespace uppclear {

const HourResult* ClearingResult::hour(Hour t) const {
  for (const auto& h : hours)
    if (h.hour == t) return &h;
  return nullptr;
}

HourResult* ClearingResult::hour(Hour t) {
  for (auto& h : hours)
    if (h.hour == t) return &h;
  return nullptr;
}

double ClearingResult::zeta(Hour t, const std::string& zone) const {
  for (const auto& z : zone_prices)
    if (z.hour == t && z.zone == zone) return z.zeta;
  return 0.0;
}

void ClearingResult::set_zeta(Hour t, const std::string& zone, double v) {
  for (auto& z : zone_prices)
    if (z.hour == t && z.zone == zone) {
      z.zeta = v;
      return;
    }
  zone_prices.push_back({t, zone, v});
}

const FlowResult* ClearingResult::flow(Hour t, const std::string& from, const std::string& to) const {
  for (const auto& f : flows)
    if (f.hour == t && f.from == from && f.to == to) return &f;
  return nullptr;
}

std::vector<std::pair<std::size_t, std::size_t>> connected_pairs(const MarketInstance& inst) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < inst.zones.size(); ++i)
    for (std::size_t j = i + 1; j < inst.zones.size(); ++j) {
      bool linked = false;
      for (const auto& l : inst.links)
        if ((l.from == inst.zones[i].id && l.to == inst.zones[j].id) ||
            (l.from == inst.zones[j].id && l.to == inst.zones[i].id))
          linked = true;
      if (linked) out.emplace_back(i, j);
    }
  return out;
}

Qty link_capacity(const MarketInstance& inst, const std::string& from, const std::string& to, Hour t) {
  for (const auto& l : inst.links)
    if (l.from == from && l.to == to) return l.capacity_at(t);
  return Qty{};
}

double clearing_welfare(const MarketInstance& inst, const ClearingResult& res) {
  double w = 0.0;
  for (std::size_t k = 0; k < inst.demands.size(); ++k) w += inst.demands[k].price * res.demands[k].executed;
  for (std::size_t p = 0; p < inst.supplies.size(); ++p) w -= inst.supplies[p].price * res.supplies[p].cleared;
  for (std::size_t p = 0; p < inst.blocks.size(); ++p)
    w -= inst.blocks[p].price * inst.mwh(inst.blocks[p].total()) * res.blocks[p].ratio;
  return w;
}

double block_surplus(const MarketInstance& inst, const ClearingResult& res, const BlockOrder& b) {
  double s = 0.0;
  for (const auto& [t, q] : b.profile) s += inst.mwh(q) * (res.zeta(t, b.zone) - b.price);
  return s;
}

ClearingResult empty_clearing(const MarketInstance& inst, std::string source) {
  ClearingResult r;
  r.source = std::move(source);
  for (Hour t : inst.hours) {
    r.hours.push_back({t, 0.0, false, 0.0});
    for (const auto& z : inst.zones) r.zone_prices.push_back({t, z.id, 0.0});
    for (auto [i, j] : connected_pairs(inst)) {
      r.flows.push_back({t, inst.zones[i].id, inst.zones[j].id});
      r.flows.push_back({t, inst.zones[j].id, inst.zones[i].id});
    }
  }
  for (const auto& d : inst.demands) r.demands.push_back({d.id});
  for (const auto& s : inst.supplies) r.supplies.push_back({s.id});
  for (const auto& b : inst.blocks) r.blocks.push_back({b.id});
  return r;
}

}  // namespace uppclear
