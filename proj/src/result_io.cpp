#include <json.hpp>

#include "uppclear/decode.hpp"

namespace uppclear {

using nlohmann::json;

std::string clearing_to_json(const ClearingResult& r) {
  json j;
  j["source"] = r.source;
  j["welfare"] = r.welfare;
  for (const auto& h : r.hours)
    j["hours"].push_back({{"hour", h.hour}, {"pi", h.pi}, {"pi_determined", h.pi_determined}, {"kappa", h.kappa}});
  for (const auto& z : r.zone_prices) j["zone_prices"].push_back({{"hour", z.hour}, {"zone", z.zone}, {"zeta", z.zeta}});
  for (const auto& d : r.demands)
    j["demands"].push_back({{"id", d.id}, {"executed", d.executed}, {"ug", d.ug}, {"ue", d.ue}, {"uw", d.uw},
                            {"ud", d.ud}, {"dw", d.dw}, {"dd", d.dd}, {"phi_w", d.phi_w}, {"phi_wlo", d.phi_wlo},
                            {"phi_z", d.phi_z}});
  for (const auto& s : r.supplies) j["supplies"].push_back({{"id", s.id}, {"cleared", s.cleared}, {"phi_s", s.phi_s}});
  for (const auto& f : r.flows)
    j["flows"].push_back({{"hour", f.hour}, {"from", f.from}, {"to", f.to}, {"flow", f.flow}, {"delta", f.delta},
                          {"eta", f.eta}});
  for (const auto& b : r.blocks)
    j["blocks"].push_back({{"id", b.id}, {"accepted", b.accepted}, {"ratio", b.ratio}, {"phi_max", b.phi_max},
                           {"phi_min", b.phi_min}});
  for (const auto& e : r.expansions) j["expansions"].push_back({{"hour", e.hour}, {"zone", e.zone}, {"bits", e.bits}});
  for (const char* key : {"hours", "zone_prices", "demands", "supplies", "flows", "blocks", "expansions"})
    if (!j.contains(key)) j[key] = json::array();
  return j.dump(2) + "\n";
}

ClearingResult clearing_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("clearing result: ") + e.what());
  }
  ClearingResult r;
  try {
    r.source = j.value("source", "");
    r.welfare = j.value("welfare", 0.0);
    for (const auto& h : j.at("hours"))
      r.hours.push_back({h.at("hour"), h.at("pi"), h.value("pi_determined", true), h.at("kappa")});
    for (const auto& z : j.at("zone_prices")) r.zone_prices.push_back({z.at("hour"), z.at("zone"), z.at("zeta")});
    for (const auto& d : j.at("demands")) {
      DemandResult x;
      x.id = d.at("id");
      x.executed = d.at("executed");
      x.ug = d.value("ug", 0);
      x.ue = d.value("ue", 0);
      x.uw = d.value("uw", 0);
      x.ud = d.value("ud", 0);
      x.dw = d.value("dw", 0.0);
      x.dd = d.value("dd", 0.0);
      x.phi_w = d.value("phi_w", 0.0);
      x.phi_wlo = d.value("phi_wlo", 0.0);
      x.phi_z = d.value("phi_z", 0.0);
      r.demands.push_back(std::move(x));
    }
    for (const auto& s : j.at("supplies")) r.supplies.push_back({s.at("id"), s.at("cleared"), s.value("phi_s", 0.0)});
    for (const auto& f : j.at("flows"))
      r.flows.push_back({f.at("hour"), f.at("from"), f.at("to"), f.at("flow"), f.value("delta", 0.0), f.value("eta", 0.0)});
    for (const auto& b : j.at("blocks"))
      r.blocks.push_back({b.at("id"), b.at("accepted"), b.at("ratio"), b.value("phi_max", 0.0), b.value("phi_min", 0.0)});
    if (j.contains("expansions"))
      for (const auto& e : j.at("expansions"))
        r.expansions.push_back({e.at("hour"), e.at("zone"), e.at("bits").get<std::vector<int>>()});
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("clearing result: ") + e.what());
  }
  return r;
}

}  // namespace uppclear
