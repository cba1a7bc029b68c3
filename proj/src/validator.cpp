#include "uppclear/validator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <map>
#include <queue>
#include <set>

namespace uppclear {

bool ValidationReport::passed() const {
  return std::none_of(entries.begin(), entries.end(),
                      [](const CheckEntry& e) { return !e.pass && e.severity == Severity::Fail; });
}

std::vector<CheckEntry> ValidationReport::failures(bool include_warnings) const {
  std::vector<CheckEntry> out;
  for (const auto& e : entries)
    if (!e.pass && (include_warnings || e.severity == Severity::Fail)) out.push_back(e);
  return out;
}

std::vector<CheckEntry> ValidationReport::by_rule(const std::string& rule) const {
  std::vector<CheckEntry> out;
  for (const auto& e : entries)
    if (e.rule == rule) out.push_back(e);
  return out;
}

void ValidationReport::merge(const ValidationReport& other) {
  entries.insert(entries.end(), other.entries.begin(), other.entries.end());
}

namespace {

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::string hour_scope(Hour t) { return "hour " + std::to_string(t); }

// Records `residual` (>= 0 means violated by that much) against `tol`.
void record(ValidationReport& rep, std::string rule, std::string scope, double residual, double tol,
            std::string detail = {}, Severity sev = Severity::Fail) {
  CheckEntry e;
  e.rule = std::move(rule);
  e.scope = std::move(scope);
  e.residual = std::max(0.0, residual);
  e.tol = tol;
  e.pass = residual <= tol;
  e.severity = sev;
  if (!e.pass) e.detail = std::move(detail);
  rep.add(std::move(e));
}

double pi_of(const ClearingResult& res, Hour t) {
  const auto* h = res.hour(t);
  return h ? h->pi : 0.0;
}

}  // namespace

ValidationReport check_upp_rule(const MarketInstance& inst, const ClearingResult& res, const ValidatorOptions& o) {
  ValidationReport rep;
  for (std::size_t k = 0; k < inst.demands.size(); ++k) {
    const auto& d = inst.demands[k];
    if (!d.pays_upp) continue;
    const double pi = pi_of(res, d.hour);
    const double D = inst.mwh(d.quantity);
    const double x = res.demands[k].executed;
    if (d.price > pi + o.tol_p)
      record(rep, "upp_rule", d.id, std::abs(D - x), o.tol_p, fmt("ITM not fully executed: %.6f of %.6f", x, D));
    else if (d.price < pi - o.tol_p)
      record(rep, "upp_rule", d.id, std::abs(x), o.tol_p, fmt("OTM executed: %.6f", x));
    else
      record(rep, "upp_rule", d.id, std::max(-x, x - D), o.tol_p, fmt("ATM quantity %.6f outside [0, %.6f]", x, D));
  }
  return rep;
}

ValidationReport check_upp_equation(const MarketInstance& inst, const ClearingResult& res,
                                    const ValidatorOptions& o) {
  ValidationReport rep;
  for (Hour t : inst.hours) {
    double q = 0.0, cost = 0.0;
    for (std::size_t k = 0; k < inst.demands.size(); ++k) {
      const auto& d = inst.demands[k];
      if (d.hour != t || !d.pays_upp) continue;
      q += res.demands[k].executed;
      cost += res.zeta(t, d.zone) * res.demands[k].executed;
    }
    if (q <= o.tol_p) continue;
    const double pi = pi_of(res, t);
    const double khat = pi * q - cost;
    const double lo = inst.config.kappa_lo, hi = inst.config.kappa_hi;
    record(rep, "upp_equation", hour_scope(t), std::max(lo - khat, khat - hi), o.tol_p,
           fmt("kappa %.6f outside [%g, %g]", khat, lo, hi));
    const auto* hr = res.hour(t);
    const double reported = hr ? hr->kappa : 0.0;
    record(rep, "upp_kappa", hour_scope(t), std::abs(khat - reported), o.tol_s,
           fmt("recomputed kappa %.6f, reported %.6f", khat, reported));
  }
  return rep;
}

ValidationReport check_expansion(const MarketInstance& inst, const ClearingResult& res, const ValidatorOptions& o) {
  ValidationReport rep;
  const double scale = static_cast<double>(pow10_i64(inst.config.digits));
  for (const auto& e : res.expansions) {
    std::int64_t bits = 0;
    for (std::size_t j = 0; j < e.bits.size(); ++j)
      if (e.bits[j]) bits += std::int64_t{1} << j;
    double dd = 0.0;
    for (std::size_t k = 0; k < inst.demands.size(); ++k) {
      const auto& d = inst.demands[k];
      if (d.hour == e.hour && d.pays_upp && d.zone == e.zone) dd += res.demands[k].dd;
    }
    const double scaled = dd * scale;
    record(rep, "expansion", e.zone + " " + hour_scope(e.hour), std::abs(scaled - static_cast<double>(bits)),
           o.tol_p * scale, fmt("bits encode %.0f units, d^d is %.6f units", static_cast<double>(bits), scaled));
  }
  return rep;
}

ValidationReport check_blocks(const MarketInstance& inst, const ClearingResult& res, const ValidatorOptions& o) {
  ValidationReport rep;
  for (std::size_t p = 0; p < inst.blocks.size(); ++p) {
    const auto& b = inst.blocks[p];
    const auto& r = res.blocks[p];
    const double sigma = block_surplus(inst, res, b);
    if (r.accepted) {
      record(rep, "block_surplus", b.id, -sigma, o.tol_s, fmt("PAB: accepted with surplus %.2f", sigma));
      record(rep, "block_ratio", b.id, std::max(b.mar - r.ratio, r.ratio - 1.0), o.tol_p,
             fmt("ratio %.6f outside [%g, 1]", r.ratio, b.mar));
    } else {
      record(rep, "block_ratio", b.id, std::abs(r.ratio), o.tol_p, fmt("rejected block has ratio %.6f", r.ratio));
      record(rep, "block_prb", b.id, sigma, o.tol_s, fmt("PRB: rejected with surplus %.2f", sigma), Severity::Warn);
    }
  }
  return rep;
}

ValidationReport check_physics(const MarketInstance& inst, const ClearingResult& res, const ValidatorOptions& o) {
  ValidationReport rep;
  for (Hour t : inst.hours) {
    for (const auto& z : inst.zones) {
      double net = 0.0;
      for (std::size_t k = 0; k < inst.demands.size(); ++k)
        if (inst.demands[k].hour == t && inst.demands[k].zone == z.id) net += res.demands[k].executed;
      for (std::size_t p = 0; p < inst.supplies.size(); ++p)
        if (inst.supplies[p].hour == t && inst.supplies[p].zone == z.id) net -= res.supplies[p].cleared;
      for (std::size_t p = 0; p < inst.blocks.size(); ++p) {
        const auto& b = inst.blocks[p];
        if (b.zone != z.id) continue;
        if (auto it = b.profile.find(t); it != b.profile.end()) net -= res.blocks[p].ratio * inst.mwh(it->second);
      }
      for (const auto& f : res.flows)
        if (f.hour == t && f.from == z.id) net += f.flow;
      record(rep, "balance", z.id + " " + hour_scope(t), std::abs(net), o.tol_p, fmt("imbalance %.6f", net));
    }
  }
  for (const auto& f : res.flows) {
    const double F = inst.mwh(link_capacity(inst, f.from, f.to, f.hour));
    const std::string scope = f.from + "->" + f.to + " " + hour_scope(f.hour);
    record(rep, "flow_limit", scope, f.flow - F, o.tol_p, fmt("flow %.6f over capacity %.6f", f.flow, F));
    if (const auto* rev = res.flow(f.hour, f.to, f.from); rev && f.from < f.to)
      record(rep, "flow_antisymmetry", scope, std::abs(f.flow + rev->flow), o.tol_p,
             fmt("f_ij + f_ji = %.6f", f.flow + rev->flow));
  }
  for (std::size_t k = 0; k < inst.demands.size(); ++k) {
    const double D = inst.mwh(inst.demands[k].quantity);
    const double x = res.demands[k].executed;
    record(rep, "demand_bounds", inst.demands[k].id, std::max(-x, x - D), o.tol_p,
           fmt("executed %.6f outside [0, %.6f]", x, D));
  }
  for (std::size_t p = 0; p < inst.supplies.size(); ++p) {
    const double S = inst.mwh(inst.supplies[p].quantity);
    const double x = res.supplies[p].cleared;
    record(rep, "supply_bounds", inst.supplies[p].id, std::max(-x, x - S), o.tol_p,
           fmt("cleared %.6f outside [0, %.6f]", x, S));
  }
  return rep;
}

ValidationReport check_duality(const MarketInstance& inst, const ClearingResult& res, const ValidatorOptions& o) {
  ValidationReport rep;
  double primal = 0.0, dual = 0.0;
  for (std::size_t k = 0; k < inst.demands.size(); ++k) {
    const auto& d = inst.demands[k];
    const auto& r = res.demands[k];
    const double D = inst.mwh(d.quantity);
    const double zeta = res.zeta(d.hour, d.zone);
    if (d.pays_upp) {
      primal += d.price * r.dw;
      dual += r.uw * D * r.phi_w - (r.ug * D + r.dd) * zeta;
      record(rep, "dual_demand", d.id, std::abs(r.phi_w - r.phi_wlo + zeta - d.price), o.tol_dual,
             fmt("phi_w - phi_wlo + zeta - P = %.3g", r.phi_w - r.phi_wlo + zeta - d.price));
      record(rep, "dual_sign", d.id, std::max(-r.phi_w, -r.phi_wlo), o.tol_dual, "negative demand dual");
      record(rep, "complementarity", d.id + " upper", std::abs((r.dw - r.uw * D) * r.phi_w), o.tol_sd,
             fmt("(d^w - u^w D) phi^w = %.3g", (r.dw - r.uw * D) * r.phi_w));
      record(rep, "complementarity", d.id + " lower", std::abs(r.dw * r.phi_wlo), o.tol_sd,
             fmt("d^w phi^wlo = %.3g", r.dw * r.phi_wlo));
    } else {
      primal += d.price * r.executed;
      dual += D * r.phi_z;
      record(rep, "dual_demand", d.id, d.price - r.phi_z - zeta, o.tol_dual,
             fmt("phi_z + zeta - P = %.3g", r.phi_z + zeta - d.price));
      record(rep, "dual_sign", d.id, -r.phi_z, o.tol_dual, "negative demand dual");
      record(rep, "complementarity", d.id, std::abs((D - r.executed) * r.phi_z), o.tol_sd,
             fmt("(D - d) phi = %.3g", (D - r.executed) * r.phi_z));
    }
  }
  for (std::size_t p = 0; p < inst.supplies.size(); ++p) {
    const auto& s = inst.supplies[p];
    const auto& r = res.supplies[p];
    const double S = inst.mwh(s.quantity);
    const double zeta = res.zeta(s.hour, s.zone);
    primal -= s.price * r.cleared;
    dual += S * r.phi_s;
    record(rep, "dual_supply", s.id, zeta - s.price - r.phi_s, o.tol_dual,
           fmt("phi_s - zeta + c = %.3g", r.phi_s - zeta + s.price));
    record(rep, "dual_sign", s.id, -r.phi_s, o.tol_dual, "negative supply dual");
    record(rep, "complementarity", s.id, std::abs((S - r.cleared) * r.phi_s), o.tol_sd,
           fmt("(S - s) phi = %.3g", (S - r.cleared) * r.phi_s));
  }
  for (const auto& f : res.flows) {
    const double F = inst.mwh(link_capacity(inst, f.from, f.to, f.hour));
    const auto* rev = res.flow(f.hour, f.to, f.from);
    const double eta_rev = rev ? rev->eta : 0.0;
    const std::string scope = f.from + "->" + f.to + " " + hour_scope(f.hour);
    dual += F * f.delta;
    record(rep, "dual_flow", scope, std::abs(f.delta + f.eta + eta_rev + res.zeta(f.hour, f.from)), o.tol_dual,
           "delta + eta_ij + eta_ji + zeta_i != 0");
    record(rep, "dual_sign", scope, -f.delta, o.tol_dual, "negative congestion dual");
    record(rep, "complementarity", scope, std::abs((F - f.flow) * f.delta), o.tol_sd,
           fmt("(F - f) delta = %.3g", (F - f.flow) * f.delta));
  }
  for (std::size_t p = 0; p < inst.blocks.size(); ++p) {
    const auto& b = inst.blocks[p];
    const auto& r = res.blocks[p];
    const double tot = inst.mwh(b.total());
    const double sigma = block_surplus(inst, res, b);
    primal -= b.price * tot * r.ratio;
    dual += r.accepted * (r.phi_max - b.mar * r.phi_min);
    record(rep, "dual_block", b.id, std::abs(r.phi_max - r.phi_min - sigma), o.tol_dual,
           fmt("phi_max - phi_min - surplus = %.3g", r.phi_max - r.phi_min - sigma));
    record(rep, "dual_sign", b.id, std::max(-r.phi_max, -r.phi_min), o.tol_dual, "negative block dual");
    record(rep, "complementarity", b.id + " upper", std::abs((r.accepted - r.ratio) * r.phi_max), o.tol_sd,
           fmt("(u - r) phi_max = %.3g", (r.accepted - r.ratio) * r.phi_max));
    record(rep, "complementarity", b.id + " lower", std::abs((r.ratio - b.mar * r.accepted) * r.phi_min), o.tol_sd,
           fmt("(r - R u) phi_min = %.3g", (r.ratio - b.mar * r.accepted) * r.phi_min));
  }
  record(rep, "strong_duality", "all", std::abs(primal - dual), o.tol_sd,
         fmt("primal %.6f dual %.6f", primal, dual));
  return rep;
}

namespace {

// Can zone `from` still push energy to zone `to` through unsaturated links?
bool has_spare_path(const MarketInstance& inst, const ClearingResult& res, Hour t, const std::string& from,
                    const std::string& to, double tol) {
  std::set<std::string> seen{from};
  std::queue<std::string> q;
  q.push(from);
  while (!q.empty()) {
    auto z = q.front();
    q.pop();
    if (z == to) return true;
    for (const auto& l : inst.links) {
      if (l.from != z || seen.count(l.to)) continue;
      const auto* f = res.flow(t, l.from, l.to);
      const double spare = inst.mwh(l.capacity_at(t)) - (f ? f->flow : 0.0);
      if (spare > tol) {
        seen.insert(l.to);
        q.push(l.to);
      }
    }
  }
  return false;
}

}  // namespace

ValidationReport check_merit(const MarketInstance& inst, const ClearingResult& res, const ValidatorOptions& o) {
  ValidationReport rep;
  for (Hour t : inst.hours) {
    std::vector<std::size_t> ks;
    for (std::size_t k = 0; k < inst.demands.size(); ++k)
      if (inst.demands[k].hour == t && inst.demands[k].pays_upp) ks.push_back(k);
    std::stable_sort(ks.begin(), ks.end(),
                     [&](auto a, auto b) { return inst.demands[a].merit < inst.demands[b].merit; });
    for (std::size_t q = 1; q < ks.size(); ++q) {
      const auto& hi = inst.demands[ks[q - 1]];
      const auto& lo = inst.demands[ks[q]];
      const int gap = res.demands[ks[q]].ug - res.demands[ks[q - 1]].ug;
      record(rep, "merit_chain", hi.id + "/" + lo.id, gap, 0.0,
             "u^g of " + lo.id + " exceeds u^g of higher-merit " + hi.id);
    }
    // At-the-money orders of equal price execute in merit order unless the
    // network cannot move the energy between their zones.
    for (std::size_t a = 0; a < ks.size(); ++a)
      for (std::size_t b = a + 1; b < ks.size(); ++b) {
        const auto& h = inst.demands[ks[a]];
        const auto& k = inst.demands[ks[b]];
        if (h.price != k.price) continue;
        const double short_h = inst.mwh(h.quantity) - res.demands[ks[a]].executed;
        const double got_k = res.demands[ks[b]].executed - inst.mwh(k.quantity) * res.demands[ks[b]].ug;
        if (short_h <= o.tol_p || got_k <= o.tol_p) {
          record(rep, "merit_atm", h.id + "/" + k.id, 0.0, o.tol_p, {}, o.atm_merit);
          continue;
        }
        if (h.zone != k.zone && !has_spare_path(inst, res, t, k.zone, h.zone, o.tol_p)) {
          record(rep, "merit_atm", h.id + "/" + k.id, 0.0, o.tol_p, {}, o.atm_merit);
          continue;
        }
        record(rep, "merit_atm", h.id + "/" + k.id, std::min(short_h, got_k), o.tol_p,
               fmt("lower-merit order executed %.6f while higher-merit order short %.6f", got_k, short_h),
               o.atm_merit);
      }
  }
  return rep;
}

ValidationReport check_indicators(const MarketInstance& inst, const ClearingResult& res,
                                  const ValidatorOptions& o) {
  ValidationReport rep;
  const double eps = inst.config.epsilon;
  for (std::size_t k = 0; k < inst.demands.size(); ++k) {
    const auto& d = inst.demands[k];
    if (!d.pays_upp) continue;
    const auto& r = res.demands[k];
    const double pi = pi_of(res, d.hour);
    const double D = inst.mwh(d.quantity);
    for (int u : {r.ug, r.ue, r.uw, r.ud})
      record(rep, "indicator_binary", d.id, (u == 0 || u == 1) ? 0.0 : 1.0, 0.0, "indicator not in {0, 1}");
    if (r.ug)
      record(rep, "indicator_itm", d.id, (pi + eps) - d.price, o.tol_p, fmt("u^g = 1 but P %.6f <= pi %.6f", d.price, pi));
    else
      record(rep, "indicator_itm", d.id, d.price - pi, o.tol_p, fmt("u^g = 0 but P %.6f > pi %.6f", d.price, pi));
    record(rep, "indicator_atm", d.id, r.ue ? std::abs(d.price - pi) : 0.0, o.tol_p,
           fmt("u^e = 1 but P %.6f != pi %.6f", d.price, pi));
    record(rep, "indicator_mode", d.id, r.uw + r.ud - r.ue, 0.0, "u^w + u^d > u^e");
    record(rep, "recap", d.id, std::abs(r.executed - (r.ug * D + r.dw + r.dd)), o.tol_p,
           fmt("d^pi %.6f != u^g D + d^w + d^d = %.6f", r.executed, r.ug * D + r.dw + r.dd));
    record(rep, "atm_bounds", d.id,
           std::max({r.dw - r.uw * D, r.dd - r.ud * D, -r.dw, -r.dd}), o.tol_p,
           fmt("d^w %.6f or d^d %.6f exceeds its indicator", r.dw, r.dd));
  }
  return rep;
}

ValidationReport check_model_rows(const MilpModel& model, const std::vector<double>& x, double tol) {
  ValidationReport rep;
  std::map<std::string, std::pair<double, std::string>> worst;
  for (std::size_t r = 0; r < model.rows().size(); ++r) {
    const double v = std::abs(model.row_violation(r, x));
    auto& w = worst[model.rows()[r].family];
    if (v > w.first || w.second.empty()) w = {v, model.rows()[r].name};
  }
  for (std::size_t j = 0; j < model.vars().size(); ++j) {
    const auto& var = model.vars()[j];
    const double v = std::max({0.0, var.lb - x[j], x[j] - var.ub});
    auto& w = worst["bounds"];
    if (v > w.first || w.second.empty()) w = {v, var.name};
    if (var.type == VarType::Binary) {
      auto& wi = worst["integrality"];
      const double f = std::abs(x[j] - std::round(x[j]));
      if (f > wi.first || wi.second.empty()) wi = {f, var.name};
    }
  }
  for (const auto& [fam, w] : worst) record(rep, "model_rows", fam, w.first, tol, "worst row " + w.second);
  return rep;
}

ValidationReport validate_all(const MarketInstance& inst, const ClearingResult& res, const ValidatorOptions& o) {
  ValidationReport rep;
  rep.merge(check_upp_rule(inst, res, o));
  rep.merge(check_upp_equation(inst, res, o));
  rep.merge(check_expansion(inst, res, o));
  rep.merge(check_blocks(inst, res, o));
  rep.merge(check_physics(inst, res, o));
  rep.merge(check_duality(inst, res, o));
  rep.merge(check_merit(inst, res, o));
  rep.merge(check_indicators(inst, res, o));
  return rep;
}

std::string report_to_json(const ValidationReport& rep) {
  nlohmann::json j;
  j["passed"] = rep.passed();
  j["failures"] = rep.failures().size();
  j["warnings"] = rep.failures(true).size() - rep.failures().size();
  j["entries"] = nlohmann::json::array();
  for (const auto& e : rep.entries) {
    nlohmann::json x = {{"rule", e.rule},         {"scope", e.scope}, {"residual", e.residual},
                        {"tol", e.tol},           {"pass", e.pass},
                        {"severity", e.severity == Severity::Fail ? "fail" : "warn"}};
    if (!e.detail.empty()) x["detail"] = e.detail;
    j["entries"].push_back(std::move(x));
  }
  return j.dump(2) + "\n";
}

}  // namespace uppclear
