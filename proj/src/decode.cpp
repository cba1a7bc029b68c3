#include "uppclear/decode.hpp"

#include <cmath>

namespace uppclear {

int round_binary(double v, const std::string& name) {
  if (std::abs(v) <= kIntegralityTol) return 0;
  if (std::abs(v - 1.0) <= kIntegralityTol) return 1;
  throw IntegralityError("integrality violation: " + name + " = " + std::to_string(v));
}

ClearingResult decode(const MarketInstance& inst, const BuiltModel& built, const RawSolution& raw) {
  if (raw.status != SolveStatus::Optimal && raw.status != SolveStatus::Feasible)
    throw std::invalid_argument("decode needs an optimal or feasible solution, got " + to_string(raw.status));
  const auto& model = built.model;
  if (raw.values.size() != model.vars().size()) throw std::invalid_argument("solution does not match model");

  // Every binary is checked, including ones the result does not report.
  std::vector<double> x = raw.values;
  for (std::size_t j = 0; j < x.size(); ++j)
    if (model.vars()[j].type == VarType::Binary) x[j] = round_binary(x[j], model.vars()[j].name);

  auto val = [&](const std::string& name) { return x[built.catalog.at(name)]; };
  auto bin = [&](const std::string& name) { return static_cast<int>(val(name)); };
  auto h = [](Hour t) { return std::to_string(t); };

  ClearingResult res = empty_clearing(inst, "milp");
  for (auto& hr : res.hours) {
    hr.pi = val(idx("pi", h(hr.hour)));
    hr.kappa = val(idx("kappa", h(hr.hour)));
  }
  for (auto& z : res.zone_prices) z.zeta = val(idx("zeta", h(z.hour), z.zone));
  for (std::size_t k = 0; k < inst.demands.size(); ++k) {
    const auto& d = inst.demands[k];
    auto& r = res.demands[k];
    const auto t = h(d.hour);
    if (d.pays_upp) {
      r.ug = bin(idx("ug", t, d.id));
      r.ue = bin(idx("ue", t, d.id));
      r.uw = bin(idx("uw", t, d.id));
      r.ud = bin(idx("ud", t, d.id));
      r.dw = val(idx("dw", t, d.id));
      r.dd = val(idx("dd", t, d.id));
      r.executed = val(idx("dpi", t, d.id));
      r.phi_w = val(idx("phiw", t, d.id));
      r.phi_wlo = val(idx("phiwlo", t, d.id));
    } else {
      r.executed = val(idx("dz", t, d.id));
      r.phi_z = val(idx("phiz", t, d.id));
    }
  }
  for (std::size_t p = 0; p < inst.supplies.size(); ++p) {
    const auto& s = inst.supplies[p];
    res.supplies[p].cleared = val(idx("s", h(s.hour), s.id));
    res.supplies[p].phi_s = val(idx("phis", h(s.hour), s.id));
  }
  for (auto& f : res.flows) {
    f.flow = val(idx("f", h(f.hour), f.from, f.to));
    f.delta = val(idx("delta", h(f.hour), f.from, f.to));
    f.eta = val(idx("eta", h(f.hour), f.from, f.to));
  }
  for (std::size_t p = 0; p < inst.blocks.size(); ++p) {
    const auto& b = inst.blocks[p];
    auto& r = res.blocks[p];
    r.accepted = bin(idx("uB", b.id));
    r.ratio = val(idx("r", b.id));
    r.phi_max = val(idx("phiBmax", b.id));
    r.phi_min = val(idx("phiBmin", b.id));
  }
  for (const auto& [key, J] : built.expansion.width) {
    ExpansionResult e{key.first, key.second, {}};
    for (int j = 0; j <= J; ++j) e.bits.push_back(bin(idx("b", h(key.first), j, key.second)));
    res.expansions.push_back(std::move(e));
  }
  for (auto& hr : res.hours) {
    double q = 0.0;
    for (std::size_t k = 0; k < inst.demands.size(); ++k)
      if (inst.demands[k].pays_upp && inst.demands[k].hour == hr.hour) q += res.demands[k].executed;
    hr.pi_determined = q > kIntegralityTol;
  }
  res.welfare = clearing_welfare(inst, res);
  return res;
}

}  // namespace uppclear
