#include "uppclear/oracle.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "uppclear/builder.hpp"
#include "uppclear/dense_lp.hpp"

namespace uppclear {

namespace {

constexpr double kTieTol = 1e-9;
constexpr double kQtyTol = 1e-6;

struct Option {
  int m = 0;     // orders [0, m) of the price-sorted list are in the money
  int atm = -1;  // position of the at-the-money order
  bool elastic = false;
  std::int64_t q = 0;  // grid quantity in units
  double pi_lo = 0.0, pi_hi = 0.0;
};

struct HourCtx {
  Hour t = 0;
  std::vector<int> upp;  // demand indices, price descending
  int nmr = 0;
  std::vector<int> zonal, supply;
  std::vector<Option> options;
};

std::int64_t sat_mul(std::int64_t a, std::int64_t b) {
  constexpr auto kMax = std::numeric_limits<std::int64_t>::max();
  if (a == 0 || b == 0) return 0;
  return a > kMax / b ? kMax : a * b;
}

HourCtx make_hour(const MarketInstance& inst, Hour t, std::int64_t step) {
  HourCtx hc;
  hc.t = t;
  for (int k = 0; k < static_cast<int>(inst.demands.size()); ++k) {
    const auto& d = inst.demands[k];
    if (d.hour != t) continue;
    (d.pays_upp ? hc.upp : hc.zonal).push_back(k);
  }
  for (int p = 0; p < static_cast<int>(inst.supplies.size()); ++p)
    if (inst.supplies[p].hour == t) hc.supply.push_back(p);
  std::stable_sort(hc.upp.begin(), hc.upp.end(), [&](int a, int b) {
    const auto& x = inst.demands[a];
    const auto& y = inst.demands[b];
    return x.price != y.price ? x.price > y.price : x.id < y.id;
  });
  for (int k : hc.upp)
    if (inst.must_run(inst.demands[k])) ++hc.nmr;

  const int n = static_cast<int>(hc.upp.size());
  const double cap = inst.config.price_cap, eps = inst.config.epsilon;
  auto P = [&](int i) { return inst.demands[hc.upp[i]].price; };
  for (int m = hc.nmr; m <= n; ++m) {
    Option o;
    o.m = m;
    o.pi_lo = m < n ? P(m) : 0.0;
    o.pi_hi = m > 0 ? P(m - 1) - eps : cap;
    if (o.pi_lo <= o.pi_hi) hc.options.push_back(o);
  }
  for (int a = hc.nmr; a < n; ++a) {
    if (a > 0 && P(a - 1) - eps < P(a)) continue;
    Option o;
    o.m = a;
    o.atm = a;
    o.pi_lo = o.pi_hi = P(a);
    const std::int64_t units = inst.demands[hc.upp[a]].quantity.units;
    for (std::int64_t q = step; q < units; q += step) {
      o.q = q;
      hc.options.push_back(o);
    }
    if (units > 0) {
      o.q = units;
      hc.options.push_back(o);
    }
    o.q = 0;
    o.elastic = true;
    hc.options.push_back(o);
  }
  return hc;
}

struct Problem {
  const MarketInstance* inst = nullptr;
  std::vector<HourCtx> hours;
  bool with_blocks = false;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<int> zone_of_demand, zone_of_supply, zone_of_block;

  int nblocks() const { return with_blocks ? static_cast<int>(inst->blocks.size()) : 0; }

  std::int64_t count() const {
    std::int64_t n = std::int64_t{1} << nblocks();
    for (const auto& hc : hours) n = sat_mul(n, static_cast<std::int64_t>(hc.options.size()));
    return n;
  }

  void decode(std::int64_t e, std::vector<int>& opt, unsigned& mask) const {
    const int nb = nblocks();
    mask = static_cast<unsigned>(e & ((std::int64_t{1} << nb) - 1));
    e >>= nb;
    opt.resize(hours.size());
    for (std::size_t h = 0; h < hours.size(); ++h) {
      const auto sz = static_cast<std::int64_t>(hours[h].options.size());
      opt[h] = static_cast<int>(e % sz);
      e /= sz;
    }
  }
};

Problem make_problem(const MarketInstance& inst, const std::vector<Hour>& hours, bool with_blocks,
                     std::int64_t step) {
  Problem p;
  p.inst = &inst;
  p.with_blocks = with_blocks;
  p.pairs = connected_pairs(inst);
  for (Hour t : hours) p.hours.push_back(make_hour(inst, t, step));
  for (const auto& d : inst.demands) p.zone_of_demand.push_back(static_cast<int>(*inst.zone_index(d.zone)));
  for (const auto& s : inst.supplies) p.zone_of_supply.push_back(static_cast<int>(*inst.zone_index(s.zone)));
  for (const auto& b : inst.blocks) p.zone_of_block.push_back(static_cast<int>(*inst.zone_index(b.zone)));
  return p;
}

double qty(const MarketInstance& inst, std::int64_t units) {
  return static_cast<double>(units) / static_cast<double>(pow10_i64(inst.config.digits));
}

// Fixed (non-LP) demand per zone and its welfare for one hour option.
std::vector<double> fixed_demand(const Problem& p, const HourCtx& hc, const Option& o, double* welfare) {
  const auto& inst = *p.inst;
  std::vector<double> fixed(inst.zones.size(), 0.0);
  for (int i = 0; i < o.m; ++i) {
    const auto& d = inst.demands[hc.upp[i]];
    fixed[p.zone_of_demand[hc.upp[i]]] += inst.mwh(d.quantity);
    if (welfare) *welfare += d.price * inst.mwh(d.quantity);
  }
  if (o.atm >= 0 && !o.elastic) {
    const auto& d = inst.demands[hc.upp[o.atm]];
    fixed[p.zone_of_demand[hc.upp[o.atm]]] += qty(inst, o.q);
    if (welfare) *welfare += d.price * qty(inst, o.q);
  }
  return fixed;
}

using Row = std::vector<std::pair<int, double>>;

// Rows without terms are decided here; the simplex never sees them.
bool add_row(lp::DenseLp& lp, Row terms, Sense s, double rhs) {
  if (terms.empty()) {
    if (s == Sense::EQ) return std::abs(rhs) <= 1e-9;
    if (s == Sense::LE) return rhs >= -1e-9;
    return rhs <= 1e-9;
  }
  lp.add_row(terms, s, rhs);
  return true;
}

struct Primal {
  lp::DenseLp lp;
  bool trivially_infeasible = false;
  double fixed_welfare = 0.0;
  std::vector<std::vector<double>> fixed;  // [h][zone]
  std::vector<int> dw;                     // [h]
  std::vector<std::vector<int>> dz, s, g;  // [h][...]
  std::vector<int> r;                      // [block]
};

Primal build_primal(const Problem& p, const std::vector<int>& opt, unsigned mask) {
  const auto& inst = *p.inst;
  Primal pr;
  const std::size_t H = p.hours.size();
  pr.fixed.resize(H);
  pr.dw.assign(H, -1);
  pr.dz.resize(H);
  pr.s.resize(H);
  pr.g.resize(H);
  for (std::size_t b = 0; b < static_cast<std::size_t>(p.nblocks()); ++b) {
    const auto& blk = inst.blocks[b];
    if (mask >> b & 1U)
      pr.r.push_back(pr.lp.add_var(blk.mar, 1.0, blk.price * inst.mwh(blk.total())));
    else
      pr.r.push_back(-1);
  }
  for (std::size_t h = 0; h < H; ++h) {
    const auto& hc = p.hours[h];
    const auto& o = hc.options[opt[h]];
    pr.fixed[h] = fixed_demand(p, hc, o, &pr.fixed_welfare);
    std::vector<Row> bal(inst.zones.size());
    if (o.elastic) {
      const int k = hc.upp[o.atm];
      const auto& d = inst.demands[k];
      pr.dw[h] = pr.lp.add_var(0.0, inst.mwh(d.quantity), -d.price);
      bal[p.zone_of_demand[k]].push_back({pr.dw[h], 1.0});
    }
    for (int k : hc.zonal) {
      const auto& d = inst.demands[k];
      int v = pr.lp.add_var(0.0, inst.mwh(d.quantity), -d.price);
      pr.dz[h].push_back(v);
      bal[p.zone_of_demand[k]].push_back({v, 1.0});
    }
    for (int q : hc.supply) {
      const auto& s = inst.supplies[q];
      int v = pr.lp.add_var(0.0, inst.mwh(s.quantity), s.price);
      pr.s[h].push_back(v);
      bal[p.zone_of_supply[q]].push_back({v, -1.0});
    }
    for (auto [a, b] : p.pairs) {
      const auto& za = inst.zones[a].id;
      const auto& zb = inst.zones[b].id;
      double fab = inst.mwh(link_capacity(inst, za, zb, hc.t));
      double fba = inst.mwh(link_capacity(inst, zb, za, hc.t));
      int v = pr.lp.add_var(-fba, fab, 0.0);
      pr.g[h].push_back(v);
      bal[a].push_back({v, 1.0});
      bal[b].push_back({v, -1.0});
    }
    for (std::size_t b = 0; b < pr.r.size(); ++b) {
      if (pr.r[b] < 0) continue;
      const auto& blk = inst.blocks[b];
      if (auto it = blk.profile.find(hc.t); it != blk.profile.end())
        bal[p.zone_of_block[b]].push_back({pr.r[b], -inst.mwh(it->second)});
    }
    for (std::size_t z = 0; z < bal.size(); ++z)
      if (!add_row(pr.lp, std::move(bal[z]), Sense::EQ, -pr.fixed[h][z])) pr.trivially_infeasible = true;
  }
  return pr;
}

lp::Solution solve_or_throw(const lp::DenseLp& lp, const char* what) {
  auto sol = lp.minimize();
  if (sol.status == lp::Status::IterationLimit || sol.status == lp::Status::Unbounded)
    throw std::runtime_error(std::string("oracle ") + what + " LP did not terminate normally");
  return sol;
}

// NaN when the lower level has no feasible dispatch.
double primal_welfare(const Problem& p, std::int64_t e) {
  std::vector<int> opt;
  unsigned mask = 0;
  p.decode(e, opt, mask);
  Primal pr = build_primal(p, opt, mask);
  if (pr.trivially_infeasible) return std::numeric_limits<double>::quiet_NaN();
  auto sol = solve_or_throw(pr.lp, "primal");
  if (sol.status != lp::Status::Optimal) return std::numeric_limits<double>::quiet_NaN();
  return pr.fixed_welfare - sol.objective;
}

struct Dual {
  lp::DenseLp lp;
  std::vector<std::vector<int>> zeta;  // [h][zone]
  std::vector<int> pi, kappa, phiw, phiwlo;
  std::vector<std::vector<int>> phiz, phis, dab, dba, mu;
  std::vector<int> bmax, bmin;
};

// Dual feasibility of the lower level, strong duality against `lp_opt`
// (the LP part of the welfare), the UPP definition with kappa bounds and
// block moneyness. Minimizes sum |kappa|.
Dual build_dual(const Problem& p, const std::vector<int>& opt, unsigned mask, double lp_opt) {
  const auto& inst = *p.inst;
  const double cap = inst.config.price_cap;
  const double inf = kInf;
  Dual du;
  const std::size_t H = p.hours.size();
  du.zeta.resize(H);
  du.pi.assign(H, -1);
  du.kappa.assign(H, -1);
  du.phiw.assign(H, -1);
  du.phiwlo.assign(H, -1);
  du.phiz.resize(H);
  du.phis.resize(H);
  du.dab.resize(H);
  du.dba.resize(H);
  du.mu.resize(H);
  Row sd;
  for (std::size_t h = 0; h < H; ++h) {
    const auto& hc = p.hours[h];
    const auto& o = hc.options[opt[h]];
    auto fixed = fixed_demand(p, hc, o, nullptr);
    for (std::size_t z = 0; z < inst.zones.size(); ++z) {
      int v = du.lp.add_var(0.0, cap);
      du.zeta[h].push_back(v);
      if (fixed[z] != 0.0) sd.push_back({v, -fixed[z]});
    }
    auto zeta_of = [&](int zone) { return du.zeta[h][zone]; };

    int kappa = du.lp.add_var(inst.config.kappa_lo, inst.config.kappa_hi);
    int abs = du.lp.add_var(0.0, inf, 1.0);
    du.kappa[h] = kappa;
    du.lp.add_row({{abs, 1.0}, {kappa, -1.0}}, Sense::GE, 0.0);
    du.lp.add_row({{abs, 1.0}, {kappa, 1.0}}, Sense::GE, 0.0);

    if (o.elastic) {
      const int k = hc.upp[o.atm];
      const auto& d = inst.demands[k];
      du.phiw[h] = du.lp.add_var(0.0, cap);
      du.phiwlo[h] = du.lp.add_var(0.0, inf);
      du.lp.add_row({{du.phiw[h], 1.0}, {du.phiwlo[h], -1.0}, {zeta_of(p.zone_of_demand[k]), 1.0}}, Sense::EQ,
                    d.price);
      sd.push_back({du.phiw[h], inst.mwh(d.quantity)});
    }
    if (!hc.upp.empty()) {
      du.pi[h] = du.lp.add_var(o.pi_lo, o.pi_hi);
      // kappa = sum_ITM (pi - zeta) D + (P - zeta) d^d + D phi^w
      Row row = {{kappa, 1.0}};
      double rhs = 0.0;
      for (int i = 0; i < o.m; ++i) {
        const int k = hc.upp[i];
        const double D = inst.mwh(inst.demands[k].quantity);
        row.push_back({du.pi[h], -D});
        row.push_back({zeta_of(p.zone_of_demand[k]), D});
      }
      if (o.atm >= 0) {
        const int k = hc.upp[o.atm];
        const auto& d = inst.demands[k];
        if (o.elastic) {
          row.push_back({du.phiw[h], -inst.mwh(d.quantity)});
        } else {
          const double dd = qty(inst, o.q);
          row.push_back({zeta_of(p.zone_of_demand[k]), dd});
          rhs += d.price * dd;
        }
      }
      add_row(du.lp, std::move(row), Sense::EQ, rhs);
    }
    for (int k : hc.zonal) {
      const auto& d = inst.demands[k];
      int v = du.lp.add_var(0.0, inf);
      du.phiz[h].push_back(v);
      du.lp.add_row({{v, 1.0}, {zeta_of(p.zone_of_demand[k]), 1.0}}, Sense::GE, d.price);
      sd.push_back({v, inst.mwh(d.quantity)});
    }
    for (int q : hc.supply) {
      const auto& s = inst.supplies[q];
      int v = du.lp.add_var(0.0, inf);
      du.phis[h].push_back(v);
      du.lp.add_row({{v, 1.0}, {zeta_of(p.zone_of_supply[q]), -1.0}}, Sense::GE, -s.price);
      sd.push_back({v, inst.mwh(s.quantity)});
    }
    for (auto [a, b] : p.pairs) {
      const auto& za = inst.zones[a].id;
      const auto& zb = inst.zones[b].id;
      int dab = du.lp.add_var(0.0, inf), dba = du.lp.add_var(0.0, inf), mu = du.lp.add_var(-inf, inf);
      du.dab[h].push_back(dab);
      du.dba[h].push_back(dba);
      du.mu[h].push_back(mu);
      du.lp.add_row({{dab, 1.0}, {mu, 1.0}, {zeta_of(static_cast<int>(a)), 1.0}}, Sense::EQ, 0.0);
      du.lp.add_row({{dba, 1.0}, {mu, 1.0}, {zeta_of(static_cast<int>(b)), 1.0}}, Sense::EQ, 0.0);
      double fab = inst.mwh(link_capacity(inst, za, zb, hc.t));
      double fba = inst.mwh(link_capacity(inst, zb, za, hc.t));
      if (fab != 0.0) sd.push_back({dab, fab});
      if (fba != 0.0) sd.push_back({dba, fba});
    }
  }
  for (int b = 0; b < p.nblocks(); ++b) {
    const auto& blk = inst.blocks[b];
    const double tot = inst.mwh(blk.total());
    const double mb = cap * tot;
    int bmax = du.lp.add_var(0.0, mb), bmin = du.lp.add_var(0.0, mb);
    du.bmax.push_back(bmax);
    du.bmin.push_back(bmin);
    Row dual = {{bmax, 1.0}, {bmin, -1.0}};
    Row money;
    for (std::size_t h = 0; h < H; ++h)
      if (auto it = blk.profile.find(p.hours[h].t); it != blk.profile.end()) {
        dual.push_back({du.zeta[h][p.zone_of_block[b]], -inst.mwh(it->second)});
        money.push_back({du.zeta[h][p.zone_of_block[b]], inst.mwh(it->second)});
      }
    du.lp.add_row(dual, Sense::EQ, -blk.price * tot);
    if (mask >> b & 1U) {
      add_row(du.lp, std::move(money), Sense::GE, blk.price * tot);
      sd.push_back({bmax, 1.0});
      if (blk.mar != 0.0) sd.push_back({bmin, -blk.mar});
    }
  }
  // Weak duality gives dual >= primal; only the upper side needs a row.
  add_row(du.lp, std::move(sd), Sense::LE, lp_opt + 1e-9 * std::max(1.0, std::abs(lp_opt)));
  return du;
}

struct Evaluated {
  Primal primal;
  lp::Solution psol;
  Dual dual;
  lp::Solution dsol;
  bool feasible = false;
};

Evaluated evaluate(const Problem& p, std::int64_t e) {
  std::vector<int> opt;
  unsigned mask = 0;
  p.decode(e, opt, mask);
  Evaluated ev{build_primal(p, opt, mask), {}, {}, {}, false};
  if (ev.primal.trivially_infeasible) return ev;
  ev.psol = solve_or_throw(ev.primal.lp, "primal");
  if (ev.psol.status != lp::Status::Optimal) return ev;
  ev.dual = build_dual(p, opt, mask, -ev.psol.objective);
  ev.dsol = solve_or_throw(ev.dual.lp, "dual");
  ev.feasible = ev.dsol.status == lp::Status::Optimal;
  return ev;
}

bool rule_feasible(const Problem& p, std::int64_t e) { return evaluate(p, e).feasible; }

std::string describe(const Problem& p, std::int64_t e) {
  const auto& inst = *p.inst;
  std::vector<int> opt;
  unsigned mask = 0;
  p.decode(e, opt, mask);
  std::ostringstream os;
  if (p.nblocks() > 0) {
    os << "uB=";
    for (int b = 0; b < p.nblocks(); ++b) os << (mask >> b & 1U);
  }
  for (std::size_t h = 0; h < p.hours.size(); ++h) {
    const auto& hc = p.hours[h];
    const auto& o = hc.options[opt[h]];
    if (os.tellp() > 0) os << ' ';
    os << "t" << hc.t << ":itm=" << o.m;
    if (o.atm >= 0) {
      os << ",atm=" << inst.demands[hc.upp[o.atm]].id;
      if (o.elastic)
        os << "/elastic";
      else
        os << "/" << format_quantity(Qty{o.q}, inst.config.digits);
    }
  }
  return os.str();
}

// Writes one candidate's dispatch and prices into `res` (only the hours and
// blocks `p` covers).
void fill(const Problem& p, std::int64_t e, const Evaluated& ev, ClearingResult& res) {
  const auto& inst = *p.inst;
  std::vector<int> opt;
  unsigned mask = 0;
  p.decode(e, opt, mask);
  const auto& x = ev.psol.x;
  const auto& y = ev.dsol.x;
  for (std::size_t h = 0; h < p.hours.size(); ++h) {
    const auto& hc = p.hours[h];
    const auto& o = hc.options[opt[h]];
    const Hour t = hc.t;
    for (std::size_t z = 0; z < inst.zones.size(); ++z) res.set_zeta(t, inst.zones[z].id, y[ev.dual.zeta[h][z]]);
    auto zeta_of_demand = [&](int k) { return y[ev.dual.zeta[h][p.zone_of_demand[k]]]; };
    double executed_upp = 0.0;
    for (std::size_t i = 0; i < hc.upp.size(); ++i) {
      const int k = hc.upp[i];
      const auto& d = inst.demands[k];
      auto& r = res.demands[k];
      r = DemandResult{d.id};
      const double zeta = zeta_of_demand(k);
      r.phi_w = std::max(0.0, d.price - zeta);
      r.phi_wlo = std::max(0.0, zeta - d.price);
      if (static_cast<int>(i) < o.m) {
        r.ug = 1;
        r.executed = inst.mwh(d.quantity);
      } else if (static_cast<int>(i) == o.atm) {
        r.ue = 1;
        if (o.elastic) {
          r.uw = 1;
          r.dw = x[ev.primal.dw[h]];
          r.executed = r.dw;
          r.phi_w = y[ev.dual.phiw[h]];
          r.phi_wlo = y[ev.dual.phiwlo[h]];
        } else {
          r.ud = 1;
          r.dd = qty(inst, o.q);
          r.executed = r.dd;
        }
      }
      executed_upp += r.executed;
    }
    for (std::size_t i = 0; i < hc.zonal.size(); ++i) {
      auto& r = res.demands[hc.zonal[i]];
      r.executed = x[ev.primal.dz[h][i]];
      r.phi_z = y[ev.dual.phiz[h][i]];
    }
    for (std::size_t i = 0; i < hc.supply.size(); ++i) {
      auto& r = res.supplies[hc.supply[i]];
      r.cleared = x[ev.primal.s[h][i]];
      r.phi_s = y[ev.dual.phis[h][i]];
    }
    for (std::size_t q = 0; q < p.pairs.size(); ++q) {
      const auto& za = inst.zones[p.pairs[q].first].id;
      const auto& zb = inst.zones[p.pairs[q].second].id;
      for (auto& f : res.flows) {
        if (f.hour != t) continue;
        if (f.from == za && f.to == zb) {
          f.flow = x[ev.primal.g[h][q]];
          f.delta = y[ev.dual.dab[h][q]];
          f.eta = y[ev.dual.mu[h][q]];
        } else if (f.from == zb && f.to == za) {
          f.flow = -x[ev.primal.g[h][q]];
          f.delta = y[ev.dual.dba[h][q]];
          f.eta = 0.0;
        }
      }
    }
    auto* hr = res.hour(t);
    hr->pi = ev.dual.pi[h] >= 0 ? y[ev.dual.pi[h]] : 0.0;
    hr->kappa = y[ev.dual.kappa[h]];
    hr->pi_determined = executed_upp > kQtyTol;

    std::erase_if(res.expansions, [&](const ExpansionResult& x) { return x.hour == t; });
    for (const auto& zone : inst.zones) {
      if (!zone.upp_member) continue;
      std::int64_t total = 0, dd = 0;
      bool any = false;
      for (int k : hc.upp)
        if (inst.demands[k].zone == zone.id) {
          total += inst.demands[k].quantity.units;
          any = true;
        }
      if (!any) continue;
      if (o.atm >= 0 && !o.elastic && inst.demands[hc.upp[o.atm]].zone == zone.id) dd = o.q;
      ExpansionResult er{t, zone.id, {}};
      const int J = expansion_width(total);
      for (int j = 0; j <= J; ++j) er.bits.push_back(static_cast<int>(dd >> j & 1));
      res.expansions.push_back(std::move(er));
    }
  }
  for (int b = 0; b < p.nblocks(); ++b) {
    auto& r = res.blocks[b];
    r.accepted = static_cast<int>(mask >> b & 1U);
    r.ratio = ev.primal.r[b] >= 0 ? x[ev.primal.r[b]] : 0.0;
    r.phi_max = y[ev.dual.bmax[b]];
    r.phi_min = y[ev.dual.bmin[b]];
  }
}

std::vector<double> outcome_key(const Problem& p, std::int64_t e, const Evaluated& ev) {
  ClearingResult tmp = empty_clearing(*p.inst, "oracle");
  fill(p, e, ev, tmp);
  std::vector<double> key;
  for (const auto& hc : p.hours) {
    for (int k : hc.upp) key.push_back(tmp.demands[k].executed);
    for (int k : hc.zonal) key.push_back(tmp.demands[k].executed);
    for (int q : hc.supply) key.push_back(tmp.supplies[q].cleared);
  }
  for (int b = 0; b < p.nblocks(); ++b) key.push_back(tmp.blocks[b].ratio);
  return key;
}

bool same_outcome(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > kQtyTol) return false;
  return true;
}

struct Search {
  bool feasible = false;
  std::int64_t best = -1;
  double best_welfare = 0.0;
  std::vector<std::int64_t> ties;
  std::int64_t enumerated = 0;
  std::optional<std::int64_t> rule_feasible;
  int distinct = 0;
};

Search search(const Problem& p, const OracleLimits& lim, bool parallel) {
  Search out;
  const std::int64_t n = p.count();
  out.enumerated = n;
  std::vector<double> w(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
  for (std::int64_t e = 0; e < n; ++e) w[e] = primal_welfare(p, e);

  std::vector<std::int64_t> order;
  for (std::int64_t e = 0; e < n; ++e)
    if (!std::isnan(w[e])) order.push_back(e);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return w[a] != w[b] ? w[a] > w[b] : a < b; });

  std::vector<char> feas(order.size(), 0), done(order.size(), 0);
  auto check_range = [&](std::size_t lo, std::size_t hi) {
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
    for (std::size_t i = lo; i < hi; ++i) {
      if (done[i]) continue;
      feas[i] = rule_feasible(p, order[i]);
      done[i] = 1;
    }
  };

  if (lim.count_all) {
    check_range(0, order.size());
    out.rule_feasible = std::count(feas.begin(), feas.end(), 1);
  }

  const std::size_t batch = parallel ? static_cast<std::size_t>(std::max(1, 2 * omp_get_max_threads())) : 1;
  std::size_t first = order.size();
  for (std::size_t lo = 0; lo < order.size() && first == order.size(); lo += batch) {
    const std::size_t hi = std::min(order.size(), lo + batch);
    check_range(lo, hi);
    for (std::size_t i = lo; i < hi; ++i)
      if (feas[i]) {
        first = i;
        break;
      }
  }
  if (first == order.size()) return out;

  // Everything within the tie tolerance of the first feasible candidate.
  const double top = w[order[first]];
  std::size_t end = first;
  while (end < order.size() && w[order[end]] >= top - kTieTol) ++end;
  check_range(first, end);
  std::vector<std::int64_t> winners;
  for (std::size_t i = first; i < end; ++i)
    if (feas[i]) winners.push_back(order[i]);
  std::sort(winners.begin(), winners.end());
  out.feasible = true;
  out.best = winners.front();
  out.best_welfare = w[out.best];
  out.ties.assign(winners.begin() + 1, winners.end());

  std::vector<std::vector<double>> keys;
  for (auto e : winners) {
    auto key = outcome_key(p, e, evaluate(p, e));
    if (std::none_of(keys.begin(), keys.end(), [&](const auto& k) { return same_outcome(k, key); }))
      keys.push_back(std::move(key));
  }
  out.distinct = static_cast<int>(keys.size());
  return out;
}

std::vector<Problem> split_problems(const MarketInstance& inst, std::int64_t step) {
  std::vector<Problem> ps;
  if (inst.blocks.empty()) {
    for (Hour t : inst.hours) ps.push_back(make_problem(inst, {t}, false, step));
  } else {
    ps.push_back(make_problem(inst, inst.hours, true, step));
  }
  return ps;
}

OracleResult run(const MarketInstance& inst, const OracleLimits& lim, bool parallel) {
  check_oracle_limits(inst, lim);
  auto problems = split_problems(inst, lim.atm_grid_step);
  OracleResult res;
  res.best = empty_clearing(inst, "oracle");
  res.feasible = true;
  res.distinct_outcomes = 1;
  if (lim.count_all) res.rule_feasible = 1;
  std::string desc;
  for (const auto& p : problems) {
    Search s = search(p, lim, parallel);
    res.enumerated += s.enumerated;
    // Blockless hours combine independently.
    if (lim.count_all) *res.rule_feasible = sat_mul(*res.rule_feasible, *s.rule_feasible);
    if (!s.feasible) {
      res.feasible = false;
      continue;
    }
    fill(p, s.best, evaluate(p, s.best), res.best);
    res.best_welfare += s.best_welfare;
    res.distinct_outcomes *= s.distinct;
    for (auto e : s.ties) res.ties.push_back(describe(p, e));
    if (!desc.empty()) desc += ' ';
    desc += describe(p, s.best);
  }
  if (!res.feasible) {
    res.best = empty_clearing(inst, "oracle");
    res.best_welfare = 0.0;
    res.ties.clear();
    res.distinct_outcomes = 0;
    return res;
  }
  res.best_candidate = desc;
  res.best.welfare = clearing_welfare(inst, res.best);
  return res;
}

}  // namespace

std::int64_t oracle_candidate_count(const MarketInstance& inst, std::int64_t atm_grid_step) {
  if (atm_grid_step < 1) throw std::invalid_argument("ATM grid step must be positive");
  std::int64_t total = 0;
  for (const auto& p : split_problems(inst, atm_grid_step)) {
    std::int64_t c = p.count();
    total = c > std::numeric_limits<std::int64_t>::max() - total ? std::numeric_limits<std::int64_t>::max()
                                                                 : total + c;
  }
  return total;
}

void check_oracle_limits(const MarketInstance& inst, const OracleLimits& lim) {
  std::vector<std::string> why;
  auto over = [&](const std::string& what, std::int64_t have, std::int64_t max) {
    if (have > max) why.push_back(what + " " + std::to_string(have) + " > " + std::to_string(max));
  };
  over("zones", static_cast<std::int64_t>(inst.zones.size()), lim.max_zones);
  over("hours", static_cast<std::int64_t>(inst.hours.size()), lim.max_hours);
  over("blocks", static_cast<std::int64_t>(inst.blocks.size()), lim.max_blocks);
  for (Hour t : inst.hours) {
    std::int64_t n = 0;
    std::vector<double> prices;
    for (const auto& d : inst.demands)
      if (d.hour == t && d.pays_upp) {
        ++n;
        if (!inst.must_run(d)) prices.push_back(d.price);
      }
    over("UPP orders in hour " + std::to_string(t), n, lim.max_upp_per_hour);
    std::sort(prices.begin(), prices.end());
    if (std::adjacent_find(prices.begin(), prices.end(),
                           [&](double a, double b) { return b - a <= inst.config.epsilon; }) != prices.end())
      why.push_back("equal UPP prices in hour " + std::to_string(t));
    for (const auto& z : inst.zones) {
      std::int64_t s = 0;
      for (const auto& o : inst.supplies) s += o.hour == t && o.zone == z.id;
      over("supply orders in zone " + z.id + " hour " + std::to_string(t), s, lim.max_supply_per_zone);
    }
  }
  if (lim.atm_grid_step < 1) why.push_back("ATM grid step must be positive");
  else over("candidates", oracle_candidate_count(inst, lim.atm_grid_step), lim.max_candidates);
  if (!why.empty()) {
    std::string msg = "instance exceeds oracle limits:";
    for (const auto& w : why) msg += "\n  " + w;
    throw OracleLimitError(msg, why);
  }
}

OracleResult enumerate_clear(const MarketInstance& inst, const OracleLimits& limits) {
  return run(inst, limits, true);
}

OracleResult enumerate_clear_serial(const MarketInstance& inst, const OracleLimits& limits) {
  return run(inst, limits, false);
}

std::string CompareReport::summary() const {
  char buf[200];
  if (!milp_feasible || !oracle_feasible) {
    std::snprintf(buf, sizeof buf, "%s milp %s, oracle %s", pass ? "PASS" : "FAIL",
                  milp_feasible ? "feasible" : "infeasible", oracle_feasible ? "feasible" : "infeasible");
    return buf;
  }
  std::snprintf(buf, sizeof buf, "%s welfare milp %.6f oracle %.6f gap %.3g (tol %.3g)", pass ? "PASS" : "FAIL",
                milp_welfare, oracle_welfare, gap, tol);
  return buf;
}

CompareReport compare(const MarketInstance& inst, const ClearingResult* milp, const OracleResult& oracle,
                      double tol) {
  CompareReport rep;
  rep.tol = tol;
  rep.milp_feasible = milp != nullptr;
  rep.oracle_feasible = oracle.feasible;
  if (!rep.milp_feasible || !rep.oracle_feasible) {
    rep.pass = rep.milp_feasible == rep.oracle_feasible;
    rep.gap = rep.pass ? 0.0 : std::numeric_limits<double>::infinity();
    if (milp) rep.milp_welfare = milp->welfare;
    if (oracle.feasible) rep.oracle_welfare = oracle.best.welfare;
    return rep;
  }
  rep.milp_welfare = milp->welfare;
  rep.oracle_welfare = oracle.best.welfare;
  rep.gap = std::abs(rep.milp_welfare - rep.oracle_welfare);
  rep.pass = rep.gap <= tol;
  auto diff = [&](const std::string& id, double a, double b) {
    if (std::abs(a - b) <= kQtyTol) return;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: milp %.6f oracle %.6f", id.c_str(), a, b);
    rep.diverging.emplace_back(buf);
  };
  for (std::size_t k = 0; k < inst.demands.size(); ++k)
    diff(inst.demands[k].id, milp->demands[k].executed, oracle.best.demands[k].executed);
  for (std::size_t p = 0; p < inst.supplies.size(); ++p)
    diff(inst.supplies[p].id, milp->supplies[p].cleared, oracle.best.supplies[p].cleared);
  for (std::size_t b = 0; b < inst.blocks.size(); ++b)
    diff(inst.blocks[b].id, milp->blocks[b].ratio, oracle.best.blocks[b].ratio);
  return rep;
}

}  // namespace uppclear
