#include "uppclear/builder.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "uppclear/clearing.hpp"

namespace uppclear {

int VariableCatalog::at(const std::string& name) const {
  int j = find(name);
  if (j < 0) throw std::out_of_range("unknown variable " + name);
  return j;
}

BuiltModel::BuiltModel(const BuiltModel& o)
    : model(o.model), catalog(&model), bigm(o.bigm), expansion(o.expansion), products(o.products),
      options(o.options) {}

BuiltModel& BuiltModel::operator=(const BuiltModel& o) {
  if (this != &o) {
    model = o.model;
    catalog.rebind(&model);
    bigm = o.bigm;
    expansion = o.expansion;
    products = o.products;
    options = o.options;
  }
  return *this;
}

int expansion_width(std::int64_t scaled_total) {
  if (scaled_total < 0) throw std::invalid_argument("negative expansion total");
  constexpr std::int64_t kExact = (std::int64_t{1} << 53) - 1;
  if (scaled_total > kExact)
    throw OverflowError("scaled quantity " + std::to_string(scaled_total) + " exceeds exact binary expansion range");
  int j = 0;
  while (((std::int64_t{1} << (j + 1)) - 1) < scaled_total) ++j;
  return j;
}

ProductLink linearize_product(MilpModel& model, const std::string& y_name, const std::string& family, int u,
                              int x, double m, bool one_sided) {
  if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("big-M must be positive for " + y_name);
  const std::string rf = "lin_" + family;
  int y = model.add_var(y_name, family, one_sided ? 0.0 : -m, m);
  const std::string tag = y_name.substr(y_name.find('['));
  model.add_row(rf + "_a" + tag, rf, {{y, 1.0}, {u, -m}}, Sense::LE, 0.0);
  if (one_sided) {
    model.add_row(rf + "_b" + tag, rf, {{y, 1.0}}, Sense::GE, 0.0);
    model.add_row(rf + "_c" + tag, rf, {{x, 1.0}, {y, -1.0}}, Sense::GE, 0.0);
  } else {
    model.add_row(rf + "_b" + tag, rf, {{y, 1.0}, {u, m}}, Sense::GE, 0.0);
    model.add_row(rf + "_c" + tag, rf, {{x, 1.0}, {y, -1.0}, {u, -m}}, Sense::GE, -m);
  }
  model.add_row(rf + "_d" + tag, rf, {{x, 1.0}, {y, -1.0}, {u, m}}, Sense::LE, m);
  return ProductLink{u, x, y, m, one_sided};
}

std::vector<std::string> certify_big_m(const BuiltModel& built) {
  std::vector<std::string> bad;
  const auto& vars = built.model.vars();
  for (const auto& p : built.products) {
    const auto& x = vars[p.x];
    bool ok = p.one_sided ? (x.lb >= 0.0 && x.ub <= p.m)
                          : (std::max(std::abs(x.lb), std::abs(x.ub)) <= p.m);
    if (!ok) bad.push_back(vars[p.y].name + " (multiplicand " + x.name + ")");
  }
  return bad;
}

namespace {

std::string h(Hour t) { return std::to_string(t); }

class Builder {
 public:
  Builder(const MarketInstance& inst, const BuildOptions& opt, BuiltModel& out)
      : in_(inst), opt_(opt), out_(out), m_(out.model), cap_(inst.config.price_cap) {}

  void run() {
    if (in_.empty_book()) throw EmptyInstanceError("no orders");
    out_.options = opt_;
    out_.bigm.m_pi = cap_;
    out_.expansion.digits = in_.config.digits;
    scale_ = static_cast<double>(pow10_i64(in_.config.digits));
    pairs_ = connected_pairs(in_);

    for (Hour t : in_.hours) hour_variables(t);
    for (const auto& b : in_.blocks) block_variables(b);
    for (Hour t : in_.hours) hour_products(t);
    for (const auto& b : in_.blocks) block_products(b);

    objective();
    for (Hour t : in_.hours) build_upp_constraint(t);
    strong_duality();
    for (Hour t : in_.hours) {
      upper_level_rows(t);
      build_merit_chain(t);
      lower_level_rows(t);
      dual_rows(t);
      expansion_rows(t);
      if (opt_.market_split != MarketSplit::Off) build_market_split(t, opt_.market_split);
    }
    for (const auto& b : in_.blocks) block_rows(b);
    out_.catalog.rebind(&m_);
  }

 private:
  const MarketInstance& in_;
  const BuildOptions& opt_;
  BuiltModel& out_;
  MilpModel& m_;
  double cap_;
  double scale_ = 1.0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;

  int var(const std::string& name) const { return m_.find_var(name); }
  double D(const DemandOrder& d) const { return in_.mwh(d.quantity); }

  std::vector<const DemandOrder*> upp_orders(Hour t) const {
    std::vector<const DemandOrder*> v;
    for (const auto& d : in_.demands)
      if (d.hour == t && d.pays_upp) v.push_back(&d);
    std::stable_sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->merit < b->merit; });
    return v;
  }

  std::vector<std::string> upp_zones_with_orders(Hour t) const {
    std::vector<std::string> z;
    for (const auto& zone : in_.zones) {
      if (!zone.upp_member) continue;
      for (const auto& d : in_.demands)
        if (d.hour == t && d.pays_upp && d.zone == zone.id) {
          z.push_back(zone.id);
          break;
        }
    }
    return z;
  }

  double block_total(const BlockOrder& b) const { return in_.mwh(b.total()); }

  void hour_variables(Hour t) {
    m_.add_var(idx("pi", h(t)), "pi", 0.0, cap_);
    m_.add_var(idx("kappa", h(t)), "kappa", in_.config.kappa_lo, in_.config.kappa_hi);
    for (const auto& z : in_.zones) m_.add_var(idx("zeta", h(t), z.id), "zeta", 0.0, cap_);

    for (const auto& d : in_.demands) {
      if (d.hour != t) continue;
      if (d.pays_upp) {
        int ug = m_.add_binary(idx("ug", h(t), d.id), "ug");
        if (in_.must_run(d)) m_.vars()[ug].lb = 1.0;
        m_.add_binary(idx("ue", h(t), d.id), "ue");
        m_.add_binary(idx("uw", h(t), d.id), "uw");
        m_.add_binary(idx("ud", h(t), d.id), "ud");
        m_.add_var(idx("dw", h(t), d.id), "dw", -kInf, kInf);
        m_.add_var(idx("dd", h(t), d.id), "dd", 0.0, kInf);
        m_.add_var(idx("dpi", h(t), d.id), "dpi", 0.0, kInf);
        m_.add_var(idx("phiw", h(t), d.id), "phiw", 0.0, cap_);
        m_.add_var(idx("phiwlo", h(t), d.id), "phiwlo", 0.0, kInf);
        out_.bigm.m_demand[{t, d.id}] = D(d);
      } else {
        m_.add_var(idx("dz", h(t), d.id), "dz", 0.0, kInf);
        m_.add_var(idx("phiz", h(t), d.id), "phiz", 0.0, kInf);
      }
    }
    for (const auto& s : in_.supplies) {
      if (s.hour != t) continue;
      m_.add_var(idx("s", h(t), s.id), "s", 0.0, kInf);
      m_.add_var(idx("phis", h(t), s.id), "phis", 0.0, kInf);
    }
    for (auto [a, b] : pairs_) {
      for (auto [i, j] : {std::pair{a, b}, std::pair{b, a}}) {
        const auto& zi = in_.zones[i].id;
        const auto& zj = in_.zones[j].id;
        m_.add_var(idx("f", h(t), zi, zj), "f", -kInf, kInf);
        m_.add_var(idx("delta", h(t), zi, zj), "delta", 0.0, kInf);
        m_.add_var(idx("eta", h(t), zi, zj), "eta", -kInf, kInf);
        out_.bigm.m_flow[{t, zi, zj}] =
            in_.mwh(link_capacity(in_, zi, zj, t)) + in_.mwh(link_capacity(in_, zj, zi, t));
      }
    }
    for (const auto& zone : upp_zones_with_orders(t)) {
      std::int64_t units = 0;
      for (const auto& d : in_.demands)
        if (d.hour == t && d.pays_upp && d.zone == zone) {
          if (d.quantity.units > (std::int64_t{1} << 53) - units)
            throw OverflowError("scaled UPP quantity overflow in zone " + zone);
          units += d.quantity.units;
        }
      int J = expansion_width(units);
      out_.expansion.width[{t, zone}] = J;
      for (int j = 0; j <= J; ++j) m_.add_binary(idx("b", h(t), j, zone), "b");
    }
  }

  void block_variables(const BlockOrder& b) {
    const double mb = cap_ * block_total(b);
    out_.bigm.m_block[b.id] = mb;
    m_.add_binary(idx("uB", b.id), "uB");
    m_.add_var(idx("r", b.id), "r", -kInf, kInf);
    m_.add_var(idx("phiBmax", b.id), "phiBmax", 0.0, mb);
    m_.add_var(idx("phiBmin", b.id), "phiBmin", 0.0, mb);
  }

  void hour_products(Hour t) {
    int pi = var(idx("pi", h(t)));
    for (const DemandOrder* d : upp_orders(t)) {
      const auto& k = d->id;
      int ug = var(idx("ug", h(t), k)), ue = var(idx("ue", h(t), k)), uw = var(idx("uw", h(t), k));
      int zeta = var(idx("zeta", h(t), d->zone));
      out_.products.push_back(linearize_product(m_, idx("ygp", h(t), k), "ygp", ug, pi, cap_, false));
      out_.products.push_back(linearize_product(m_, idx("yep", h(t), k), "yep", ue, pi, cap_, false));
      out_.products.push_back(
          linearize_product(m_, idx("ywphi", h(t), k), "ywphi", uw, var(idx("phiw", h(t), k)), cap_, true));
      out_.products.push_back(linearize_product(m_, idx("ygz", h(t), k, d->zone), "ygz", ug, zeta, cap_, false));
    }
    for (const auto& zone : upp_zones_with_orders(t)) {
      int zeta = var(idx("zeta", h(t), zone));
      int J = out_.expansion.width.at({t, zone});
      for (int j = 0; j <= J; ++j)
        out_.products.push_back(
            linearize_product(m_, idx("ybz", h(t), zone, j), "ybz", var(idx("b", h(t), j, zone)), zeta, cap_, false));
    }
  }

  void block_products(const BlockOrder& b) {
    const double mb = out_.bigm.m_block.at(b.id);
    int uB = var(idx("uB", b.id));
    out_.products.push_back(linearize_product(m_, idx("yBmax", b.id), "yBmax", uB, var(idx("phiBmax", b.id)), mb, true));
    out_.products.push_back(linearize_product(m_, idx("yBmin", b.id), "yBmin", uB, var(idx("phiBmin", b.id)), mb, true));
  }

  void objective() {
    m_.set_maximize(true);
    for (const auto& d : in_.demands)
      m_.set_objective(var(idx(d.pays_upp ? "dpi" : "dz", h(d.hour), d.id)), d.price);
    for (const auto& s : in_.supplies) m_.set_objective(var(idx("s", h(s.hour), s.id)), -s.price);
    for (const auto& b : in_.blocks) m_.set_objective(var(idx("r", b.id)), -b.price * block_total(b));
  }

  // Exact UPP definition: sum D y^gpi + sum P d^d = sum D y^gzeta - sum D y^wphi
  //                       + 10^-c sum 2^j y^bzeta + kappa
  void build_upp_constraint(Hour t) {
    auto orders = upp_orders(t);
    if (orders.empty()) return;
    std::vector<Term> terms;
    for (const DemandOrder* d : orders) {
      const auto& k = d->id;
      terms.push_back({var(idx("ygp", h(t), k)), D(*d)});
      terms.push_back({var(idx("dd", h(t), k)), d->price});
      terms.push_back({var(idx("ygz", h(t), k, d->zone)), -D(*d)});
      terms.push_back({var(idx("ywphi", h(t), k)), D(*d)});
    }
    for (const auto& zone : upp_zones_with_orders(t)) {
      int J = out_.expansion.width.at({t, zone});
      for (int j = 0; j <= J; ++j)
        terms.push_back({var(idx("ybz", h(t), zone, j)), -std::ldexp(1.0, j) / scale_});
    }
    terms.push_back({var(idx("kappa", h(t))), -1.0});
    m_.add_row(idx("upp", h(t)), "upp", std::move(terms), Sense::EQ, 0.0);
  }

  // Primal objective of the lower level minus its dual objective, with every
  // binary-times-dual product replaced by its auxiliary.
  void strong_duality() {
    std::vector<Term> terms;
    for (Hour t : in_.hours) {
      for (const auto& d : in_.demands) {
        if (d.hour != t) continue;
        if (d.pays_upp) {
          terms.push_back({var(idx("dw", h(t), d.id)), d.price});
          terms.push_back({var(idx("ywphi", h(t), d.id)), -D(d)});
          terms.push_back({var(idx("ygz", h(t), d.id, d.zone)), D(d)});
        } else {
          terms.push_back({var(idx("dz", h(t), d.id)), d.price});
          terms.push_back({var(idx("phiz", h(t), d.id)), -D(d)});
        }
      }
      for (const auto& s : in_.supplies) {
        if (s.hour != t) continue;
        terms.push_back({var(idx("s", h(t), s.id)), -s.price});
        terms.push_back({var(idx("phis", h(t), s.id)), -in_.mwh(s.quantity)});
      }
      for (auto [a, b] : pairs_)
        for (auto [i, j] : {std::pair{a, b}, std::pair{b, a}}) {
          double F = in_.mwh(link_capacity(in_, in_.zones[i].id, in_.zones[j].id, t));
          terms.push_back({var(idx("delta", h(t), in_.zones[i].id, in_.zones[j].id)), -F});
        }
      for (const auto& zone : upp_zones_with_orders(t)) {
        int J = out_.expansion.width.at({t, zone});
        for (int j = 0; j <= J; ++j)
          terms.push_back({var(idx("ybz", h(t), zone, j)), std::ldexp(1.0, j) / scale_});
      }
    }
    for (const auto& b : in_.blocks) {
      terms.push_back({var(idx("r", b.id)), -b.price * block_total(b)});
      terms.push_back({var(idx("yBmax", b.id)), -1.0});
      terms.push_back({var(idx("yBmin", b.id)), b.mar});
    }
    m_.add_row("sd", "sd", std::move(terms), Sense::EQ, 0.0);
  }

  void upper_level_rows(Hour t) {
    const double eps = in_.config.epsilon;
    int pi = var(idx("pi", h(t)));
    for (const DemandOrder* d : upp_orders(t)) {
      const auto& k = d->id;
      int ug = var(idx("ug", h(t), k)), ue = var(idx("ue", h(t), k)), uw = var(idx("uw", h(t), k)),
          ud = var(idx("ud", h(t), k));
      int dw = var(idx("dw", h(t), k)), dd = var(idx("dd", h(t), k)), dpi = var(idx("dpi", h(t), k));
      // P - pi <= M ug ;  P - pi >= eps - M (1 - ug)
      m_.add_row(idx("ugm1", h(t), k), "ugm1", {{pi, -1.0}, {ug, -cap_}}, Sense::LE, -d->price);
      m_.add_row(idx("ugm2", h(t), k), "ugm2", {{pi, -1.0}, {ug, -cap_}}, Sense::GE, eps - cap_ - d->price);
      m_.add_row(idx("uean", h(t), k), "uean", {{ue, d->price}, {var(idx("yep", h(t), k)), -1.0}}, Sense::EQ, 0.0);
      m_.add_row(idx("recap", h(t), k), "recap", {{dpi, 1.0}, {ug, -D(*d)}, {dw, -1.0}, {dd, -1.0}}, Sense::EQ, 0.0);
      m_.add_row(idx("uwud", h(t), k), "uwud", {{uw, 1.0}, {ud, 1.0}, {ue, -1.0}}, Sense::LE, 0.0);
      // ITM and ATM are exclusive
      m_.add_row(idx("uexc", h(t), k), "uexc", {{ug, 1.0}, {ue, 1.0}}, Sense::LE, 1.0);
      m_.add_row(idx("ddmax", h(t), k), "ddmax", {{dd, 1.0}, {ud, -D(*d)}}, Sense::LE, 0.0);
    }
  }

  void build_merit_chain(Hour t) {
    auto orders = upp_orders(t);
    for (std::size_t q = 1; q < orders.size(); ++q) {
      const auto& hi = orders[q - 1]->id;
      const auto& lo = orders[q]->id;
      m_.add_row(idx("mer", h(t), hi, lo), "mer", {{var(idx("ug", h(t), hi)), 1.0}, {var(idx("ug", h(t), lo)), -1.0}},
                 Sense::GE, 0.0);
    }
    if (!opt_.search_reduction) return;
    // u^e_k <= u^g_h - u^g_k against the cheapest strictly pricier order h;
    // the merit chain makes every other h redundant.
    for (std::size_t q = 1; q < orders.size(); ++q) {
      const DemandOrder* k = orders[q];
      const DemandOrder* hh = nullptr;
      for (std::size_t r = q; r-- > 0;)
        if (orders[r]->price > k->price) {
          hh = orders[r];
          break;
        }
      if (!hh) continue;
      m_.add_row(idx("sred", h(t), k->id), "sred",
                 {{var(idx("ue", h(t), k->id)), 1.0},
                  {var(idx("ug", h(t), hh->id)), -1.0},
                  {var(idx("ug", h(t), k->id)), 1.0}},
                 Sense::LE, 0.0);
    }
  }

  void lower_level_rows(Hour t) {
    for (const auto& d : in_.demands) {
      if (d.hour != t) continue;
      if (d.pays_upp) {
        int dw = var(idx("dw", h(t), d.id));
        m_.add_row(idx("dwmax", h(t), d.id), "dwmax", {{dw, 1.0}, {var(idx("uw", h(t), d.id)), -D(d)}}, Sense::LE, 0.0);
        m_.add_row(idx("dwlo", h(t), d.id), "dwlo", {{dw, -1.0}}, Sense::LE, 0.0);
      } else {
        m_.add_row(idx("dzmax", h(t), d.id), "dzmax", {{var(idx("dz", h(t), d.id)), 1.0}}, Sense::LE, D(d));
      }
    }
    for (const auto& s : in_.supplies) {
      if (s.hour != t) continue;
      m_.add_row(idx("smax", h(t), s.id), "smax", {{var(idx("s", h(t), s.id)), 1.0}}, Sense::LE, in_.mwh(s.quantity));
    }
    for (auto [a, b] : pairs_) {
      const auto& za = in_.zones[a].id;
      const auto& zb = in_.zones[b].id;
      for (auto [zi, zj] : {std::pair{za, zb}, std::pair{zb, za}})
        m_.add_row(idx("fmax", h(t), zi, zj), "fmax", {{var(idx("f", h(t), zi, zj)), 1.0}}, Sense::LE,
                   in_.mwh(link_capacity(in_, zi, zj, t)));
      m_.add_row(idx("fpair", h(t), za, zb), "fpair",
                 {{var(idx("f", h(t), za, zb)), 1.0}, {var(idx("f", h(t), zb, za)), 1.0}}, Sense::EQ, 0.0);
    }
    for (const auto& zone : in_.zones) {
      std::vector<Term> terms;
      for (const auto& d : in_.demands) {
        if (d.hour != t || d.zone != zone.id) continue;
        if (d.pays_upp) {
          terms.push_back({var(idx("dw", h(t), d.id)), 1.0});
          terms.push_back({var(idx("ug", h(t), d.id)), D(d)});
          terms.push_back({var(idx("dd", h(t), d.id)), 1.0});
        } else {
          terms.push_back({var(idx("dz", h(t), d.id)), 1.0});
        }
      }
      for (const auto& s : in_.supplies)
        if (s.hour == t && s.zone == zone.id) terms.push_back({var(idx("s", h(t), s.id)), -1.0});
      for (auto [a, b] : pairs_) {
        if (in_.zones[a].id == zone.id) terms.push_back({var(idx("f", h(t), zone.id, in_.zones[b].id)), 1.0});
        if (in_.zones[b].id == zone.id) terms.push_back({var(idx("f", h(t), zone.id, in_.zones[a].id)), 1.0});
      }
      for (const auto& b : in_.blocks)
        if (b.zone == zone.id)
          if (auto it = b.profile.find(t); it != b.profile.end())
            terms.push_back({var(idx("r", b.id)), -in_.mwh(it->second)});
      m_.add_row(idx("bal", h(t), zone.id), "bal", std::move(terms), Sense::EQ, 0.0);
    }
  }

  void dual_rows(Hour t) {
    for (const auto& d : in_.demands) {
      if (d.hour != t) continue;
      int zeta = var(idx("zeta", h(t), d.zone));
      if (d.pays_upp)
        m_.add_row(idx("dfw", h(t), d.id), "dfw",
                   {{var(idx("phiw", h(t), d.id)), 1.0}, {var(idx("phiwlo", h(t), d.id)), -1.0}, {zeta, 1.0}},
                   Sense::EQ, d.price);
      else
        m_.add_row(idx("dfz", h(t), d.id), "dfz", {{var(idx("phiz", h(t), d.id)), 1.0}, {zeta, 1.0}}, Sense::GE,
                   d.price);
    }
    for (const auto& s : in_.supplies) {
      if (s.hour != t) continue;
      m_.add_row(idx("dfs", h(t), s.id), "dfs",
                 {{var(idx("phis", h(t), s.id)), 1.0}, {var(idx("zeta", h(t), s.zone)), -1.0}}, Sense::GE, -s.price);
    }
    for (auto [a, b] : pairs_)
      for (auto [i, j] : {std::pair{a, b}, std::pair{b, a}}) {
        const auto& zi = in_.zones[i].id;
        const auto& zj = in_.zones[j].id;
        m_.add_row(idx("dff", h(t), zi, zj), "dff",
                   {{var(idx("delta", h(t), zi, zj)), 1.0},
                    {var(idx("eta", h(t), zi, zj)), 1.0},
                    {var(idx("eta", h(t), zj, zi)), 1.0},
                    {var(idx("zeta", h(t), zi)), 1.0}},
                   Sense::EQ, 0.0);
      }
  }

  void expansion_rows(Hour t) {
    for (const auto& zone : upp_zones_with_orders(t)) {
      std::vector<Term> terms;
      int J = out_.expansion.width.at({t, zone});
      for (int j = 0; j <= J; ++j) terms.push_back({var(idx("b", h(t), j, zone)), std::ldexp(1.0, j)});
      for (const auto& d : in_.demands)
        if (d.hour == t && d.pays_upp && d.zone == zone) terms.push_back({var(idx("dd", h(t), d.id)), -scale_});
      m_.add_row(idx("bexp", h(t), zone), "bexp", std::move(terms), Sense::EQ, 0.0);
    }
  }

  int flow_indicator(Hour t, const std::string& zi, const std::string& zj, MarketSplit mode) {
    std::string name = idx("uf", h(t), zi, zj);
    if (int u = var(name); u >= 0) return u;
    const double F = in_.mwh(link_capacity(in_, zi, zj, t));
    const double Fr = in_.mwh(link_capacity(in_, zj, zi, t));
    const double mf = F + Fr;
    int u = m_.add_binary(name, "uf");
    m_.vars()[u].priority = -1;
    int f = var(idx("f", h(t), zi, zj));
    if (mode == MarketSplit::Strict) {
      // f <= F - eps_f + u ;  f >= F - M^F (1 - u)
      m_.add_row(idx("uf1", h(t), zi, zj), "uf1", {{f, 1.0}, {u, -1.0}}, Sense::LE, F - in_.config.epsilon_f);
      m_.add_row(idx("uf2", h(t), zi, zj), "uf2", {{f, 1.0}, {u, -mf}}, Sense::GE, F - mf);
    } else {
      // (F_ij + F_ji) u - f <= F_ji
      m_.add_row(idx("ufl", h(t), zi, zj), "ufl", {{u, mf}, {f, -1.0}}, Sense::LE, Fr);
    }
    return u;
  }

  void build_market_split(Hour t, MarketSplit mode) {
    auto orders = upp_orders(t);
    for (std::size_t a = 0; a < orders.size(); ++a)
      for (std::size_t b = 0; b < orders.size(); ++b) {
        const DemandOrder* hh = orders[a];
        const DemandOrder* k = orders[b];
        if (!(hh->merit < k->merit) || hh->price != k->price) continue;
        const double dmax = D(*hh);
        std::vector<Term> terms = {{var(idx("dw", h(t), hh->id)), 1.0},
                                   {var(idx("dd", h(t), hh->id)), 1.0},
                                   {var(idx("ue", h(t), k->id)), -dmax}};
        if (hh->zone == k->zone) {
          m_.add_row(idx("msz", h(t), hh->id, k->id), "msz", std::move(terms), Sense::GE, 0.0);
          continue;
        }
        const auto& zi = hh->zone;
        const auto& zj = k->zone;
        if (link_capacity(in_, zi, zj, t).units <= 0) continue;
        terms.push_back({flow_indicator(t, zi, zj, mode), dmax});
        if (link_capacity(in_, zj, zi, t).units > 0) terms.push_back({flow_indicator(t, zj, zi, mode), dmax});
        m_.add_row(idx("msx", h(t), hh->id, k->id), "msx", std::move(terms), Sense::GE, 0.0);
      }
  }

  void block_rows(const BlockOrder& b) {
    const double mb = out_.bigm.m_block.at(b.id);
    int uB = var(idx("uB", b.id)), r = var(idx("r", b.id));
    std::vector<Term> surplus;
    std::vector<Term> dual = {{var(idx("phiBmax", b.id)), 1.0}, {var(idx("phiBmin", b.id)), -1.0}};
    for (const auto& [t, q] : b.profile) {
      int zeta = var(idx("zeta", h(t), b.zone));
      surplus.push_back({zeta, in_.mwh(q)});
      dual.push_back({zeta, -in_.mwh(q)});
    }
    const double tot = block_total(b);
    surplus.push_back({uB, -mb});
    // sum S (zeta - P^B) >= -M^B (1 - u^B)
    m_.add_row(idx("mny", b.id), "mny", std::move(surplus), Sense::GE, b.price * tot - mb);
    m_.add_row(idx("rmax", b.id), "rmax", {{r, 1.0}, {uB, -1.0}}, Sense::LE, 0.0);
    m_.add_row(idx("rmin", b.id), "rmin", {{r, -1.0}, {uB, b.mar}}, Sense::LE, 0.0);
    m_.add_row(idx("dfb", b.id), "dfb", std::move(dual), Sense::EQ, -b.price * tot);
  }
};

}  // namespace

BuiltModel build_model(const MarketInstance& inst, const BuildOptions& options) {
  BuiltModel out;
  Builder(inst, options, out).run();
  return out;
}

}  // namespace uppclear
