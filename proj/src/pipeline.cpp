#include "uppclear/pipeline.hpp"

#include <omp.h>

#include <cmath>
#include <exception>
#include <map>

#include "uppclear/decode.hpp"

namespace uppclear {

bool use_hourly(const MarketInstance& inst, Decomposition mode) {
  switch (mode) {
    case Decomposition::WholeDay:
      return false;
    case Decomposition::Hourly:
      if (!inst.blocks.empty()) throw std::invalid_argument("hourly decomposition needs a blockless instance");
      return true;
    case Decomposition::Auto:
      break;
  }
  return inst.blocks.empty() && inst.hours.size() > 1;
}

MilpModel price_refinement_model(const BuiltModel& built, const std::vector<double>& x, double welfare) {
  MilpModel m = built.model;
  std::vector<Term> obj;
  for (std::size_t j = 0; j < m.vars().size(); ++j) {
    auto& v = m.vars()[j];
    if (v.type == VarType::Binary) v.lb = v.ub = std::round(x[j]);
    if (const double c = m.objective()[j]; c != 0.0) obj.push_back({static_cast<int>(j), c});
    m.set_objective(static_cast<int>(j), 0.0);
  }
  m.add_row("welfare", "welfare", std::move(obj), Sense::GE, welfare - 1e-8);
  m.set_maximize(false);
  const auto n = m.vars().size();
  for (std::size_t j = 0; j < n; ++j) {
    if (m.vars()[j].family != "kappa") continue;
    const std::string tag = m.vars()[j].name.substr(m.vars()[j].name.find('['));
    int a = m.add_var("kabs" + tag, "kabs", 0.0, kInf);
    m.add_row("kabs_p" + tag, "kabs", {{a, 1.0}, {static_cast<int>(j), -1.0}}, Sense::GE, 0.0);
    m.add_row("kabs_n" + tag, "kabs", {{a, 1.0}, {static_cast<int>(j), 1.0}}, Sense::GE, 0.0);
    m.set_objective(a, 1.0);
  }
  return m;
}

namespace {

struct Part {
  SubSolve info;
  std::optional<ClearingResult> result;
  ValidationReport rows;
};

Part solve_part(const MarketInstance& inst, const ClearOptions& o, std::vector<Hour> hours,
                const std::filesystem::path& dir) {
  Part part;
  part.info.hours = std::move(hours);
  BuiltModel built = build_model(inst, o.build);
  part.info.columns = built.model.vars().size();
  part.info.rows = built.model.rows().size();
  part.info.binaries = built.model.binary_count();
  SolveOptions so = o.solve;
  if (!dir.empty()) {
    so.work_dir = dir;
    so.keep_files = true;
  }
  RawSolution raw = solve(built.model, so);
  part.info.status = raw.status;
  part.info.objective = raw.objective;
  part.info.bound = raw.bound;
  part.info.solve_time = raw.solve_time;
  part.info.work_dir = raw.work_dir;
  part.info.message = raw.message;
  if (raw.status == SolveStatus::Optimal && o.refine_prices && built.catalog.count("kappa") > 0) {
    MilpModel lp = price_refinement_model(built, raw.values, raw.objective);
    SolveOptions lo = so;
    if (!dir.empty()) lo.work_dir = dir / "refine";
    RawSolution ref = solve(lp, lo);
    if (ref.status == SolveStatus::Optimal) {
      ref.values.resize(built.model.vars().size());
      ref.objective = built.model.objective_value(ref.values);
      ref.status = raw.status;
      ref.bound = raw.bound;
      ref.solve_time += raw.solve_time;
      part.info.solve_time = ref.solve_time;
      raw = std::move(ref);
    }
  }
  if (raw.status == SolveStatus::Optimal || raw.status == SolveStatus::Feasible) {
    part.result = decode(inst, built, raw);
    part.rows = check_model_rows(built.model, raw.values, o.validate.tol_p);
  }
  return part;
}

SolveStatus combine(SolveStatus a, SolveStatus b) {
  auto rank = [](SolveStatus s) {
    switch (s) {
      case SolveStatus::Optimal: return 0;
      case SolveStatus::Feasible: return 1;
      case SolveStatus::Timeout: return 2;
      case SolveStatus::Infeasible: return 3;
      case SolveStatus::Error: return 4;
    }
    return 4;
  };
  return rank(a) >= rank(b) ? a : b;
}

void merge_hour(const MarketInstance& sub, const ClearingResult& part, ClearingResult& out) {
  const Hour t = sub.hours.front();
  *out.hour(t) = *part.hour(t);
  for (const auto& z : part.zone_prices) out.set_zeta(z.hour, z.zone, z.zeta);
  std::map<std::string, std::size_t> demand, supply;
  for (std::size_t k = 0; k < out.demands.size(); ++k) demand[out.demands[k].id] = k;
  for (std::size_t p = 0; p < out.supplies.size(); ++p) supply[out.supplies[p].id] = p;
  for (const auto& d : part.demands) out.demands[demand.at(d.id)] = d;
  for (const auto& s : part.supplies) out.supplies[supply.at(s.id)] = s;
  for (auto& f : out.flows)
    if (f.hour == t)
      if (const auto* pf = part.flow(t, f.from, f.to)) f = *pf;
  for (const auto& e : part.expansions) out.expansions.push_back(e);
}

}  // namespace

ClearOutcome clear_instance(const MarketInstance& inst, const ClearOptions& o) {
  if (inst.empty_book()) throw EmptyInstanceError("no orders");
  validate_solve_options(o.solve);
  ClearOutcome out;
  out.decomposed = use_hourly(inst, o.decomposition);

  if (!out.decomposed) {
    Part part = solve_part(inst, o, inst.hours, o.out_dir);
    out.status = part.info.status;
    out.parts.push_back(part.info);
    if (part.result) {
      out.result = std::move(part.result);
      out.report = part.rows;
    }
  } else {
    std::vector<MarketInstance> subs;
    for (Hour t : inst.hours) subs.push_back(restrict_to_hour(inst, t));
    const int n = static_cast<int>(subs.size());
    std::vector<std::optional<Part>> parts(n);
    std::vector<std::exception_ptr> errors(n);
    const int jobs = o.jobs > 0 ? o.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
    for (int i = 0; i < n; ++i) {
      if (subs[i].empty_book()) continue;
      try {
        std::filesystem::path dir;
        if (!o.out_dir.empty()) dir = o.out_dir / ("hour_" + std::to_string(subs[i].hours.front()));
        parts[i] = solve_part(subs[i], o, subs[i].hours, dir);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);

    ClearingResult merged = empty_clearing(inst, "milp");
    out.status = SolveStatus::Optimal;
    bool complete = true;
    for (int i = 0; i < n; ++i) {
      if (!parts[i]) continue;
      out.status = combine(out.status, parts[i]->info.status);
      out.parts.push_back(parts[i]->info);
      if (!parts[i]->result) {
        complete = false;
        continue;
      }
      merge_hour(subs[i], *parts[i]->result, merged);
      for (auto e : parts[i]->rows.entries) {
        e.scope = "hour " + std::to_string(subs[i].hours.front()) + " " + e.scope;
        out.report.add(std::move(e));
      }
    }
    if (complete) {
      merged.welfare = clearing_welfare(inst, merged);
      out.result = std::move(merged);
    }
  }
  if (out.result) out.report.merge(validate_all(inst, *out.result, o.validate));
  return out;
}

}  // namespace uppclear
