// upp_clear: clear, validate, compare and generate day-ahead instances.
//
// Settings are layered: built-in defaults < config file (--config or
// UPPCLEAR_CONFIG, INI "key = value") < environment < command-line flags.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "uppclear/decode.hpp"
#include "uppclear/oracle.hpp"
#include "uppclear/pipeline.hpp"
#include "uppclear/synth.hpp"

namespace fs = std::filesystem;
using namespace uppclear;

namespace {

enum Exit { kOk = 0, kFailed = 1, kError = 2, kRefused = 3 };

// Settings shared by every command, by long flag name.
const std::vector<std::pair<std::string, std::string>> kSettings = {
    {"backend", "solver backend: highspy, scipy or highs"},
    {"solver-cmd", "command template overriding the backend"},
    {"python", "python interpreter for helper backends"},
    {"helper", "path of solve_mps.py"},
    {"rel-gap", "relative MIP gap"},
    {"abs-gap", "absolute MIP gap"},
    {"time-limit", "solver time limit in seconds"},
    {"threads", "solver threads"},
    {"mps-format", "free or fixed"},
    {"market-split", "off, strict or loose"},
    {"search-reduction", "on or off"},
    {"refine-prices", "on or off"},
    {"decompose", "auto, hourly or whole"},
    {"jobs", "concurrent hourly solves"},
    {"atm-merit", "severity of ATM merit violations: warn or fail"},
    {"format", "report format: text or json"},
    {"tol", "welfare tolerance for compare"},
    {"max-candidates", "oracle enumeration ceiling"},
    {"max-blocks", "oracle block ceiling"},
};

const std::map<std::string, std::string> kEnv = {
    {"UPPCLEAR_BACKEND", "backend"},       {"UPPCLEAR_SOLVER_CMD", "solver-cmd"},
    {"UPPCLEAR_PYTHON", "python"},         {"UPPCLEAR_HELPER", "helper"},
    {"UPPCLEAR_JOBS", "jobs"},             {"UPPCLEAR_TIME_LIMIT", "time-limit"},
    {"UPPCLEAR_MARKET_SPLIT", "market-split"}, {"UPPCLEAR_FORMAT", "format"},
};

struct RunConfig {
  ClearOptions clear;
  std::string format = "text";
  double tol = 1e-6;
  std::int64_t max_candidates = OracleLimits{}.max_candidates;
  int max_blocks = OracleLimits{}.max_blocks;
};

bool parse_switch(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw CLI::ValidationError(key, "expected on/off, got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t n = 0;
    double d = std::stod(v, &n);
    if (n == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw CLI::ValidationError(key, "expected a number, got '" + v + "'");
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t n = 0;
    long long d = std::stoll(v, &n);
    if (n == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw CLI::ValidationError(key, "expected an integer, got '" + v + "'");
}

void apply(RunConfig& rc, const std::string& key, const std::string& v) {
  auto& so = rc.clear.solve;
  if (key == "backend") so.backend = v;
  else if (key == "solver-cmd") so.command = v;
  else if (key == "python") so.python = v;
  else if (key == "helper") so.helper = v;
  else if (key == "rel-gap") so.rel_gap = parse_double(key, v);
  else if (key == "abs-gap") so.abs_gap = parse_double(key, v);
  else if (key == "time-limit") so.time_limit = parse_double(key, v);
  else if (key == "threads") so.threads = static_cast<int>(parse_int(key, v));
  else if (key == "mps-format") {
    if (v == "free") so.flavor = MpsFlavor::Free;
    else if (v == "fixed") so.flavor = MpsFlavor::Fixed;
    else throw CLI::ValidationError(key, "expected free or fixed");
  } else if (key == "market-split") {
    if (v == "off") rc.clear.build.market_split = MarketSplit::Off;
    else if (v == "strict") rc.clear.build.market_split = MarketSplit::Strict;
    else if (v == "loose") rc.clear.build.market_split = MarketSplit::Loose;
    else throw CLI::ValidationError(key, "expected off, strict or loose");
  } else if (key == "search-reduction") rc.clear.build.search_reduction = parse_switch(key, v);
  else if (key == "refine-prices") rc.clear.refine_prices = parse_switch(key, v);
  else if (key == "decompose") {
    if (v == "auto") rc.clear.decomposition = Decomposition::Auto;
    else if (v == "hourly") rc.clear.decomposition = Decomposition::Hourly;
    else if (v == "whole") rc.clear.decomposition = Decomposition::WholeDay;
    else throw CLI::ValidationError(key, "expected auto, hourly or whole");
  } else if (key == "jobs") rc.clear.jobs = static_cast<int>(parse_int(key, v));
  else if (key == "atm-merit") {
    if (v == "warn") rc.clear.validate.atm_merit = Severity::Warn;
    else if (v == "fail") rc.clear.validate.atm_merit = Severity::Fail;
    else throw CLI::ValidationError(key, "expected warn or fail");
  } else if (key == "format") {
    if (v != "text" && v != "json") throw CLI::ValidationError(key, "expected text or json");
    rc.format = v;
  } else if (key == "tol") rc.tol = parse_double(key, v);
  else if (key == "max-candidates") rc.max_candidates = parse_int(key, v);
  else if (key == "max-blocks") rc.max_blocks = static_cast<int>(parse_int(key, v));
  else throw CLI::ValidationError(key, "unknown setting");
}

std::map<std::string, std::string> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path.string());
  std::map<std::string, std::string> out;
  for (const auto& item : CLI::ConfigINI().from_config(in)) {
    if (item.inputs.empty()) continue;
    std::string key = item.name;
    for (auto& c : key)
      if (c == '_') c = '-';
    out[key] = item.inputs.front();
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

// Rounds away solver noise so tables never show "-0.00".
double shown(double v, int decimals) {
  const double half = 0.5 * std::pow(10.0, -decimals);
  return std::abs(v) < half ? 0.0 : v;
}

void print_tables(const MarketInstance& inst, const ClearingResult& res) {
  std::printf("%6s %14s %12s\n", "hour", "PUN", "kappa");
  for (const auto& h : res.hours) {
    if (h.pi_determined)
      std::printf("%6d %14.6f %12.6f\n", h.hour, shown(h.pi, 6), shown(h.kappa, 6));
    else
      std::printf("%6d %14s %12.6f\n", h.hour, "-", shown(h.kappa, 6));
  }
  if (inst.blocks.empty()) return;
  std::printf("\n%-10s %10s %12s\n", "block", "r", "surplus");
  for (std::size_t p = 0; p < inst.blocks.size(); ++p)
    std::printf("%-10s %10.6f %12.2f\n", inst.blocks[p].id.c_str(), shown(res.blocks[p].ratio, 6),
                shown(block_surplus(inst, res, inst.blocks[p]), 2));
}

void print_failures(const ValidationReport& rep) {
  for (const auto& e : rep.failures(true))
    std::printf("  %s %s [%s] residual %.3g > %.3g %s\n", e.severity == Severity::Fail ? "FAIL" : "warn",
                e.rule.c_str(), e.scope.c_str(), e.residual, e.tol, e.detail.c_str());
}

nlohmann::json summary_json(const MarketInstance& inst, const ClearOutcome& out) {
  nlohmann::json j;
  j["status"] = to_string(out.status);
  j["decomposed"] = out.decomposed;
  j["validation_passed"] = out.report.passed();
  if (out.result) {
    j["welfare"] = out.result->welfare;
    for (const auto& h : out.result->hours)
      j["hours"].push_back({{"hour", h.hour}, {"pun", h.pi}, {"kappa", h.kappa}, {"pun_determined", h.pi_determined}});
    for (std::size_t p = 0; p < inst.blocks.size(); ++p)
      j["blocks"].push_back({{"id", inst.blocks[p].id},
                             {"ratio", out.result->blocks[p].ratio},
                             {"surplus", block_surplus(inst, *out.result, inst.blocks[p])}});
  }
  return j;
}

int cmd_clear(const RunConfig& rc, const fs::path& instance, fs::path out_dir) {
  MarketInstance inst = load_instance(instance);
  if (out_dir.empty()) out_dir = instance.stem().string() + "_clear";
  fs::create_directories(out_dir);
  ClearOptions co = rc.clear;
  co.out_dir = out_dir;
  ClearOutcome out = clear_instance(inst, co);
  if (out.result) write_file(out_dir / "clearing.json", clearing_to_json(*out.result));
  write_file(out_dir / "validation.json", report_to_json(out.report));

  if (rc.format == "json") {
    std::cout << summary_json(inst, out).dump(2) << "\n";
  } else {
    std::printf("status %s%s\n", to_string(out.status).c_str(), out.decomposed ? " (hourly)" : "");
    if (out.result) {
      std::printf("welfare %.6f\n\n", out.result->welfare);
      print_tables(inst, *out.result);
    }
    std::printf("\nvalidation %s (%zu checks, %zu failed)\n", out.report.passed() ? "passed" : "FAILED",
                out.report.entries.size(), out.report.failures(true).size());
    print_failures(out.report);
    std::printf("artifacts in %s\n", out_dir.string().c_str());
  }
  return out.ok() ? kOk : kFailed;
}

int cmd_validate(const RunConfig& rc, const fs::path& instance, const fs::path& clearing, const fs::path& report) {
  MarketInstance inst = load_instance(instance);
  ClearingResult res = clearing_from_json(slurp(clearing));
  if (res.demands.size() != inst.demands.size() || res.supplies.size() != inst.supplies.size() ||
      res.blocks.size() != inst.blocks.size())
    throw std::runtime_error("clearing result does not match the instance");
  ValidationReport rep = validate_all(inst, res, rc.clear.validate);
  if (!report.empty()) write_file(report, report_to_json(rep));
  if (rc.format == "json") {
    std::cout << report_to_json(rep);
  } else {
    std::printf("validation %s (%zu checks, %zu failed)\n", rep.passed() ? "passed" : "FAILED", rep.entries.size(),
                rep.failures(true).size());
    print_failures(rep);
  }
  return rep.passed() ? kOk : kFailed;
}

int cmd_compare(const RunConfig& rc, const fs::path& instance) {
  MarketInstance inst = load_instance(instance);
  OracleLimits lim;
  lim.max_candidates = rc.max_candidates;
  lim.max_blocks = rc.max_blocks;
  try {
    check_oracle_limits(inst, lim);
  } catch (const OracleLimitError& e) {
    std::fprintf(stderr, "refused: %s\n", e.what());
    return kRefused;
  }
  ClearOutcome out = clear_instance(inst, rc.clear);
  OracleResult orc = enumerate_clear(inst, lim);
  const ClearingResult* milp = out.result && out.status == SolveStatus::Optimal ? &*out.result : nullptr;
  if (!milp && out.status != SolveStatus::Infeasible)
    throw std::runtime_error("MILP solve ended with status " + to_string(out.status));
  CompareReport rep = compare(inst, milp, orc, rc.tol);
  if (rc.format == "json") {
    nlohmann::json j = {{"pass", rep.pass},
                        {"gap", rep.milp_feasible && rep.oracle_feasible ? nlohmann::json(rep.gap) : nlohmann::json()},
                        {"milp_feasible", rep.milp_feasible},
                        {"oracle_feasible", rep.oracle_feasible},
                        {"milp_welfare", rep.milp_welfare},
                        {"oracle_welfare", rep.oracle_welfare},
                        {"tol", rep.tol},
                        {"enumerated", orc.enumerated},
                        {"oracle_candidate", orc.best_candidate},
                        {"diverging", rep.diverging}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("%s\n", rep.summary().c_str());
    std::printf("oracle enumerated %lld candidates, best %s\n", static_cast<long long>(orc.enumerated),
                orc.best_candidate.c_str());
    for (const auto& d : rep.diverging) std::printf("  diverging %s\n", d.c_str());
  }
  return rep.pass ? kOk : kFailed;
}

HourSpan parse_span(const std::string& s) {
  auto dash = s.find('-');
  if (dash == std::string::npos) throw CLI::ValidationError("--span", "expected FIRST-LAST");
  return HourSpan{static_cast<Hour>(parse_int("--span", s.substr(0, dash))),
                  static_cast<Hour>(parse_int("--span", s.substr(dash + 1)))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Day-ahead market clearing with a uniform purchase price and curtailable blocks"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "INI settings file (also UPPCLEAR_CONFIG)");
  std::map<std::string, std::string> flag_values;
  for (const auto& [name, help] : kSettings) app.add_option("--" + name, flag_values[name], help);

  auto* clear = app.add_subcommand("clear", "Solve an instance, write model, solution and reports");
  std::string clear_instance_path, clear_out;
  clear->add_option("instance", clear_instance_path, "instance file")->required()->check(CLI::ExistingFile);
  clear->add_option("-o,--out", clear_out, "artifact directory (default <stem>_clear)");

  auto* validate = app.add_subcommand("validate", "Check a clearing result against the market rules");
  std::string val_instance, val_clearing, val_report;
  validate->add_option("instance", val_instance, "instance file")->required()->check(CLI::ExistingFile);
  validate->add_option("clearing", val_clearing, "clearing.json")->required()->check(CLI::ExistingFile);
  validate->add_option("-o,--out", val_report, "write the report as JSON");

  auto* cmp = app.add_subcommand("compare", "Compare the MILP against the enumeration oracle");
  std::string cmp_instance;
  cmp->add_option("instance", cmp_instance, "instance file")->required()->check(CLI::ExistingFile);

  auto* gen = app.add_subcommand("gen", "Write a synthetic instance");
  std::uint64_t seed = 1;
  int n_blocks = 0, gen_hours = 24, max_zones = 3, max_hours = 3;
  std::string span = "9-20", zones = "NORD,SVIZ", gen_out;
  bool random_small = false;
  gen->add_option("--seed", seed, "random seed");
  gen->add_option("--blocks", n_blocks, "number of block orders")->check(CLI::NonNegativeNumber);
  gen->add_option("--span", span, "block profile hours FIRST-LAST");
  gen->add_option("--zones", zones, "UPP zone and other zone for blocks, comma separated");
  gen->add_option("--hours", gen_hours, "market hours")->check(CLI::Range(1, 24));
  gen->add_flag("--random", random_small, "small oracle-sized random instance instead");
  gen->add_option("--max-zones", max_zones, "random: zone ceiling")->check(CLI::Range(1, 3));
  gen->add_option("--max-hours", max_hours, "random: hour ceiling")->check(CLI::Range(1, 3));
  gen->add_option("-o,--out", gen_out, "output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    RunConfig rc;
    rc.clear.solve = default_solve_options();
    if (config_path.empty())
      if (const char* c = std::getenv("UPPCLEAR_CONFIG")) config_path = c;
    if (!config_path.empty())
      for (const auto& [k, v] : read_config_file(config_path)) apply(rc, k, v);
    for (const auto& [var, key] : kEnv)
      if (const char* v = std::getenv(var.c_str()); v && *v) apply(rc, key, v);
    for (const auto& [name, help] : kSettings)
      if (app.count("--" + name) > 0) apply(rc, name, flag_values[name]);

    if (clear->parsed()) return cmd_clear(rc, clear_instance_path, clear_out);
    if (validate->parsed()) return cmd_validate(rc, val_instance, val_clearing, val_report);
    if (cmp->parsed()) return cmd_compare(rc, cmp_instance);
    if (gen->parsed()) {
      MarketInstance inst;
      if (random_small) {
        RandomShape shape;
        shape.max_zones = max_zones;
        shape.max_hours = max_hours;
        shape.allow_blocks = n_blocks > 0;
        shape.max_blocks = std::min(n_blocks, 2);
        inst = random_instance(seed, shape);
      } else {
        auto comma = zones.find(',');
        if (comma == std::string::npos) throw CLI::ValidationError("--zones", "expected UPP,OTHER");
        MarketShape shape;
        shape.hours = gen_hours;
        inst = generate_synthetic(seed, n_blocks, {zones.substr(0, comma), zones.substr(comma + 1)},
                                  parse_span(span), shape);
      }
      save_instance(inst, gen_out);
      std::printf("wrote %s (%zu demand, %zu supply, %zu block orders)\n", gen_out.c_str(), inst.demands.size(),
                  inst.supplies.size(), inst.blocks.size());
      return kOk;
    }
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kError;
  }
  return kError;
}
