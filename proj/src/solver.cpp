#include "uppclear/solver.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unordered_map>

#ifndef UPPCLEAR_DEFAULT_HELPER
#define UPPCLEAR_DEFAULT_HELPER "tools/solve_mps.py"
#endif
#ifndef UPPCLEAR_DEFAULT_PYTHON
#define UPPCLEAR_DEFAULT_PYTHON "python3"
#endif

namespace uppclear {

namespace fs = std::filesystem;

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Timeout: return "timeout";
    case SolveStatus::Error: return "error";
  }
  return "error";
}

SolveOptions default_solve_options() {
  SolveOptions o;
  o.python = UPPCLEAR_DEFAULT_PYTHON;
  o.helper = UPPCLEAR_DEFAULT_HELPER;
  if (const char* v = std::getenv("UPPCLEAR_BACKEND"); v && *v) o.backend = v;
  if (const char* v = std::getenv("UPPCLEAR_SOLVER_CMD"); v && *v) o.command = v;
  if (const char* v = std::getenv("UPPCLEAR_PYTHON"); v && *v) o.python = v;
  if (const char* v = std::getenv("UPPCLEAR_HELPER"); v && *v) o.helper = v;
  return o;
}

void validate_solve_options(const SolveOptions& o) {
  if (!(o.rel_gap >= 0.0) || !(o.abs_gap >= 0.0)) throw std::invalid_argument("solver gaps must be >= 0");
  if (!(o.time_limit > 0.0)) throw std::invalid_argument("time limit must be > 0");
  if (o.threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (o.command.empty() && o.backend != "highspy" && o.backend != "scipy" && o.backend != "highs")
    throw std::invalid_argument("unknown backend '" + o.backend + "'");
}

ParsedSolution parse_highs_solution(const std::string& text) {
  ParsedSolution p;
  std::istringstream in(text);
  std::string line;
  auto next = [&]() -> bool {
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return true;
    }
    return false;
  };
  if (!next() || line != "Model status") throw SolutionParseError("solution file: missing 'Model status' header");
  if (!next()) throw SolutionParseError("solution file: missing model status");
  p.model_status = line;
  while (next()) {
    if (line == "# Primal solution values") break;
  }
  if (in.eof() && line != "# Primal solution values") return p;
  if (!next()) return p;
  if (line != "Feasible") return p;  // "None" or "Infeasible"
  p.has_primal = true;
  if (!next() || line.rfind("Objective ", 0) != 0) throw SolutionParseError("solution file: missing objective");
  try {
    p.objective = std::stod(line.substr(10));
  } catch (const std::exception&) {
    throw SolutionParseError("solution file: bad objective '" + line + "'");
  }
  if (!next() || line.rfind("# Columns ", 0) != 0) throw SolutionParseError("solution file: missing column block");
  long n = std::strtol(line.c_str() + 10, nullptr, 10);
  for (long i = 0; i < n; ++i) {
    if (!next()) throw SolutionParseError("solution file: truncated column block");
    auto sp = line.find_last_of(' ');
    if (sp == std::string::npos || sp == 0) throw SolutionParseError("solution file: bad column line '" + line + "'");
    const std::string name = line.substr(0, sp);
    const std::string val = line.substr(sp + 1);
    char* end = nullptr;
    double v = std::strtod(val.c_str(), &end);
    if (end == val.c_str() || *end != '\0') throw SolutionParseError("solution file: bad value '" + line + "'");
    p.columns[name] = v;
  }
  return p;
}

namespace {

std::vector<std::string> split_command(const std::string& cmd) {
  std::vector<std::string> out;
  std::string cur;
  char quote = 0;
  bool have = false;
  for (char c : cmd) {
    if (quote) {
      if (c == quote) quote = 0;
      else cur += c;
    } else if (c == '"' || c == '\'') {
      quote = c;
      have = true;
    } else if (c == ' ' || c == '\t') {
      if (have || !cur.empty()) out.push_back(cur);
      cur.clear();
      have = false;
    } else {
      cur += c;
    }
  }
  if (have || !cur.empty()) out.push_back(cur);
  return out;
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size())) s.replace(p, from.size(), to);
}

bool executable_reachable(const std::string& prog) {
  if (prog.find('/') != std::string::npos) return ::access(prog.c_str(), X_OK) == 0;
  const char* path = std::getenv("PATH");
  if (!path) return false;
  std::istringstream ps(path);
  std::string dir;
  while (std::getline(ps, dir, ':')) {
    if (dir.empty()) continue;
    if (::access((fs::path(dir) / prog).c_str(), X_OK) == 0) return true;
  }
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run_process(const std::vector<std::string>& argv, const fs::path& out, const fs::path& err) {
  pid_t pid = ::fork();
  if (pid < 0) throw BackendCrash("fork failed", "");
  if (pid == 0) {
    int fo = ::open(out.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    int fe = ::open(err.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fo < 0 || fe < 0) ::_exit(126);
    ::dup2(fo, 1);
    ::dup2(fe, 2);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw BackendCrash("waitpid failed", "");
  }
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return WEXITSTATUS(status);
}

fs::path make_work_dir(const SolveOptions& o, bool& temporary) {
  if (!o.work_dir.empty()) {
    fs::create_directories(o.work_dir);
    temporary = false;
    return o.work_dir;
  }
  std::string tmpl = (fs::temp_directory_path() / "uppclear-XXXXXX").string();
  if (!::mkdtemp(tmpl.data())) throw std::runtime_error("cannot create work directory");
  temporary = true;
  return tmpl;
}

SolveStatus status_from_text(const std::string& s, bool has_primal) {
  if (s == "optimal" || s == "Optimal" || s == "Empty") return SolveStatus::Optimal;
  if (s == "feasible") return SolveStatus::Feasible;
  if (s == "infeasible" || s == "Infeasible") return SolveStatus::Infeasible;
  if (s == "timeout" || s == "Time limit reached")
    return has_primal ? SolveStatus::Feasible : SolveStatus::Timeout;
  return SolveStatus::Error;
}

}  // namespace

RawSolution solve(const MilpModel& model, const SolveOptions& options) {
  validate_solve_options(options);
  bool temporary = false;
  fs::path dir = make_work_dir(options, temporary);
  const fs::path model_path = dir / "model.mps";
  const fs::path sol_path = dir / "solution.sol";
  const bool cli = options.command.empty() && options.backend == "highs";
  const fs::path opt_path = dir / (cli ? "options.txt" : "options.json");
  emit_model(model, model_path, options.flavor);
  {
    std::ofstream of(opt_path);
    if (cli) {
      of << "mip_rel_gap = " << options.rel_gap << "\nmip_abs_gap = " << options.abs_gap
         << "\ntime_limit = " << options.time_limit << "\nthreads = " << options.threads
         << "\nprimal_feasibility_tolerance = 1e-9\ndual_feasibility_tolerance = 1e-9"
         << "\nmip_feasibility_tolerance = 1e-9\nwrite_solution_style = 0\n";
    } else {
      nlohmann::json j = {{"rel_gap", options.rel_gap}, {"abs_gap", options.abs_gap},
                          {"time_limit", options.time_limit}, {"threads", options.threads},
                          {"feasibility_tol", 1e-9}};
      of << j.dump() << '\n';
    }
  }

  std::string tmpl = options.command;
  if (tmpl.empty()) {
    if (cli)
      tmpl = "highs --model_file {model} --solution_file {solution} --options_file {options}";
    else
      tmpl = "{python} {helper} --engine " + options.backend + " --model {model} --solution {solution} --options {options}";
  }
  if (tmpl.find("{helper}") != std::string::npos && !fs::exists(options.helper))
    throw BackendNotFound("solver helper not found: " + options.helper);
  auto argv = split_command(tmpl);
  for (auto& a : argv) {
    replace_all(a, "{python}", options.python);
    replace_all(a, "{helper}", options.helper);
    replace_all(a, "{model}", model_path.string());
    replace_all(a, "{solution}", sol_path.string());
    replace_all(a, "{options}", opt_path.string());
  }
  if (argv.empty() || !executable_reachable(argv[0]))
    throw BackendNotFound("backend executable not found: " + (argv.empty() ? std::string("<empty>") : argv[0]));

  const auto t0 = std::chrono::steady_clock::now();
  int rc = run_process(argv, dir / "stdout.txt", dir / "stderr.txt");
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::string err = slurp(dir / "stderr.txt");
  const std::string out = slurp(dir / "stdout.txt");
  if (rc == 127) throw BackendNotFound("backend executable could not be started: " + argv[0]);
  if (rc != 0) throw BackendCrash("backend exited with status " + std::to_string(rc), err);
  if (!fs::exists(sol_path)) throw SolutionParseError("backend wrote no solution file\n" + err);

  ParsedSolution ps = parse_highs_solution(slurp(sol_path));
  RawSolution raw;
  raw.solve_time = elapsed;
  raw.message = ps.model_status;
  raw.objective = ps.objective;
  raw.bound = ps.objective;
  std::string status_text = ps.model_status;
  // The helper reports status and best bound on its last stdout line.
  if (auto nl = out.find_last_of('{'); nl != std::string::npos) {
    try {
      auto j = nlohmann::json::parse(out.substr(nl));
      if (j.contains("status")) status_text = j["status"].get<std::string>();
      if (j.contains("bound") && j["bound"].is_number()) raw.bound = j["bound"].get<double>();
      if (j.contains("time") && j["time"].is_number()) raw.solve_time = j["time"].get<double>();
    } catch (const nlohmann::json::exception&) {
    }
  }
  raw.status = status_from_text(status_text, ps.has_primal);

  if (raw.status == SolveStatus::Optimal || raw.status == SolveStatus::Feasible) {
    if (!ps.has_primal && !model.vars().empty())
      throw SolutionParseError("backend reported " + status_text + " without primal values");
    std::unordered_map<std::string, int> index;
    const auto& vars = model.vars();
    if (options.flavor == MpsFlavor::Fixed) {
      auto order = canonical_column_order(model);
      for (std::size_t p = 0; p < order.size(); ++p) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "C%07d", static_cast<int>(p) + 1);
        index[buf] = order[p];
      }
    } else {
      for (std::size_t j = 0; j < vars.size(); ++j) index[vars[j].name] = static_cast<int>(j);
    }
    raw.values.assign(vars.size(), std::nan(""));
    for (const auto& [name, v] : ps.columns) {
      auto it = index.find(name);
      if (it == index.end()) throw SolutionParseError("solution names unknown column '" + name + "'");
      raw.values[it->second] = v;
    }
    for (std::size_t j = 0; j < vars.size(); ++j)
      if (std::isnan(raw.values[j])) throw SolutionParseError("solution lacks a value for " + vars[j].name);
    if (raw.status == SolveStatus::Optimal) {
      const double tol = std::max(options.abs_gap, options.rel_gap * std::max(1.0, std::abs(raw.objective))) +
                         1e-9 * (1.0 + std::abs(raw.objective));
      if (std::abs(raw.objective - raw.bound) > tol) raw.status = SolveStatus::Feasible;
    }
  }

  raw.work_dir = dir;
  if (temporary && !options.keep_files) {
    std::error_code ec;
    fs::remove_all(dir, ec);
    raw.work_dir.clear();
  }
  return raw;
}

}  // namespace uppclear
