#!/usr/bin/env python3
"""Solve an MPS model and write a HiGHS-style raw solution file.

Engines:
  highspy  HiGHS through the highspy package
  scipy    scipy.optimize.milp (own MPS reader)

Prints one JSON line with status, objective, bound and wall time.
"""

import argparse
import json
import math
import sys
import time


def write_solution(path, model_status, names, values, objective):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("Model status\n%s\n\n" % model_status)
        fh.write("# Primal solution values\n")
        if values is None:
            fh.write("None\n")
            return
        fh.write("Feasible\n")
        fh.write("Objective %r\n" % float(objective))
        fh.write("# Columns %d\n" % len(names))
        for n, v in zip(names, values):
            fh.write("%s %r\n" % (n, float(v)))
        fh.write("# Rows 0\n")


def solve_highspy(args, opts):
    import highspy

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", float(opts.get("rel_gap", 1e-9)))
    h.setOptionValue("mip_abs_gap", float(opts.get("abs_gap", 1e-7)))
    h.setOptionValue("time_limit", float(opts.get("time_limit", 300.0)))
    h.setOptionValue("threads", int(opts.get("threads", 1)))
    for key in ("primal_feasibility_tolerance", "dual_feasibility_tolerance", "mip_feasibility_tolerance"):
        h.setOptionValue(key, float(opts.get("feasibility_tol", 1e-9)))
    if h.readModel(args.model) == highspy.HighsStatus.kError:
        raise RuntimeError("HiGHS could not read %s" % args.model)
    h.run()
    ms = h.getModelStatus()
    text = h.modelStatusToString(ms)
    info = h.getInfo()
    lp = h.getLp()
    names = list(lp.col_names_)
    has_primal = info.primal_solution_status == 2
    values = list(h.getSolution().col_value) if has_primal else None
    obj = info.objective_function_value if has_primal else float("nan")
    MS = highspy.HighsModelStatus
    if ms == MS.kOptimal:
        status = "optimal"
    elif ms == MS.kInfeasible:
        status = "infeasible"
    elif ms in (MS.kTimeLimit, MS.kIterationLimit, MS.kSolutionLimit, MS.kInterrupt):
        status = "feasible" if has_primal else "timeout"
    elif ms == MS.kModelEmpty:
        status, values, obj = "optimal", [], 0.0
    else:
        status = "error"
    if ms == MS.kOptimal and values is None:
        values = [0.0] * len(names)
        obj = 0.0
    bound = info.mip_dual_bound if lp.integrality_ and len(lp.integrality_) else obj
    if bound is None or (isinstance(bound, float) and math.isinf(bound)):
        bound = obj
    write_solution(args.solution, text, names, values, obj)
    return status, text, obj, bound


def read_mps(path):
    """Minimal free-format MPS reader for the subset this project writes."""
    sense_max = False
    rows, row_sense, row_index = [], {}, {}
    obj_name = None
    cols, col_index, integer = [], {}, []
    entries = []  # (row, col, value)
    rhs = {}
    lb, ub = {}, {}
    section = None
    in_int = False
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("*"):
                continue
            if not line[0].isspace():
                parts = line.split()
                section = parts[0]
                if section == "OBJSENSE" and len(parts) > 1:
                    sense_max = parts[1].upper().startswith("MAX")
                if section == "ENDATA":
                    break
                continue
            f = line.split()
            if section == "OBJSENSE":
                sense_max = f[0].upper().startswith("MAX")
            elif section == "ROWS":
                if f[0] == "N":
                    if obj_name is None:
                        obj_name = f[1]
                    continue
                row_index[f[1]] = len(rows)
                rows.append(f[1])
                row_sense[f[1]] = f[0]
            elif section == "COLUMNS":
                if len(f) >= 3 and f[1] == "'MARKER'":
                    in_int = f[2] == "'INTORG'"
                    continue
                c = f[0]
                if c not in col_index:
                    col_index[c] = len(cols)
                    cols.append(c)
                    integer.append(in_int)
                for r, v in zip(f[1::2], f[2::2]):
                    entries.append((r, col_index[c], float(v)))
            elif section == "RHS":
                for r, v in zip(f[1::2], f[2::2]):
                    rhs[r] = float(v)
            elif section == "BOUNDS":
                kind, c = f[0], f[2]
                v = float(f[3]) if len(f) > 3 else 0.0
                j = col_index[c]
                if kind == "UP":
                    ub[j] = v
                elif kind == "LO":
                    lb[j] = v
                elif kind == "FX":
                    lb[j] = ub[j] = v
                elif kind == "FR":
                    lb[j], ub[j] = -math.inf, math.inf
                elif kind == "MI":
                    lb[j] = -math.inf
                elif kind == "PL":
                    ub[j] = math.inf
                elif kind == "BV":
                    lb[j], ub[j] = 0.0, 1.0
                    integer[j] = True
            elif section == "RANGES":
                raise RuntimeError("RANGES section not supported")
    return dict(sense_max=sense_max, rows=rows, row_sense=row_sense, row_index=row_index, obj=obj_name,
                cols=cols, integer=integer, entries=entries, rhs=rhs, lb=lb, ub=ub)


def solve_scipy(args, opts):
    import numpy as np
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import coo_matrix

    m = read_mps(args.model)
    n = len(m["cols"])
    c = np.zeros(n)
    ri, ci, vv = [], [], []
    for r, j, v in m["entries"]:
        if r == m["obj"]:
            c[j] += v
        else:
            ri.append(m["row_index"][r])
            ci.append(j)
            vv.append(v)
    nr = len(m["rows"])
    lo = np.full(nr, -np.inf)
    hi = np.full(nr, np.inf)
    for r, s in m["row_sense"].items():
        i = m["row_index"][r]
        b = m["rhs"].get(r, 0.0)
        if s == "L":
            hi[i] = b
        elif s == "G":
            lo[i] = b
        else:
            lo[i] = hi[i] = b
    lb = np.array([m["lb"].get(j, 0.0) for j in range(n)])
    ub = np.array([m["ub"].get(j, math.inf) for j in range(n)])
    integrality = np.array([1 if x else 0 for x in m["integer"]])
    sign = -1.0 if m["sense_max"] else 1.0
    constraints = []
    if nr:
        constraints.append(LinearConstraint(coo_matrix((vv, (ri, ci)), shape=(nr, n)).tocsr(), lo, hi))
    res = milp(sign * c, constraints=constraints, integrality=integrality, bounds=Bounds(lb, ub),
               options={"mip_rel_gap": float(opts.get("rel_gap", 1e-9)),
                        "time_limit": float(opts.get("time_limit", 300.0)), "disp": False})
    if res.status == 0:
        status, text = "optimal", "Optimal"
    elif res.status == 2:
        status, text = "infeasible", "Infeasible"
    elif res.status == 1:
        status, text = ("feasible", "Time limit reached") if res.x is not None else ("timeout", "Time limit reached")
    else:
        status, text = "error", res.message
    values = None if res.x is None else list(res.x)
    obj = float(c @ res.x) if res.x is not None else float("nan")
    bound = obj
    if getattr(res, "mip_dual_bound", None) is not None and res.x is not None:
        bound = sign * float(res.mip_dual_bound)
    write_solution(args.solution, text, m["cols"], values, obj)
    return status, text, obj, bound


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--engine", choices=("highspy", "scipy"), default="highspy")
    ap.add_argument("--model", required=True)
    ap.add_argument("--solution", required=True)
    ap.add_argument("--options")
    args = ap.parse_args()
    opts = {}
    if args.options:
        with open(args.options, encoding="utf-8") as fh:
            opts = json.load(fh)
    t0 = time.perf_counter()
    if args.engine == "highspy":
        status, text, obj, bound = solve_highspy(args, opts)
    else:
        status, text, obj, bound = solve_scipy(args, opts)
    out = {"status": status, "model_status": text, "engine": args.engine,
           "objective": None if obj is None or math.isnan(obj) else obj,
           "bound": None if bound is None or math.isnan(bound) else bound,
           "time": time.perf_counter() - t0}
    print(json.dumps(out))
    return 0


if __name__ == "__main__":
    sys.exit(main())
