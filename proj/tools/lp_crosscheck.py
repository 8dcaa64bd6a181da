#!/usr/bin/env python3
"""Solve exported LP files with scipy/HiGHS and compare against abmap's optimum.

Each NAME.lp in the directory needs a NAME.expected holding the internal
objective (or "infeasible"). Exits 1 on any mismatch beyond --tol.
"""

import argparse
import math
import pathlib
import re
import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

HEADERS = {
    "maximize": "obj", "minimize": "obj", "subject to": "rows", "bounds": "bounds",
    "general": "int", "binary": "bin", "end": "end",
}
LABEL = re.compile(r"(?:^|\s)([A-Za-z_][\w.\[\]]*):")


def number(tok):
    low = tok.lower()
    if low in ("inf", "+inf", "infinity"):
        return math.inf
    if low in ("-inf", "-infinity"):
        return -math.inf
    return float(tok)


def linear(tokens):
    """`[+|-] [coef] name ...` to a dict name -> coef."""
    terms, sign, coef, i = {}, 1.0, None, 0
    while i < len(tokens):
        tok = tokens[i]
        if tok in "+-":
            sign = -1.0 if tok == "-" else 1.0
        else:
            try:
                coef = float(tok)
            except ValueError:
                terms[tok] = terms.get(tok, 0.0) + sign * (1.0 if coef is None else coef)
                sign, coef = 1.0, None
        i += 1
    return terms


def parse(text):
    sections = {k: [] for k in HEADERS.values()}
    sense, current = None, None
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0]
        key = line.strip().lower()
        if key in HEADERS:
            current = HEADERS[key]
            sense = sense or (key if current == "obj" else None)
            continue
        if line.strip() and current:
            sections[current].append(line.strip())

    objective = linear(LABEL.sub(" ", " ".join(sections["obj"])).split())

    rows = []
    body = " ".join(sections["rows"])
    pieces = LABEL.split(body)
    for k in range(1, len(pieces), 2):
        toks = pieces[k + 1].split()
        op = next(j for j, t in enumerate(toks) if t in ("<=", ">=", "="))
        rows.append((linear(toks[:op]), toks[op], number(toks[op + 1])))

    bounds = {}
    for line in sections["bounds"]:
        toks = line.split()
        if len(toks) == 2 and toks[1].lower() == "free":
            bounds[toks[0]] = (-math.inf, math.inf)
        elif len(toks) == 5:
            bounds[toks[2]] = (number(toks[0]), number(toks[4]))
        elif toks[1] == "=":
            bounds[toks[0]] = (number(toks[2]),) * 2
        elif toks[1] == ">=":
            bounds[toks[0]] = (number(toks[2]), math.inf)
        else:
            bounds[toks[0]] = (0.0, number(toks[2]))
    integers = " ".join(sections["int"]).split()
    binaries = " ".join(sections["bin"]).split()
    for name in binaries:
        bounds.setdefault(name, (0.0, 1.0))
    return sense, objective, rows, bounds, integers + binaries


def solve(text):
    sense, objective, rows, bounds, integral = parse(text)
    names = list(dict.fromkeys(list(objective) + [n for r in rows for n in r[0]] + list(bounds) + integral))
    index = {n: j for j, n in enumerate(names)}
    c = np.zeros(len(names))
    for n, v in objective.items():
        c[index[n]] = v
    if sense == "maximize":
        c = -c
    lo = np.array([bounds.get(n, (0.0, math.inf))[0] for n in names])
    hi = np.array([bounds.get(n, (0.0, math.inf))[1] for n in names])
    a = np.zeros((len(rows), len(names)))
    rlo = np.full(len(rows), -math.inf)
    rhi = np.full(len(rows), math.inf)
    for i, (terms, op, rhs) in enumerate(rows):
        for n, v in terms.items():
            a[i, index[n]] += v
        if op in (">=", "="):
            rlo[i] = rhs
        if op in ("<=", "="):
            rhi[i] = rhs
    integrality = np.array([1 if n in set(integral) else 0 for n in names])
    constraints = [LinearConstraint(a, rlo, rhi)] if rows else []
    res = milp(c, constraints=constraints, integrality=integrality, bounds=Bounds(lo, hi),
               options={"mip_rel_gap": 0.0})
    if res.status == 2:
        return None
    if res.status != 0:
        raise RuntimeError(res.message)
    return -res.fun if sense == "maximize" else res.fun


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("directory", type=pathlib.Path)
    ap.add_argument("--tol", type=float, default=1e-6)
    args = ap.parse_args()
    files = sorted(args.directory.glob("*.lp"))
    if not files:
        print("no LP files found", file=sys.stderr)
        return 1
    failures = 0
    for lp in files:
        expected = lp.with_suffix(".expected").read_text().strip()
        got = solve(lp.read_text())
        if expected == "infeasible":
            ok = got is None
        else:
            ok = got is not None and abs(got - float(expected)) <= args.tol
        failures += not ok
        print(f"{'ok  ' if ok else 'FAIL'} {lp.name}: internal {expected}, scipy {got}")
    print(f"{len(files) - failures}/{len(files)} agree")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
