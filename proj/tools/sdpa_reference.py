#!/usr/bin/env python3
"""Solve an SDPA sparse (.dat-s) problem with cvxpy and print the optimum.

Used once to record the reference optimum stored next to the golden export:

    python3 tools/sdpa_reference.py tests/data/golden_3x3.dat-s
"""
import re
import sys

import cvxpy as cp
import numpy as np


def read_sdpa(path):
    with open(path) as f:
        lines = [ln for ln in f if ln.strip()]
    while lines and lines[0].lstrip()[0] in "\"*":
        lines.pop(0)
    tokens = lambda s: [t for t in re.split(r"[\s,{}()]+", s) if t]
    m = int(tokens(lines[0])[0])
    nblocks = int(tokens(lines[1])[0])
    sizes = [abs(int(float(t))) for t in tokens(lines[2])[:nblocks]]
    c = np.array([float(t) for t in tokens(lines[3])[:m]])
    F = [[np.zeros((s, s)) for s in sizes] for _ in range(m + 1)]
    for ln in lines[4:]:
        k, b, i, j, v = tokens(ln)[:5]
        k, b, i, j, v = int(k), int(b) - 1, int(i) - 1, int(j) - 1, float(v)
        F[k][b][i, j] = v
        F[k][b][j, i] = v
    return c, F, sizes


def main():
    c, F, sizes = read_sdpa(sys.argv[1])
    y = cp.Variable(len(c))
    cons = []
    for b in range(len(sizes)):
        lhs = sum(y[k - 1] * F[k][b] for k in range(1, len(c) + 1)) - F[0][b]
        cons.append(0.5 * (lhs + lhs.T) >> 0)
    prob = cp.Problem(cp.Minimize(c @ y), cons)
    prob.solve(solver=cp.CLARABEL)
    print(f"{prob.value:.12f}")
    print("y =", " ".join(f"{v:.10f}" for v in y.value), file=sys.stderr)


if __name__ == "__main__":
    main()
