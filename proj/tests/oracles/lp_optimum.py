"""Independent oracle for the sparsest AND-OR split of small tables.

Solves min_gamma sum|I_and| + sum|I_or| as a linear program with scipy,
building the interaction maps from the literal alternating sums. The printed
optima are frozen into the C++ tests; rerun to regenerate them.
"""
import itertools

import numpy as np
from scipy.optimize import linprog


def alternating_matrix(n):
    size = 1 << n
    mat = np.zeros((size, size))
    for t in range(size):
        for l in range(size):
            if l & t == l:
                mat[t, l] = (-1) ** (bin(t).count("1") - bin(l).count("1"))
    return mat


def optimum(table):
    table = np.asarray(table, dtype=float)
    size = len(table)
    n = size.bit_length() - 1
    full = size - 1
    mob = alternating_matrix(n)
    comp = np.zeros((size, size))
    for s in range(size):
        comp[s, full ^ s] = 1.0
    # I_and = M (v/2 + g); I_or = -M P (v/2 - g) = -M P v/2 + M P g
    k_and, c_and = mob, mob @ (table / 2)
    k_or, c_or = mob @ comp, -(mob @ comp) @ (table / 2)
    k = np.vstack([k_and[1:], k_or[1:]])
    c = np.concatenate([c_and[1:], c_or[1:]])
    m = k.shape[0]
    # variables: gamma (size), t (m); minimise sum t, -t <= K g + c <= t
    cost = np.concatenate([np.zeros(size), np.ones(m)])
    a_ub = np.block([[k, -np.eye(m)], [-k, -np.eye(m)]])
    b_ub = np.concatenate([-c, c])
    bounds = [(None, None)] * size + [(0, None)] * m
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    assert res.success
    return res.fun


FIXTURES = {
    "pure_and_n2": [0, 0, 0, 1],
    "pure_or_n2": [0, 1, 1, 1],
    "and_plus_or_n2": [0, 1, 1, 3],
    "pure_and_n3": [0, 0, 0, 0, 0, 0, 0, 1],
    "pure_or_n3": [0, 1, 1, 1, 1, 1, 1, 1],
    "mixed_n3": None,
    "random_n3": None,
}


def mixed_n3():
    # 0.2 + AND{1,2} * 1.0 + OR{2,3} * (-0.7)
    out = []
    for s in range(8):
        v = 0.2
        if s & 0b011 == 0b011:
            v += 1.0
        if s & 0b110:
            v -= 0.7
        out.append(v)
    return out


if __name__ == "__main__":
    FIXTURES["mixed_n3"] = mixed_n3()
    FIXTURES["random_n3"] = [0.3, -1.2, 0.8, 2.5, -0.4, 1.1, -2.0, 0.9]
    for name, table in FIXTURES.items():
        print(f"{name}: table={[round(v, 12) for v in table]} optimum={optimum(table):.12f}")
