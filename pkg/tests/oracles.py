"""Independent reference computations used to cross-check the package.

Each routine here takes a different path from the production code: brute
force instead of simplex, floats instead of exact fields, definitions
instead of closed forms.
"""

from fractions import Fraction
from itertools import combinations, product
import math


def brute_force_lp_min(c, A_ub, b_ub):
    """min c.x s.t. A_ub x <= b_ub, x >= 0 by enumerating vertices.

    Returns ``("optimal", value)``, ``("infeasible", None)`` or
    ``("unbounded", None)``.  Unboundedness is detected by probing
    a bounding box: the LP is unbounded iff adding ``sum x <= M`` changes
    the optimum as M grows.
    """
    n = len(c)

    def solve(M):
        rows = [list(r) for r in A_ub] + [[-1 if i == j else 0 for j in range(n)] for i in range(n)]
        rhs = list(b_ub) + [0] * n
        if M is not None:
            rows.append([1] * n)
            rhs.append(M)
        best = None
        for idx in combinations(range(len(rows)), n):
            sub = [[Fraction(v) for v in rows[i]] for i in idx]
            x = _gauss(sub, [Fraction(rhs[i]) for i in idx])
            if x is None:
                continue
            if all(sum(Fraction(a) * xi for a, xi in zip(r, x)) <= b for r, b in zip(rows, rhs)):
                val = sum(Fraction(ci) * xi for ci, xi in zip(c, x))
                if best is None or val < best:
                    best = val
        return best

    v1 = solve(10 ** 4)
    if v1 is None:
        return "infeasible", None
    v2 = solve(10 ** 6)
    if v2 < v1:
        return "unbounded", None
    return "optimal", v1


def _gauss(rows, rhs):
    n = len(rows)
    M = [r[:] + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = next((i for i in range(col, n) if M[i][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [v / p for v in M[col]]
        for i in range(n):
            if i != col and M[i][col] != 0:
                f = M[i][col]
                M[i] = [a - f * b for a, b in zip(M[i], M[col])]
    return [M[i][n] for i in range(n)]


def float_ranges(lam, w):
    """Permissible ranges by solving the defining equations numerically.

    |AC| is the root of |AC| + w W = (1 - lam)(1 + w min(|AC|, 1 - |AC|))
    with W = m (all deliberations won) for the minimum and W = 0 for the maximum.
    """

    def root(g):
        lo, hi = 0.0, 1.0
        for _ in range(200):
            mid = (lo + hi) / 2
            if g(mid) > 0:
                hi = mid
            else:
                lo = mid
        return (lo + hi) / 2

    ac_min = root(lambda a: a + w * min(a, 1 - a) - (1 - lam) * (1 + w * min(a, 1 - a)))
    ac_max = root(lambda a: a - (1 - lam) * (1 + w * min(a, 1 - a)))
    # |CB| needs f(CB) = lam: fewest supporters when CB wins every deliberation
    cb_min = root(lambda b: b + w * min(b, 1 - b) - lam * (1 + w * min(b, 1 - b)))
    cb_max = root(lambda b: b - lam * (1 + w * min(b, 1 - b)))
    return ac_min, ac_max, cb_min, cb_max


def float_D(lam, w):
    """Lower bound from the three example ratios computed on float ranges."""
    ac_min, ac_max, cb_min, cb_max = float_ranges(lam, w)
    eta = 1 - cb_min - ac_min
    d1 = (ac_max + 2 * cb_min) / cb_min
    d2 = cb_max / ac_min
    d3 = (eta + 3 * cb_min + 2 * ac_min) / (eta + cb_min)
    return d1, d2, d3


def float_tournament(positions, voters, w, tie_pref=None, tie_delib=None):
    """f(XY) on a line instance with unit-mass voters using floats and an
    explicit integral matching in voter order.  ``voters`` are coordinates."""
    cands = list(positions)
    n = len(voters)
    f = {}
    for i, x in enumerate(cands):
        for y in cands[i + 1:]:
            d = lambda v, c: abs(voters[v] - positions[c])
            xy = [v for v in range(n) if d(v, x) < d(v, y) or (d(v, x) == d(v, y) and (tie_pref or {}).get((v, x, y), x) == x)]
            yx = [v for v in range(n) if v not in xy]
            wx = wy = 0
            for u, v in zip(xy, yx):
                sx, sy = d(u, x) + d(v, x), d(u, y) + d(v, y)
                if sx < sy or (sx == sy and (tie_delib or {}).get((x, y), x) == x):
                    wx += 1
                else:
                    wy += 1
            sxy = len(xy) / n + w * wx / n
            syx = len(yx) / n + w * wy / n
            f[(x, y)] = sxy / (sxy + syx)
            f[(y, x)] = syx / (sxy + syx)
    return f


def float_sqrt3_pair(a, b):
    return a + b * math.sqrt(3)
