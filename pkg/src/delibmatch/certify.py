"""Exact verification of the distortion-3 upper bound.

The reduction leaves two interval layouts ("cases").  In each, the interval
masses p form a small polytope; at every vertex the remaining program in
(X_i, Y_i, Z_i, M_X, M_Y, M_X+Y) is a homogeneous LP whose optimum at R = 2
is exactly 0.  This module rebuilds those LPs with stable constraint names,
solves them, and checks the stored dual multipliers by row arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .exactnum import Scalar, canonical_params
from .instances import UNBOUNDED
from .lpsolve import LinearProgram, Status, lp_solve, solve_linear_system

F = Fraction
ZERO = F(0)
HALF = F(1, 2)


class CertificateMismatch(AssertionError):
    pass


class VertexMismatch(AssertionError):
    pass


@dataclass(frozen=True)
class CaseSpec:
    case: int
    n: int
    couplings: tuple[tuple[int, ...], ...]
    x_matchings: tuple[tuple[int, int], ...]
    y_matchings: tuple[tuple[int, int], ...]
    x_sign: int
    y_sign: int
    half_prefix: int = 5

    def expand(self, vertex: Sequence[Scalar]) -> list[Scalar]:
        """Full p vector (1-based positions) from the reduced ``(p1, p2, p3, p6)``."""
        p1, p2, p3, p6 = (F(v) for v in vertex)
        p = [ZERO] * self.n
        given = {1: p1, 2: p2, 3: p3, 6: p6}
        for i, v in given.items():
            p[i - 1] = v
        for group in self.couplings:
            lead = group[0]
            for j in group[1:]:
                p[j - 1] = p[lead - 1]
        return p


CASE1 = CaseSpec(
    case=1, n=9,
    couplings=((1, 5), (2, 4, 7, 9), (3, 8)),
    x_matchings=((1, 5), (2, 4)),
    y_matchings=((2, 9), (3, 8), (4, 7)),
    x_sign=3, y_sign=5,
)

CASE2 = CaseSpec(
    case=2, n=7,
    couplings=((1, 5), (2, 4), (3, 7)),
    x_matchings=((1, 5),),
    y_matchings=((3, 7),),
    x_sign=4, y_sign=4,
)

CASES = {1: CASE1, 2: CASE2}

EXPECTED_VERTICES = {
    1: [(F(0), F(0), F(1, 2), F(0)), (F(0), F(1, 4), F(0), F(0)), (F(1, 4), F(0), F(0), F(1, 2))],
    2: [(F(0), F(0), F(1, 2), F(0)), (F(0), F(1, 4), F(0), F(1, 2)), (F(1, 4), F(0), F(0), F(1, 2))],
}


def get_case(case: int | CaseSpec) -> CaseSpec:
    return case if isinstance(case, CaseSpec) else CASES[case]


def mass_equalities(case: CaseSpec) -> tuple[list[list[Scalar]], list[Scalar]]:
    """Rows of the raw mass system: total 1, prefix 1/2, and the couplings."""
    n = case.n
    rows = [[F(1)] * n, [F(1) if i < case.half_prefix else ZERO for i in range(n)]]
    rhs = [F(1), HALF]
    for group in case.couplings:
        for a, b in zip(group, group[1:]):
            r = [ZERO] * n
            r[a - 1], r[b - 1] = F(1), F(-1)
            rows.append(r)
            rhs.append(ZERO)
    return rows, rhs


def polytope_vertices(case: int | CaseSpec, check: bool = True) -> list[tuple[Scalar, ...]]:
    """Vertices ``(p1, p2, p3, p6)`` from the basic feasible solutions of the mass system."""
    spec = get_case(case)
    rows, rhs = mass_equalities(spec)
    k = len(rows)
    found = []
    for basis in combinations(range(spec.n), k):
        sub = [[r[j] for j in basis] for r in rows]
        sol = solve_linear_system(sub, rhs)
        if sol is None or any(v < 0 for v in sol):
            continue
        p = [ZERO] * spec.n
        for j, v in zip(basis, sol):
            p[j] = v
        key = (p[0], p[1], p[2], p[5])
        if key not in found:
            found.append(key)
    found.sort()
    if check:
        expected = sorted(EXPECTED_VERTICES[spec.case])
        if found != expected:
            raise VertexMismatch(f"case {spec.case}: enumerated {found}, expected {expected}")
    return found


def _check_params(lam, w) -> None:
    ls, ws = canonical_params()
    if lam is not None and lam != ls:
        raise ValueError("case programs are only defined at the optimal lambda")
    if w is not None and w != ws:
        raise ValueError("case programs are only defined at the optimal w")


def build_case_lp(case: int | CaseSpec, vertex: Sequence[Scalar], R: Scalar,
                  lam: Scalar | None = None, w: Scalar | None = None) -> LinearProgram:
    """The homogeneous LP at one p-vertex with Z_min linearized through the norms."""
    spec = get_case(case)
    if R <= 0:
        raise ValueError("R must be positive")
    _check_params(lam, w)
    n = spec.n
    p = spec.expand(vertex)
    lp = LinearProgram(f"case{spec.case} p={tuple(str(v) for v in vertex)} R={R}")
    I = range(1, n + 1)
    for i in I:
        lp.add_variable(f"X{i}", lb=None)
        lp.add_variable(f"Y{i}", lb=None)
        lp.add_variable(f"Z{i}", lb=None)
    for m in ("Mx", "My", "Mxy"):
        lp.add_variable(m, lb=None)

    ge = ">="
    for i in I:
        X, Y, Z = f"X{i}", f"Y{i}", f"Z{i}"
        lp.add_constraint(f"Mx_ge_X{i}", {"Mx": 1, X: -1}, ge)
        lp.add_constraint(f"Mx_ge_neg_X{i}", {"Mx": 1, X: 1}, ge)
        lp.add_constraint(f"My_ge_Y{i}", {"My": 1, Y: -1}, ge)
        lp.add_constraint(f"My_ge_neg_Y{i}", {"My": 1, Y: 1}, ge)
        lp.add_constraint(f"Mxy_ge_XY{i}", {"Mxy": 1, X: -1, Y: -1}, ge)
        lp.add_constraint(f"Mxy_ge_neg_XY{i}", {"Mxy": 1, X: 1, Y: 1}, ge)
        lp.add_constraint(f"Z{i}_ge_half_Mx_plus", {Z: 1, "Mx": -HALF, X: -HALF}, ge)
        lp.add_constraint(f"Z{i}_ge_half_My_minus", {Z: 1, "My": -HALF, Y: HALF}, ge)
        lp.add_constraint(f"Z{i}_ge_half_Mxy_plus", {Z: 1, "Mxy": -HALF, X: -HALF, Y: HALF}, ge)
        lp.add_constraint(f"Z{i}_ge_0", {Z: 1}, ge)
    for i in range(1, n):
        lp.add_constraint(f"X{i}_ge_X{i + 1}", {f"X{i}": 1, f"X{i + 1}": -1}, ge)
        lp.add_constraint(f"Y{i + 1}_ge_Y{i}", {f"Y{i + 1}": 1, f"Y{i}": -1}, ge)
    lp.add_constraint(f"X{spec.x_sign}_ge_0", {f"X{spec.x_sign}": 1}, ge)
    lp.add_constraint(f"Y{spec.y_sign}_ge_0", {f"Y{spec.y_sign}": 1}, ge)
    for a, b in spec.x_matchings:
        lp.add_constraint(f"X{a}_plus_X{b}_ge_0", {f"X{a}": 1, f"X{b}": 1}, ge)
    for a, b in spec.y_matchings:
        lp.add_constraint(f"Y{a}_plus_Y{b}_ge_0", {f"Y{a}": 1, f"Y{b}": 1}, ge)

    obj = {}
    for i in I:
        pi = p[i - 1]
        if pi:
            obj[f"X{i}"] = pi
            obj[f"Y{i}"] = (R + 1) * pi
            obj[f"Z{i}"] = R * pi
    lp.set_objective(obj)
    return lp


@dataclass
class DualCertificate:
    multipliers: list[tuple[Scalar, str]]
    target: dict[str, Scalar] = field(default_factory=dict)


def _cert(*pairs) -> list[tuple[Scalar, str]]:
    return [(F(m), name) for m, name in pairs]


# Nonnegative multipliers on the named rows, valid at R = 2.
STORED_CERTIFICATES = {
    (1, 0): _cert(
        ("0.5", "Mxy_ge_neg_XY8"), (1, "Z3_ge_half_Mxy_plus"), (1, "Z8_ge_0"),
        (1, "Y3_plus_Y8_ge_0"), (1, "X3_ge_0"),
    ),
    (1, 1): _cert(
        ("0.25", "My_ge_neg_Y4"), ("0.25", "Mxy_ge_neg_XY7"), ("0.25", "Mxy_ge_neg_XY9"),
        ("0.5", "Z2_ge_half_Mxy_plus"), ("0.5", "Z4_ge_half_Mxy_plus"),
        ("0.5", "Z7_ge_half_My_minus"), ("0.5", "Z9_ge_0"),
        ("0.5", "X2_plus_X4_ge_0"), ("0.5", "Y2_plus_Y9_ge_0"), ("0.25", "Y4_plus_Y7_ge_0"),
    ),
    (1, 2): _cert(
        ("0.5", "My_ge_neg_Y1"), ("0.5", "Mxy_ge_neg_XY6"),
        ("0.5", "Z1_ge_half_Mxy_plus"), ("0.5", "Z5_ge_half_Mxy_plus"),
        (1, "Z6_ge_half_My_minus"), ("0.5", "Y6_ge_Y5"), ("0.5", "X1_plus_X5_ge_0"), (1, "Y5_ge_0"),
    ),
    (2, 0): _cert(
        ("0.5", "Mx_ge_neg_X7"), (1, "Z3_ge_half_Mx_plus"), (1, "X3_ge_X4"),
        ("1.5", "Y3_plus_Y7_ge_0"), (1, "X4_ge_0"), (1, "Z7_ge_0"),
    ),
    (2, 1): _cert(
        ("0.5", "My_ge_neg_Y2"), ("0.5", "Mxy_ge_neg_XY6"),
        ("0.5", "Z2_ge_half_Mxy_plus"), ("0.5", "Z4_ge_half_Mxy_plus"),
        (1, "Z6_ge_half_My_minus"), ("0.5", "X2_ge_X3"), ("0.5", "X3_ge_X4"),
        ("0.5", "Y5_ge_Y4"), ("0.5", "Y6_ge_Y5"), (1, "X4_ge_0"), (1, "Y4_ge_0"),
    ),
    # Y5 >= 0 is not a row of the case-2 program; it is the sum of Y4 >= 0 and Y5 >= Y4.
    (2, 2): _cert(
        ("0.5", "My_ge_neg_Y1"), ("0.5", "Mxy_ge_neg_XY6"),
        ("0.5", "Z1_ge_half_Mxy_plus"), ("0.5", "Z5_ge_half_Mxy_plus"),
        (1, "Z6_ge_half_My_minus"), ("0.5", "Y6_ge_Y5"), ("0.5", "X1_plus_X5_ge_0"),
        (1, "Y4_ge_0"), (1, "Y5_ge_Y4"),
    ),
}


def stored_certificate(case: int | CaseSpec, vertex: Sequence[Scalar]) -> DualCertificate | None:
    spec = get_case(case)
    key = tuple(F(v) for v in vertex)
    try:
        idx = EXPECTED_VERTICES[spec.case].index(key)
    except ValueError:
        return None
    return DualCertificate(list(STORED_CERTIFICATES[(spec.case, idx)]))


def combine_rows(lp: LinearProgram, cert: DualCertificate) -> tuple[dict[str, Scalar], Scalar]:
    """Coefficient-wise sum of multiplier times row, and the matching rhs sum."""
    rows = lp.constraints
    total: dict[str, Scalar] = {}
    rhs = ZERO
    for mult, name in cert.multipliers:
        if name not in rows:
            raise CertificateMismatch(f"unknown constraint {name!r}")
        row = rows[name]
        if mult < 0:
            raise CertificateMismatch(f"negative multiplier on {name}")
        if row.rel != ">=":
            raise CertificateMismatch(f"{name} is not a >= row")
        for var, c in row.coeffs.items():
            total[var] = total.get(var, ZERO) + mult * c
        rhs += mult * row.rhs
    return {k: v for k, v in total.items() if v}, rhs


def check_certificate(lp: LinearProgram, cert: DualCertificate) -> Scalar:
    """Verify the multipliers reproduce the objective row exactly; return the bound.

    Pure row arithmetic: the LP is never solved here.
    """
    total, rhs = combine_rows(lp, cert)
    target = {k: v for k, v in lp.objective.items() if v}
    cert.target = target
    if total != target:
        keys = sorted(set(total) | set(target))
        diff = {k: total.get(k, ZERO) - target.get(k, ZERO) for k in keys}
        diff = {k: v for k, v in diff.items() if v}
        raise CertificateMismatch(f"weighted row sum differs from objective: {diff}")
    return rhs


@dataclass
class VertexResult:
    case: int
    vertex: tuple[Scalar, ...]
    R: Scalar
    lp_optimum: Scalar | object
    dual_ok: bool
    bound: Scalar | None
    certificate: DualCertificate | None
    pivots: int = 0


def lp_optimum(lp: LinearProgram):
    sol = lp_solve(lp)
    if sol.status is Status.UNBOUNDED:
        return NEG_UNBOUNDED, sol
    if sol.status is Status.INFEASIBLE:
        raise RuntimeError(f"{lp.name} is infeasible")
    return sol.objective, sol


class _NegUnbounded:
    """Marker for an LP that is unbounded below (optimum -infinity)."""

    def __repr__(self) -> str:
        return "-UNBOUNDED"

    def __float__(self) -> float:
        return float("-inf")

    def __lt__(self, other) -> bool:
        return not isinstance(other, _NegUnbounded)

    def __gt__(self, other) -> bool:
        return False

    def __le__(self, other) -> bool:
        return True

    def __ge__(self, other) -> bool:
        return isinstance(other, _NegUnbounded)


NEG_UNBOUNDED = _NegUnbounded()


def certify_vertex(case: int | CaseSpec, vertex: Sequence[Scalar], R: Scalar = F(2),
                   solve: bool = True) -> VertexResult:
    """Solve the vertex LP and, at R = 2, audit the stored multipliers."""
    spec = get_case(case)
    R = F(R) if not isinstance(R, F) else R
    lp = build_case_lp(spec, vertex, R)
    opt, pivots = None, 0
    if solve:
        opt, sol = lp_optimum(lp)
        pivots = sol.pivots
    cert = stored_certificate(spec, vertex) if R == 2 else None
    dual_ok, bound = False, None
    if cert is not None:
        bound = check_certificate(lp, cert)
        dual_ok = True
        if solve and opt is not NEG_UNBOUNDED and opt != bound:
            raise CertificateMismatch(f"LP optimum {opt} differs from certified bound {bound}")
    return VertexResult(spec.case, tuple(vertex), R, opt, dual_ok, bound, cert, pivots)


def certify_all(R: Scalar = F(2), cases: Sequence[int] = (1, 2)) -> list[VertexResult]:
    out = []
    for c in cases:
        for v in polytope_vertices(c):
            out.append(certify_vertex(c, v, R))
    return out


def case_optimum(case: int | CaseSpec, R: Scalar):
    """Minimum over the case's vertices of the vertex-LP optimum."""
    best = None
    for v in polytope_vertices(case):
        opt, _ = lp_optimum(build_case_lp(case, v, R))
        if best is None or opt < best:
            best = opt
    return best


def minimal_R(case: int | CaseSpec, lo: Scalar = F(1), hi: Scalar = F(4),
              width: Scalar = F(1, 1024)) -> tuple[Scalar, Scalar]:
    """Interval ``(a, b]`` with OPT(a) < 0 <= OPT(b), narrowed by bisection."""
    lo, hi = F(lo), F(hi)
    if not case_optimum(case, hi) >= 0:
        raise ValueError(f"OPT({hi}) is negative; widen the search interval")
    if case_optimum(case, lo) >= 0:
        return lo, lo
    while hi - lo > width:
        mid = (lo + hi) / 2
        if case_optimum(case, mid) >= 0:
            hi = mid
        else:
            lo = mid
    return lo, hi


def audit_table(res: VertexResult, lp: LinearProgram | None = None) -> list[str]:
    """Human-readable multiplier lines: multiplier, row name, row expression."""
    if res.certificate is None:
        return []
    lp = lp or build_case_lp(res.case, res.vertex, res.R)
    rows = lp.constraints
    lines = []
    for mult, name in res.certificate.multipliers:
        row = rows[name]
        expr = " ".join(f"{'+' if c > 0 else '-'} {abs(c)}*{v}" for v, c in row.coeffs.items())
        lines.append(f"{str(mult):>5}  {name:<24} {expr} >= {row.rhs}")
    return lines


__all__ = [
    "CASE1", "CASE2", "CaseSpec", "CertificateMismatch", "DualCertificate", "NEG_UNBOUNDED",
    "STORED_CERTIFICATES", "EXPECTED_VERTICES", "UNBOUNDED", "VertexMismatch",
    "VertexResult", "audit_table", "build_case_lp", "certify_all", "certify_vertex",
    "check_certificate", "minimal_R", "polytope_vertices",
]
