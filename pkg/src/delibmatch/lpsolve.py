"""Exact linear programming over Fractions (or Q3).

Dense two-phase tableau simplex with Bland's rule.  Coefficients may be any
exact ordered-field type that mixes with :class:`fractions.Fraction`, so the
same solver runs over Q and Q(sqrt 3).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .exactnum import Scalar, format_scalar

ZERO = Fraction(0)
ONE = Fraction(1)

RELATIONS = (">=", "<=", "=")


class MalformedProgram(ValueError):
    pass


class Status(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass
class Variable:
    name: str
    lb: Scalar | None = ZERO
    ub: Scalar | None = None


@dataclass
class Constraint:
    name: str
    coeffs: dict[str, Scalar]
    rel: str
    rhs: Scalar = ZERO

    def lhs_value(self, x: Mapping[str, Scalar]) -> Scalar:
        return sum((c * x[v] for v, c in self.coeffs.items()), ZERO)

    def satisfied(self, x: Mapping[str, Scalar]) -> bool:
        lhs = self.lhs_value(x)
        if self.rel == ">=":
            return lhs >= self.rhs
        if self.rel == "<=":
            return lhs <= self.rhs
        return lhs == self.rhs


class LinearProgram:
    """``min c.x`` over named variables and named constraints."""

    def __init__(self, name: str = "lp"):
        self.name = name
        self.variables: dict[str, Variable] = {}
        self.constraints: dict[str, Constraint] = {}
        self.objective: dict[str, Scalar] = {}

    def add_variable(self, name: str, lb: Scalar | None = ZERO, ub: Scalar | None = None) -> str:
        if name in self.variables:
            raise MalformedProgram(f"duplicate variable {name}")
        if lb is not None and ub is not None and ub < lb:
            raise MalformedProgram(f"empty bounds on {name}")
        self.variables[name] = Variable(name, lb, ub)
        return name

    def add_constraint(self, name: str, coeffs: Mapping[str, Scalar], rel: str, rhs: Scalar = ZERO) -> Constraint:
        if rel not in RELATIONS:
            raise MalformedProgram(f"bad relation {rel!r}")
        if name in self.constraints:
            raise MalformedProgram(f"duplicate constraint {name}")
        for v in coeffs:
            if v not in self.variables:
                raise MalformedProgram(f"constraint {name} uses unknown variable {v}")
        row = {v: c for v, c in coeffs.items() if c}
        con = Constraint(name, row, rel, rhs)
        self.constraints[name] = con
        return con

    def set_objective(self, coeffs: Mapping[str, Scalar]) -> None:
        for v in coeffs:
            if v not in self.variables:
                raise MalformedProgram(f"objective uses unknown variable {v}")
        self.objective = {v: c for v, c in coeffs.items() if c}

    def objective_value(self, x: Mapping[str, Scalar]) -> Scalar:
        return sum((c * x[v] for v, c in self.objective.items()), ZERO)

    def dump(self) -> str:
        """One line per row; readable by humans and trivial to re-parse."""

        def expr(coeffs):
            return " ".join(f"{format_scalar(c)}*{v}" for v, c in coeffs.items()) or "0"

        lines = [f"# {self.name}", f"min: {expr(self.objective)}"]
        for con in self.constraints.values():
            lines.append(f"{con.name}: {expr(con.coeffs)} {con.rel} {format_scalar(con.rhs)}")
        for var in self.variables.values():
            lo = "-inf" if var.lb is None else format_scalar(var.lb)
            hi = "+inf" if var.ub is None else format_scalar(var.ub)
            lines.append(f"bound {var.name}: [{lo}, {hi}]")
        return "\n".join(lines)

    def solve(self) -> LpSolution:
        return lp_solve(self)


@dataclass
class LpSolution:
    status: Status
    objective: Scalar | None = None
    x: dict[str, Scalar] = field(default_factory=dict)
    duals: dict[str, Scalar] = field(default_factory=dict)
    reduced_costs: dict[str, Scalar] = field(default_factory=dict)
    ray: dict[str, Scalar] | None = None
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL

    def dual_objective(self, lp: LinearProgram) -> Scalar:
        """``b.y`` plus the contribution of active variable bounds."""
        total = sum((self.duals[n] * c.rhs for n, c in lp.constraints.items()), ZERO)
        for name, var in lp.variables.items():
            r = self.reduced_costs[name]
            if not r:
                continue
            if var.lb is not None and self.x[name] == var.lb:
                total += r * var.lb
            elif var.ub is not None and self.x[name] == var.ub:
                total += r * var.ub
        return total


class _Tableau:
    """Standard form ``min c.z, Az = b, z >= 0, b >= 0`` with basis tracking."""

    def __init__(self, lp: LinearProgram):
        self.lp = lp
        self.col_names: list[str] = []
        # original variable -> (offset, [(col, factor)])
        self.var_map: dict[str, tuple[Scalar, list[tuple[int, int]]]] = {}
        rows: list[tuple[str | None, dict[int, Scalar], str, Scalar]] = []

        for name, var in lp.variables.items():
            if var.lb is not None:
                col = self._new_col(name)
                self.var_map[name] = (var.lb, [(col, 1)])
                if var.ub is not None:
                    rows.append((None, {col: ONE}, "<=", var.ub - var.lb))
            elif var.ub is not None:
                col = self._new_col(name + "~neg")
                self.var_map[name] = (var.ub, [(col, -1)])
            else:
                cp = self._new_col(name + "~pos")
                cn = self._new_col(name + "~neg")
                self.var_map[name] = (ZERO, [(cp, 1), (cn, -1)])

        for con in lp.constraints.values():
            row: dict[int, Scalar] = {}
            rhs = con.rhs
            for v, c in con.coeffs.items():
                off, cols = self.var_map[v]
                rhs = rhs - c * off
                for col, fac in cols:
                    row[col] = row.get(col, ZERO) + c * fac
            rows.append((con.name, row, con.rel, rhs))

        self.n_struct = len(self.col_names)
        self.row_names: list[str | None] = []
        self.row_sign: list[int] = []
        self.basis: list[int] = []
        self.init_col: list[int] = []
        self.artificial: set[int] = set()
        dense_rows = []
        pending = []
        for name, row, rel, rhs in rows:
            slack = None
            if rel == "<=":
                slack = (self._new_col(f"s[{name}]"), 1)
            elif rel == ">=":
                slack = (self._new_col(f"s[{name}]"), -1)
            pending.append((name, row, rhs, slack))
        for name, row, rhs, slack in pending:
            # negate rows so the rhs is nonnegative; a zero rhs ">=" row is
            # negated too so its slack can start basic without an artificial
            flip = -1 if rhs < 0 or (rhs == 0 and slack is not None and slack[1] == -1) else 1
            basic = None
            if slack is not None and slack[1] * flip == 1:
                basic = slack[0]
            if basic is None:
                basic = self._new_col(f"a[{name}]")
                self.artificial.add(basic)
            dense_rows.append((row, rhs, slack, flip, basic))
            self.row_names.append(name)
            self.row_sign.append(flip)
            self.basis.append(basic)
            self.init_col.append(basic)

        self.ncols = len(self.col_names)
        self.T: list[list[Scalar]] = []
        for row, rhs, slack, flip, basic in dense_rows:
            r = [ZERO] * (self.ncols + 1)
            for col, c in row.items():
                r[col] = c * flip
            if slack is not None:
                r[slack[0]] = Fraction(slack[1] * flip)
            if basic in self.artificial:
                r[basic] = ONE
            r[-1] = rhs * flip
            self.T.append(r)

        self.cost = [ZERO] * self.ncols
        for v, c in lp.objective.items():
            off, cols = self.var_map[v]
            for col, fac in cols:
                self.cost[col] += c * fac
        self.const = sum((c * self.var_map[v][0] for v, c in lp.objective.items()), ZERO)
        self.pivots = 0

    def _new_col(self, name: str) -> int:
        self.col_names.append(name)
        return len(self.col_names) - 1

    def _objective_row(self, cost: list[Scalar]) -> list[Scalar]:
        z = list(cost) + [ZERO]
        for i, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                row = self.T[i]
                for j, v in enumerate(row):
                    if v:
                        z[j] -= cb * v
        return z

    def _pivot(self, r: int, c: int, z: list[Scalar]) -> None:
        prow = self.T[r]
        p = prow[c]
        if p != 1:
            prow = [v / p if v else v for v in prow]
            self.T[r] = prow
        nz = [j for j, v in enumerate(prow) if v]
        for i, row in enumerate(self.T):
            if i == r:
                continue
            f = row[c]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
        f = z[c]
        if f:
            for j in nz:
                z[j] -= f * prow[j]
        self.basis[r] = c
        self.pivots += 1

    def _run(self, z: list[Scalar], allowed) -> int | None:
        """Bland's rule; returns the entering column of an unbounded ray, else None."""
        while True:
            enter = next((j for j in range(self.ncols) if z[j] < 0 and allowed(j)), None)
            if enter is None:
                return None
            best = None
            for i, row in enumerate(self.T):
                a = row[enter]
                if a > 0:
                    ratio = row[-1] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return enter
            self._pivot(best[1], enter, z)

    def solve(self) -> LpSolution:
        lp = self.lp
        if self.artificial:
            c1 = [ONE if j in self.artificial else ZERO for j in range(self.ncols)]
            z1 = self._objective_row(c1)
            self._run(z1, lambda j: True)
            if -z1[-1] > 0:
                return LpSolution(Status.INFEASIBLE, pivots=self.pivots)
            # drive zero-valued artificials out of the basis
            for i, b in enumerate(self.basis):
                if b in self.artificial:
                    row = self.T[i]
                    col = next((j for j in range(self.ncols) if row[j] and j not in self.artificial), None)
                    if col is not None:
                        self._pivot(i, col, z1)
        z = self._objective_row(self.cost)
        enter = self._run(z, lambda j: j not in self.artificial)
        values = [ZERO] * self.ncols
        for i, b in enumerate(self.basis):
            values[b] = self.T[i][-1]
        x = self._to_original(values, with_offset=True)
        if enter is not None:
            d = [ZERO] * self.ncols
            d[enter] = ONE
            for i, b in enumerate(self.basis):
                d[b] = -self.T[i][enter]
            ray = self._to_original(d, with_offset=False)
            return LpSolution(Status.UNBOUNDED, x=x, ray=ray, pivots=self.pivots)

        # y_i = c_k - rc_k for the column k that started basic in row i
        duals = {}
        bound_duals: dict[int, Scalar] = {}
        for i, k in enumerate(self.init_col):
            y = (self.cost[k] - z[k]) * self.row_sign[i]
            name = self.row_names[i]
            if name is None:
                bound_duals[i] = y
            else:
                duals[name] = y
        reduced = {}
        for vname in lp.variables:
            r = lp.objective.get(vname, ZERO)
            for cname, con in lp.constraints.items():
                a = con.coeffs.get(vname)
                if a:
                    r -= a * duals[cname]
            reduced[vname] = r
        obj = lp.objective_value(x)
        return LpSolution(Status.OPTIMAL, objective=obj, x=x, duals=duals,
                          reduced_costs=reduced, pivots=self.pivots)

    def _to_original(self, vals: list[Scalar], with_offset: bool) -> dict[str, Scalar]:
        out = {}
        for name, (off, cols) in self.var_map.items():
            v = off if with_offset else ZERO
            for col, fac in cols:
                v += fac * vals[col]
            out[name] = v
        return out


def lp_solve(lp: LinearProgram) -> LpSolution:
    """Solve ``lp`` exactly.

    On ``Optimal`` the returned primal is a vertex and ``duals`` satisfy the
    KKT conditions exactly (see :func:`kkt_violations`).  On ``Unbounded`` the
    solution carries a recession ``ray`` along which the objective decreases.
    """
    if not lp.variables:
        raise MalformedProgram("program has no variables")
    return _Tableau(lp).solve()


def kkt_violations(lp: LinearProgram, sol: LpSolution) -> list[str]:
    """Exact KKT audit of an optimal solution; empty list means certified."""
    out = []
    x = sol.x
    for name, var in lp.variables.items():
        if var.lb is not None and x[name] < var.lb:
            out.append(f"{name} below lower bound")
        if var.ub is not None and x[name] > var.ub:
            out.append(f"{name} above upper bound")
        r = sol.reduced_costs[name]
        at_lb = var.lb is not None and x[name] == var.lb
        at_ub = var.ub is not None and x[name] == var.ub
        if r > 0 and not at_lb:
            out.append(f"reduced cost of {name} positive off its lower bound")
        if r < 0 and not at_ub:
            out.append(f"reduced cost of {name} negative off its upper bound")
    for name, con in lp.constraints.items():
        if not con.satisfied(x):
            out.append(f"{name} violated")
        y = sol.duals[name]
        if con.rel == ">=" and y < 0 or con.rel == "<=" and y > 0:
            out.append(f"dual of {name} has wrong sign")
        if y and con.lhs_value(x) != con.rhs:
            out.append(f"complementary slackness fails on {name}")
    if lp.objective_value(x) != sol.dual_objective(lp):
        out.append("primal and dual objectives differ")
    return out


def solve_linear_system(rows: list[list[Scalar]], rhs: list[Scalar]) -> list[Scalar] | None:
    """Exact Gauss-Jordan solve of a square system; None if singular."""
    n = len(rows)
    M = [list(r) + [b] for r, b in zip(rows, rhs)]
    for c in range(n):
        p = next((i for i in range(c, n) if M[i][c]), None)
        if p is None:
            return None
        M[c], M[p] = M[p], M[c]
        pv = M[c][c]
        M[c] = [v / pv for v in M[c]]
        for i in range(n):
            if i != c and M[i][c]:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[c])]
    return [M[i][n] for i in range(n)]


def rank(rows: Iterable[list[Scalar]]) -> int:
    M = [list(r) for r in rows]
    if not M:
        return 0
    r = 0
    ncols = len(M[0])
    for c in range(ncols):
        p = next((i for i in range(r, len(M)) if M[i][c]), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        for i in range(len(M)):
            if i != r and M[i][c]:
                f = M[i][c] / M[r][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        r += 1
    return r
