"""Worst-case metric computations.

Two families of tools live here.  The first is the distortion LP: given the
ordinal profile and the deliberation outcomes, maximize SC(winner) over all
(pseudo)metrics consistent with them, normalized by SC(ref) = 1.  The second
is the three-candidate reduction to the variables

    X(v) = d(v,C) - d(v,A),   Y(v) = d(v,B) - d(v,C),   Z(v) = d(v,C)

together with the minimal feasible Z, the objective Phi_R and the coupling
and compaction moves that never increase it.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .exactnum import Scalar
from .instances import UNBOUNDED, MetricInstance, OrdinalProfile, VoterBlock
from .lpsolve import LinearProgram, Status, lp_solve

ZERO = Fraction(0)
HALF = Fraction(1, 2)


class NormsDoNotDominate(ValueError):
    pass


class InfeasibleZ(ValueError):
    pass


class MassMismatch(ValueError):
    pass


class InconsistentProfile(RuntimeError):
    pass


@dataclass(frozen=True)
class XYBlock:
    mass: Scalar
    x: Scalar
    y: Scalar
    z: Scalar | None = None


@dataclass(frozen=True)
class Norms:
    mx: Scalar
    my: Scalar
    mxy: Scalar

    @classmethod
    def of(cls, blocks: Iterable[XYBlock]) -> Norms:
        mx = my = mxy = ZERO
        for b in blocks:
            if not b.mass:
                continue
            mx = max(mx, abs(b.x))
            my = max(my, abs(b.y))
            mxy = max(mxy, abs(b.x + b.y))
        return cls(mx, my, mxy)

    def dominates(self, x: Scalar, y: Scalar) -> bool:
        return self.mx >= abs(x) and self.my >= abs(y) and self.mxy >= abs(x + y)


def z_min(x: Scalar, y: Scalar, norms: Norms) -> Scalar:
    """Smallest d(v,C) that a metric with these norms allows for a voter at (x, y)."""
    if not norms.dominates(x, y):
        raise NormsDoNotDominate(f"norms {norms} do not cover (x={x}, y={y})")
    return max((norms.mx + x) / 2, (norms.my - y) / 2, (norms.mxy + x - y) / 2)


def realize_metric(blocks: Sequence[XYBlock], strict: bool = True) -> MetricInstance:
    """Three-candidate instance with d(A,C)=Mx, d(B,C)=My, d(A,B)=Mxy.

    Each block becomes a voter at distances ``(z - x, z + y, z)`` from
    ``(A, B, C)``.  With ``strict`` a block below its z_min raises
    :class:`InfeasibleZ`; otherwise the (invalid) instance is built anyway so
    the broken triangle can be inspected.
    """
    norms = Norms.of(blocks)
    voters = []
    for i, b in enumerate(blocks):
        if b.z is None:
            raise InfeasibleZ(f"block {i} has no z")
        if strict and b.z < z_min(b.x, b.y, norms):
            raise InfeasibleZ(f"block {i}: z={b.z} below z_min")
        voters.append(VoterBlock(b.mass, (b.z - b.x, b.z + b.y, b.z), f"v{i}"))
    cd = ((ZERO, norms.mxy, norms.mx), (norms.mxy, ZERO, norms.my), (norms.mx, norms.my, ZERO))
    return MetricInstance(("A", "B", "C"), cd, tuple(voters))


def blocks_from_instance(inst: MetricInstance) -> list[XYBlock]:
    """Inverse of :func:`realize_metric` for a three-candidate instance named A, B, C."""
    a, b, c = inst.index("A"), inst.index("B"), inst.index("C")
    out = []
    for v in inst.voters:
        d = v.dist
        out.append(XYBlock(v.mass, d[c] - d[a], d[b] - d[c], d[c]))
    return out


def phi(R: Scalar, blocks: Sequence[XYBlock]) -> Scalar:
    """E X + (R+1) E Y + R E z_min, with norms taken from the blocks themselves."""
    norms = Norms.of(blocks)
    total = ZERO
    for b in blocks:
        total += b.mass * (b.x + (R + 1) * b.y + R * z_min(b.x, b.y, norms))
    return total


def phi_with_z(R: Scalar, blocks: Sequence[XYBlock]) -> Scalar:
    """Same objective using each block's own z."""
    return sum((b.mass * (b.x + (R + 1) * b.y + R * b.z) for b in blocks), ZERO)


def couple_in_order(xs: Sequence[tuple[Scalar, Scalar]], ys: Sequence[tuple[Scalar, Scalar]]) -> list[XYBlock]:
    """Merge two ``(value, mass)`` lists of equal total mass in the given orders."""
    tx = sum((m for _, m in xs), ZERO)
    ty = sum((m for _, m in ys), ZERO)
    if tx != ty:
        raise MassMismatch(f"marginal masses differ: {tx} vs {ty}")
    out = []
    xs = [(v, m) for v, m in xs if m]
    ys = [(v, m) for v, m in ys if m]
    i = j = 0
    rx = xs[0][1] if xs else ZERO
    ry = ys[0][1] if ys else ZERO
    while i < len(xs) and j < len(ys):
        m = min(rx, ry)
        out.append(XYBlock(m, xs[i][0], ys[j][0]))
        rx -= m
        ry -= m
        if rx == 0:
            i += 1
            if i < len(xs):
                rx = xs[i][1]
        if ry == 0:
            j += 1
            if j < len(ys):
                ry = ys[j][1]
    return out


def counter_monotone_couple(xs: Sequence[tuple[Scalar, Scalar]],
                            ys: Sequence[tuple[Scalar, Scalar]]) -> list[XYBlock]:
    """Pair large x with small y: xs descending against ys ascending."""
    for name, lst in (("xs", xs), ("ys", ys)):
        total = sum((m for _, m in lst), ZERO)
        if total != 1:
            raise MassMismatch(f"{name} has total mass {total}, expected 1")
        if any(m < 0 for _, m in lst):
            raise MassMismatch(f"{name} has a negative mass")
    sx = sorted(xs, key=lambda t: t[0], reverse=True)
    sy = sorted(ys, key=lambda t: t[0])
    return couple_in_order(sx, sy)


def submodular_envelope(a: Scalar, b: Scalar, c: Scalar, x: Scalar, y: Scalar) -> Scalar:
    return max(a + x, b + y, c + x + y)


def compact_pair(b1: XYBlock, b2: XYBlock) -> tuple[XYBlock, XYBlock]:
    """Replace two equal-mass blocks by two copies of their mean."""
    if b1.mass != b2.mass:
        raise ValueError("compaction needs blocks of equal mass")
    mx = (b1.x + b2.x) / 2
    my = (b1.y + b2.y) / 2
    return replace(b1, x=mx, y=my, z=None), replace(b2, x=mx, y=my, z=None)


# --- distortion LP over consistent metrics ---------------------------------

@dataclass(frozen=True)
class Atom:
    voter: int
    start: Scalar
    mass: Scalar

    @property
    def name(self) -> str:
        return f"v{self.voter}@{self.start}"


def _segments(records: Mapping) -> list[tuple[int, Scalar, int, Scalar, Scalar, str]]:
    """(u, offset_u, v, offset_v, mass, outcome) for every matched triple."""
    segs = []
    for rec in records.values():
        used: dict[int, Scalar] = {}
        for (u, v, m), out in zip(rec.matching.triples, rec.outcomes):
            a, b = used.get(u, ZERO), used.get(v, ZERO)
            segs.append((u, a, v, b, m, out, rec.pair))
            used[u] = a + m
            used[v] = b + m
    return segs


def refine_atoms(profile: OrdinalProfile, records: Mapping, max_rounds: int = 64) -> dict[int, list[Scalar]] | None:
    """Cut points per voter so that every matched segment pairs whole atoms.

    A voter matched to several partners is split where its partners'
    segments begin and end; cuts are then carried across each segment to the
    partner side until nothing changes.  Returns None if the closure does not
    settle within ``max_rounds``.
    """
    cuts = {i: {ZERO, m} for i, m in enumerate(profile.masses)}
    segs = _segments(records)
    for u, a, v, b, m, *_ in segs:
        cuts[u].update((a, a + m))
        cuts[v].update((b, b + m))
    for _ in range(max_rounds):
        changed = False
        for u, a, v, b, m, *_ in segs:
            for src, so, dst, do in ((u, a, v, b), (v, b, u, a)):
                for c in list(cuts[src]):
                    if so < c < so + m:
                        t = do + (c - so)
                        if t not in cuts[dst]:
                            cuts[dst].add(t)
                            changed = True
        if not changed:
            return {i: sorted(cs) for i, cs in cuts.items()}
    return None


def build_distortion_lp(profile: OrdinalProfile, records: Mapping, winner: str, ref: str,
                        refine: bool = True) -> tuple[LinearProgram, list[Atom]]:
    cands = profile.candidates
    cuts = refine_atoms(profile, records) if refine else None
    if cuts is None:
        cuts = {i: [ZERO, m] for i, m in enumerate(profile.masses)}
    atoms: list[Atom] = []
    by_voter: dict[int, list[Atom]] = {}
    for i, cs in cuts.items():
        for lo, hi in zip(cs, cs[1:]):
            if hi > lo:
                at = Atom(i, lo, hi - lo)
                atoms.append(at)
                by_voter.setdefault(i, []).append(at)

    def dv(at: Atom, c: str) -> str:
        return f"d[{at.name},{c}]"

    def dc(x: str, y: str) -> str:
        x, y = sorted((x, y), key=cands.index)
        return f"d[{x},{y}]"

    lp = LinearProgram("worst-case distortion")
    for at in atoms:
        for c in cands:
            lp.add_variable(dv(at, c))
    for i, x in enumerate(cands):
        for y in cands[i + 1:]:
            lp.add_variable(dc(x, y))

    for (x, y) in profile.pairs():
        for a, b in ((x, y), (y, x)):
            for vi in profile.supporters(a, b):
                for at in by_voter.get(vi, []):
                    lp.add_constraint(f"pref {at.name} {a}>{b}", {dv(at, a): 1, dv(at, b): -1}, "<=")

    for u, a, v, b, m, out, (x, y) in _segments(records):
        lose = y if out == x else x
        ua = [t for t in by_voter.get(u, []) if a <= t.start < a + m]
        va = [t for t in by_voter.get(v, []) if b <= t.start < b + m]
        if refine and len(ua) == len(va):
            pairs = list(zip(ua, va))
        else:
            pairs = [(s, t) for s in ua for t in va]
        for s, t in pairs:
            coeffs: dict[str, Scalar] = {}
            for key, c in ((dv(s, out), 1), (dv(t, out), 1), (dv(s, lose), -1), (dv(t, lose), -1)):
                coeffs[key] = coeffs.get(key, 0) + c
            lp.add_constraint(f"delib {s.name}+{t.name} {out}>{lose}", coeffs, "<=")

    for at in atoms:
        for x in cands:
            for y in cands:
                if x == y:
                    continue
                lp.add_constraint(f"tri {at.name} {x}<={y}+{x}{y}",
                                  {dv(at, x): 1, dv(at, y): -1, dc(x, y): -1}, "<=")
        for i, x in enumerate(cands):
            for y in cands[i + 1:]:
                lp.add_constraint(f"tri {x}{y}<={at.name}",
                                  {dc(x, y): 1, dv(at, x): -1, dv(at, y): -1}, "<=")
    for x in cands:
        for i, y in enumerate(cands):
            for z in cands[i + 1:]:
                if x in (y, z):
                    continue
                lp.add_constraint(f"tri {y}{z}<={y}{x}+{x}{z}",
                                  {dc(y, z): 1, dc(y, x): -1, dc(x, z): -1}, "<=")

    lp.add_constraint("normalize", {dv(at, ref): at.mass for at in atoms}, "=", 1)
    lp.set_objective({dv(at, winner): -at.mass for at in atoms})
    return lp, atoms


@dataclass
class WorstCase:
    ratio: Scalar | object
    witness: dict[str, Scalar] | None = None


def worst_case_distortion(profile: OrdinalProfile, records: Mapping, winner: str, ref: str,
                          refine: bool = True, with_witness: bool = False):
    """Supremum of SC(winner)/SC(ref) over metrics consistent with the observations.

    Returns an exact scalar or :data:`UNBOUNDED` (or a :class:`WorstCase`
    carrying the maximizing distances when ``with_witness`` is set).
    """
    if winner == ref:
        return WorstCase(Fraction(1)) if with_witness else Fraction(1)
    lp, _ = build_distortion_lp(profile, records, winner, ref, refine)
    sol = lp_solve(lp)
    if sol.status is Status.INFEASIBLE:
        raise InconsistentProfile("no metric is consistent with the profile and deliberation outcomes")
    if sol.status is Status.UNBOUNDED:
        return WorstCase(UNBOUNDED) if with_witness else UNBOUNDED
    val = -sol.objective
    return WorstCase(val, dict(sol.x)) if with_witness else val
