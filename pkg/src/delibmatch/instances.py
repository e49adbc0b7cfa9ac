"""Metric instances, ordinal profiles, tie directives and social cost."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .exactnum import Scalar, format_scalar, parse_scalar

ZERO = Fraction(0)


class InstanceError(ValueError):
    pass


class _Unbounded:
    """Marker for a ratio with no finite bound."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNBOUNDED"

    __str__ = __repr__

    def __float__(self) -> float:
        return float("inf")


UNBOUNDED = _Unbounded()


@dataclass(frozen=True)
class VoterBlock:
    """A point mass of identical voters; ``dist[i]`` is the distance to candidate ``i``."""

    mass: Scalar
    dist: tuple[Scalar, ...]
    name: str = ""


@dataclass(frozen=True)
class MetricInstance:
    candidates: tuple[str, ...]
    cand_dist: tuple[tuple[Scalar, ...], ...]
    voters: tuple[VoterBlock, ...]
    # optional embedding kept only so files can be written back in coordinate form
    embedding: str | None = field(default=None, compare=False)
    positions: Mapping[str, Any] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        m = len(self.candidates)
        if m < 2:
            raise InstanceError("need at least two candidates")
        if len(set(self.candidates)) != m:
            raise InstanceError("candidate names must be distinct")
        if len(self.cand_dist) != m or any(len(r) != m for r in self.cand_dist):
            raise InstanceError("cand_dist must be m x m")
        if not self.voters:
            raise InstanceError("no voters")
        for v in self.voters:
            if len(v.dist) != m:
                raise InstanceError(f"voter {v.name!r} has {len(v.dist)} distances, expected {m}")
            if not v.mass > 0:
                raise InstanceError(f"voter {v.name!r} has non-positive mass")

    @property
    def m(self) -> int:
        return len(self.candidates)

    def index(self, cand: str | int) -> int:
        if isinstance(cand, int):
            return cand
        try:
            return self.candidates.index(cand)
        except ValueError:
            raise InstanceError(f"unknown candidate {cand!r}") from None

    def voter_index(self, ref: str | int) -> int:
        if isinstance(ref, int):
            return ref
        for i, v in enumerate(self.voters):
            if v.name == ref:
                return i
        if ref.isdigit():
            return int(ref)
        raise InstanceError(f"unknown voter {ref!r}")

    @property
    def total_mass(self) -> Scalar:
        return sum((v.mass for v in self.voters), ZERO)

    def normalized(self) -> MetricInstance:
        t = self.total_mass
        if t == 1:
            return self
        voters = tuple(VoterBlock(v.mass / t, v.dist, v.name) for v in self.voters)
        return MetricInstance(self.candidates, self.cand_dist, voters, self.embedding, self.positions)

    def d(self, voter: int, cand: str | int) -> Scalar:
        return self.voters[voter].dist[self.index(cand)]

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_line(cls, cand_pos: Mapping[str, Scalar], voters: Sequence[tuple[str, Scalar, Scalar]]) -> MetricInstance:
        """``voters`` is a list of ``(name, mass, position)``."""
        names = tuple(cand_pos)
        pos = [cand_pos[c] for c in names]
        cd = tuple(tuple(abs(p - q) for q in pos) for p in pos)
        blocks = tuple(VoterBlock(mass, tuple(abs(x - p) for p in pos), name) for name, mass, x in voters)
        positions = {"candidates": dict(cand_pos), "voters": [x for _, _, x in voters]}
        return cls(names, cd, blocks, "line", positions)

    @classmethod
    def from_l1_plane(cls, cand_pos: Mapping[str, tuple[Scalar, Scalar]],
                      voters: Sequence[tuple[str, Scalar, tuple[Scalar, Scalar]]]) -> MetricInstance:
        names = tuple(cand_pos)
        pos = [cand_pos[c] for c in names]

        def l1(p, q):
            return abs(p[0] - q[0]) + abs(p[1] - q[1])

        cd = tuple(tuple(l1(p, q) for q in pos) for p in pos)
        blocks = tuple(VoterBlock(mass, tuple(l1(x, p) for p in pos), name) for name, mass, x in voters)
        positions = {"candidates": dict(cand_pos), "voters": [x for _, _, x in voters]}
        return cls(names, cd, blocks, "l1-plane", positions)


@dataclass
class TieDirectives:
    """Overrides for ties.

    ``pref[(voter, {X, Y})]`` names the candidate a tied voter counts toward;
    ``delib[({u, v}, {X, Y})]`` names the winner of a tied deliberation.
    A ``None`` voter key acts as a wildcard.  Without a directive the lower
    candidate index wins.
    """

    pref: dict[tuple[int | None, frozenset], str] = field(default_factory=dict)
    delib: dict[tuple[frozenset | None, frozenset], str] = field(default_factory=dict)

    def set_pref(self, voter: int | None, x: str, y: str, winner: str) -> TieDirectives:
        if winner not in (x, y):
            raise InstanceError(f"directive winner {winner} not in pair ({x}, {y})")
        self.pref[(voter, frozenset((x, y)))] = winner
        return self

    def set_delib(self, voters: tuple[int, int] | None, x: str, y: str, winner: str) -> TieDirectives:
        if winner not in (x, y):
            raise InstanceError(f"directive winner {winner} not in pair ({x}, {y})")
        key = None if voters is None else frozenset(voters)
        self.delib[(key, frozenset((x, y)))] = winner
        return self

    def pref_winner(self, voter: int, x: str, y: str, candidates: Sequence[str]) -> str:
        pair = frozenset((x, y))
        w = self.pref.get((voter, pair)) or self.pref.get((None, pair))
        if w is not None:
            return w
        return x if candidates.index(x) < candidates.index(y) else y

    def delib_winner(self, u: int, v: int, x: str, y: str, candidates: Sequence[str]) -> str:
        pair = frozenset((x, y))
        w = self.delib.get((frozenset((u, v)), pair)) or self.delib.get((None, pair))
        if w is not None:
            return w
        return x if candidates.index(x) < candidates.index(y) else y


@dataclass
class OrdinalProfile:
    """For each ordered pair ``(X, Y)`` the voters counted as preferring X to Y.

    ``masses`` are normalized to total 1.
    """

    candidates: tuple[str, ...]
    masses: tuple[Scalar, ...]
    prefers: dict[tuple[str, str], tuple[int, ...]]

    def supporters(self, x: str, y: str) -> tuple[int, ...]:
        return self.prefers[(x, y)]

    def support(self, x: str, y: str) -> Scalar:
        """``|XY|``."""
        return sum((self.masses[i] for i in self.prefers[(x, y)]), ZERO)

    def pairs(self) -> list[tuple[str, str]]:
        c = self.candidates
        return [(c[i], c[j]) for i in range(len(c)) for j in range(i + 1, len(c))]


@dataclass(frozen=True)
class Violation:
    kind: str
    where: tuple
    slack: Scalar

    def __str__(self) -> str:
        return f"{self.kind} at {self.where}: slack {format_scalar(self.slack)}"


def validate_metric(inst: MetricInstance) -> list[Violation]:
    """All metric violations among candidates and voter-candidate-candidate triples.

    Voter-voter distances are never needed: shortest paths through the
    candidates complete any instance that passes these checks.
    """
    out: list[Violation] = []
    c = inst.candidates
    D = inst.cand_dist
    m = inst.m
    for i in range(m):
        if D[i][i] != 0:
            out.append(Violation("nonzero-diagonal", (c[i],), D[i][i]))
        for j in range(m):
            if D[i][j] < 0:
                out.append(Violation("negative-distance", (c[i], c[j]), D[i][j]))
            if D[i][j] != D[j][i]:
                out.append(Violation("asymmetric", (c[i], c[j]), D[i][j] - D[j][i]))
    for i in range(m):
        for j in range(m):
            for k in range(m):
                if len({i, j, k}) < 3:
                    continue
                slack = D[i][j] + D[j][k] - D[i][k]
                if slack < 0:
                    out.append(Violation("candidate-triangle", (c[i], c[j], c[k]), slack))
    for vi, v in enumerate(inst.voters):
        name = v.name or vi
        for i in range(m):
            if v.dist[i] < 0:
                out.append(Violation("negative-distance", (name, c[i]), v.dist[i]))
        for i in range(m):
            for j in range(i + 1, m):
                s_upper = v.dist[i] + v.dist[j] - D[i][j]
                if s_upper < 0:
                    out.append(Violation("voter-triangle", (c[i], name, c[j]), s_upper))
                s_low = D[i][j] - abs(v.dist[i] - v.dist[j])
                if s_low < 0:
                    out.append(Violation("voter-triangle", (name, c[i], c[j]), s_low))
    return out


def derive_profile(inst: MetricInstance, ties: TieDirectives | None = None) -> OrdinalProfile:
    ties = ties or TieDirectives()
    norm = inst.normalized()
    c = inst.candidates
    prefers: dict[tuple[str, str], list[int]] = {(x, y): [] for x in c for y in c if x != y}
    for vi, v in enumerate(norm.voters):
        for i in range(inst.m):
            for j in range(i + 1, inst.m):
                x, y = c[i], c[j]
                dx, dy = v.dist[i], v.dist[j]
                if dx < dy:
                    win = x
                elif dy < dx:
                    win = y
                else:
                    win = ties.pref_winner(vi, x, y, c)
                lose = y if win == x else x
                prefers[(win, lose)].append(vi)
    return OrdinalProfile(c, tuple(v.mass for v in norm.voters),
                          {k: tuple(v) for k, v in prefers.items()})


def social_cost(inst: MetricInstance, cand: str | int) -> Scalar:
    """Mass-weighted total distance to ``cand`` (masses normalized to 1)."""
    i = inst.index(cand)
    norm = inst.normalized()
    return sum((v.mass * v.dist[i] for v in norm.voters), ZERO)


def optimal_candidate(inst: MetricInstance) -> str:
    costs = [social_cost(inst, i) for i in range(inst.m)]
    best = min(range(inst.m), key=lambda i: (costs[i], i))
    return inst.candidates[best]


# -- instance files ---------------------------------------------------------

def _scalar(v) -> Scalar:
    if isinstance(v, bool):
        raise InstanceError("boolean is not a scalar")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return parse_scalar(v)
    raise InstanceError(f"scalars must be strings or integers, got {v!r}")


def instance_from_dict(data: Mapping[str, Any]) -> tuple[MetricInstance, TieDirectives]:
    try:
        cands = list(data["candidates"])
        metric = data["metric"]
        voters = data["voters"]
    except KeyError as e:
        raise InstanceError(f"instance file missing field {e}") from None
    kind = metric.get("type", "explicit")
    if kind == "line":
        pos = {c: _scalar(metric["positions"][c]) for c in cands}
        vs = [(v.get("name", f"v{i}"), _scalar(v["mass"]), _scalar(v["position"])) for i, v in enumerate(voters)]
        inst = MetricInstance.from_line(pos, vs)
    elif kind == "l1-plane":
        pos = {c: tuple(_scalar(t) for t in metric["positions"][c]) for c in cands}
        vs = [(v.get("name", f"v{i}"), _scalar(v["mass"]), tuple(_scalar(t) for t in v["position"]))
              for i, v in enumerate(voters)]
        inst = MetricInstance.from_l1_plane(pos, vs)
    elif kind == "explicit":
        cd = tuple(tuple(_scalar(t) for t in row) for row in metric["cand_dist"])
        blocks = tuple(VoterBlock(_scalar(v["mass"]), tuple(_scalar(t) for t in v["dist"]), v.get("name", f"v{i}"))
                       for i, v in enumerate(voters))
        inst = MetricInstance(tuple(cands), cd, blocks)
    else:
        raise InstanceError(f"unknown metric type {kind!r}")

    ties = TieDirectives()
    tdata = data.get("ties") or {}
    for t in tdata.get("pref", []):
        who = t.get("voter", "*")
        vi = None if who == "*" else inst.voter_index(who)
        ties.set_pref(vi, t["pair"][0], t["pair"][1], t["winner"])
    for t in tdata.get("delib", []):
        who = t.get("voters", "*")
        key = None if who == "*" else (inst.voter_index(who[0]), inst.voter_index(who[1]))
        ties.set_delib(key, t["pair"][0], t["pair"][1], t["winner"])
    return inst, ties


def instance_to_dict(inst: MetricInstance, ties: TieDirectives | None = None, **extra) -> dict[str, Any]:
    fs = format_scalar
    names = [v.name or f"v{i}" for i, v in enumerate(inst.voters)]
    out: dict[str, Any] = {"candidates": list(inst.candidates)}
    if inst.embedding == "line" and inst.positions:
        out["metric"] = {"type": "line", "positions": {c: fs(p) for c, p in inst.positions["candidates"].items()}}
        out["voters"] = [{"name": n, "mass": fs(v.mass), "position": fs(x)}
                         for n, v, x in zip(names, inst.voters, inst.positions["voters"])]
    elif inst.embedding == "l1-plane" and inst.positions:
        out["metric"] = {"type": "l1-plane",
                         "positions": {c: [fs(t) for t in p] for c, p in inst.positions["candidates"].items()}}
        out["voters"] = [{"name": n, "mass": fs(v.mass), "position": [fs(t) for t in x]}
                         for n, v, x in zip(names, inst.voters, inst.positions["voters"])]
    else:
        out["metric"] = {"type": "explicit", "cand_dist": [[fs(t) for t in row] for row in inst.cand_dist]}
        out["voters"] = [{"name": n, "mass": fs(v.mass), "dist": [fs(t) for t in v.dist]}
                         for n, v in zip(names, inst.voters)]
    if ties is not None and (ties.pref or ties.delib):
        pref = []
        for (vi, pair), w in ties.pref.items():
            a, b = sorted(pair, key=inst.index)
            pref.append({"voter": "*" if vi is None else names[vi], "pair": [a, b], "winner": w})
        delib = []
        for (key, pair), w in ties.delib.items():
            a, b = sorted(pair, key=inst.index)
            who = "*" if key is None else [names[i] for i in sorted(key)]
            delib.append({"voters": who, "pair": [a, b], "winner": w})
        out["ties"] = {"pref": pref, "delib": delib}
    out.update(extra)
    return out


def load_instance(path: str | Path) -> tuple[MetricInstance, TieDirectives]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return instance_from_dict(data)


def dump_instance(inst: MetricInstance, ties: TieDirectives | None = None, **extra) -> str:
    return json.dumps(instance_to_dict(inst, ties, **extra), indent=2, ensure_ascii=False)


def split_block(inst: MetricInstance, index: int, fractions: Iterable[Scalar]) -> MetricInstance:
    """Replace voter ``index`` by copies whose masses are the given shares of it."""
    v = inst.voters[index]
    shares = list(fractions)
    if sum(shares, ZERO) != 1:
        raise InstanceError("shares must sum to 1")
    parts = tuple(VoterBlock(v.mass * s, v.dist, f"{v.name}.{k}") for k, s in enumerate(shares))
    voters = inst.voters[:index] + parts + inst.voters[index + 1:]
    return MetricInstance(inst.candidates, inst.cand_dist, voters)
