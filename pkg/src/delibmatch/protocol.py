"""Deliberation via matching.

For every candidate pair the voters who disagree are paired by a maximum
fractional matching, each matched pair supports whichever candidate is
closer in total, and the weighted scores ``|XY| + w * W_XY`` are normalized
into a tournament that the lambda-weighted uncovered set rule aggregates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactnum import Scalar
from .instances import (
    UNBOUNDED,
    MetricInstance,
    OrdinalProfile,
    TieDirectives,
    derive_profile,
    optimal_candidate,
    social_cost,
)

ZERO = Fraction(0)
HALF = Fraction(1, 2)

POLICIES = ("by-order", "counter-monotone", "explicit")


class InfeasibleExplicitMatching(ValueError):
    pass


class EmptyUncoveredSet(RuntimeError):
    pass


class ParameterError(ValueError):
    pass


@dataclass
class FractionalMatching:
    pair: tuple[str, str]
    triples: list[tuple[int, int, Scalar]]
    unmatched: dict[int, Scalar]

    @property
    def size(self) -> Scalar:
        return sum((t[2] for t in self.triples), ZERO)


@dataclass
class DeliberationRecord:
    pair: tuple[str, str]
    matching: FractionalMatching
    outcomes: list[str]
    wins: dict[str, Scalar]

    def W(self, cand: str) -> Scalar:
        return self.wins[cand]


@dataclass
class Tournament:
    candidates: tuple[str, ...]
    lam: Scalar
    w: Scalar
    score: dict[tuple[str, str], Scalar]
    f: dict[tuple[str, str], Scalar]
    records: dict[tuple[str, str], DeliberationRecord] = field(default_factory=dict)


def _greedy(left: Sequence[int], right: Sequence[int], masses: Sequence[Scalar]) -> list[tuple[int, int, Scalar]]:
    triples = []
    i = j = 0
    ru = masses[left[0]] if left else ZERO
    rv = masses[right[0]] if right else ZERO
    while i < len(left) and j < len(right):
        m = min(ru, rv)
        triples.append((left[i], right[j], m))
        ru -= m
        rv -= m
        if ru == 0:
            i += 1
            if i < len(left):
                ru = masses[left[i]]
        if rv == 0:
            j += 1
            if j < len(right):
                rv = masses[right[j]]
    return triples


def _unmatched(profile: OrdinalProfile, pair, triples) -> dict[int, Scalar]:
    x, y = pair
    used: dict[int, Scalar] = {}
    for u, v, m in triples:
        used[u] = used.get(u, ZERO) + m
        used[v] = used.get(v, ZERO) + m
    rest = {}
    for vi in profile.supporters(x, y) + profile.supporters(y, x):
        r = profile.masses[vi] - used.get(vi, ZERO)
        if r:
            rest[vi] = r
    return rest


def build_matching(profile: OrdinalProfile, pair: tuple[str, str], policy: str = "by-order",
                   inst: MetricInstance | None = None,
                   explicit: Sequence[tuple[int, int, Scalar]] | None = None) -> FractionalMatching:
    """A maximum fractional matching between ``XY`` and ``YX``.

    ``by-order`` pairs blocks greedily in voter order.  ``counter-monotone``
    sorts ``XY`` by ``d(v,Y) - d(v,X)`` descending and ``YX`` by the same
    value ascending before pairing greedily; it needs ``inst``.
    ``explicit`` validates and adopts the given ``(u, v, mass)`` list.
    """
    x, y = pair
    left = list(profile.supporters(x, y))
    right = list(profile.supporters(y, x))
    masses = profile.masses
    if policy == "by-order":
        triples = _greedy(left, right, masses)
    elif policy == "counter-monotone":
        if inst is None:
            raise ValueError("counter-monotone policy needs the metric instance")
        xi, yi = inst.index(x), inst.index(y)

        def t(v):
            return inst.voters[v].dist[yi] - inst.voters[v].dist[xi]

        left.sort(key=lambda v: (-t(v), v))
        right.sort(key=lambda v: (t(v), v))
        triples = _greedy(left, right, masses)
    elif policy == "explicit":
        if explicit is None:
            raise InfeasibleExplicitMatching(f"explicit policy without a matching for {x}{y}")
        triples = [(u, v, m) for u, v, m in explicit if m]
        lset, rset = set(left), set(right)
        used: dict[int, Scalar] = {}
        for u, v, m in triples:
            if u not in lset or v not in rset:
                if u in rset and v in lset:
                    raise InfeasibleExplicitMatching(f"triple ({u}, {v}) is reversed; list the {x}-supporter first")
                raise InfeasibleExplicitMatching(f"triple ({u}, {v}) does not pair {x}{y} with {y}{x}")
            if m < 0:
                raise InfeasibleExplicitMatching("negative matched mass")
            used[u] = used.get(u, ZERO) + m
            used[v] = used.get(v, ZERO) + m
        for vi, m in used.items():
            if m > masses[vi]:
                raise InfeasibleExplicitMatching(f"voter {vi} matched beyond its mass")
        size = sum((m for *_, m in triples), ZERO)
        if size != min(profile.support(x, y), profile.support(y, x)):
            raise InfeasibleExplicitMatching("matching is not maximum")
    else:
        raise ValueError(f"unknown matching policy {policy!r}")
    return FractionalMatching(pair, triples, _unmatched(profile, pair, triples))


def deliberate(inst: MetricInstance, matching: FractionalMatching, pair: tuple[str, str],
               ties: TieDirectives | None = None) -> DeliberationRecord:
    ties = ties or TieDirectives()
    x, y = pair
    xi, yi = inst.index(x), inst.index(y)
    outcomes = []
    wins = {x: ZERO, y: ZERO}
    for u, v, m in matching.triples:
        du, dv = inst.voters[u].dist, inst.voters[v].dist
        sx = du[xi] + dv[xi]
        sy = du[yi] + dv[yi]
        if sx < sy:
            win = x
        elif sy < sx:
            win = y
        else:
            win = ties.delib_winner(u, v, x, y, inst.candidates)
        outcomes.append(win)
        wins[win] += m
    return DeliberationRecord(pair, matching, outcomes, wins)


def pairwise_scores(profile: OrdinalProfile, rec: DeliberationRecord, w: Scalar):
    """``(score(XY), score(YX), f(XY), f(YX))`` with unit total voter mass."""
    if w < 0:
        raise ParameterError("deliberation weight must be nonnegative")
    x, y = rec.pair
    sxy = profile.support(x, y) + w * rec.W(x)
    syx = profile.support(y, x) + w * rec.W(y)
    total = sxy + syx
    fxy = sxy / total
    return sxy, syx, fxy, 1 - fxy


def check_params(lam: Scalar, w: Scalar) -> None:
    if not (HALF <= lam <= 1):
        raise ParameterError("lambda must lie in [1/2, 1]")
    if w < 0:
        raise ParameterError("w must be nonnegative")


def build_tournament(inst: MetricInstance, ties: TieDirectives | None, lam: Scalar, w: Scalar,
                     policy: str = "by-order",
                     explicit: dict[tuple[str, str], Sequence[tuple[int, int, Scalar]]] | None = None,
                     profile: OrdinalProfile | None = None) -> Tournament:
    check_params(lam, w)
    inst = inst.normalized()
    profile = profile or derive_profile(inst, ties)
    score, f, records = {}, {}, {}
    for x, y in profile.pairs():
        given = None
        if policy == "explicit":
            given = (explicit or {}).get((x, y))
            if given is None and (y, x) in (explicit or {}):
                given = [(v, u, m) for u, v, m in explicit[(y, x)]]
        mt = build_matching(profile, (x, y), policy, inst=inst, explicit=given)
        rec = deliberate(inst, mt, (x, y), ties)
        sxy, syx, fxy, fyx = pairwise_scores(profile, rec, w)
        score[(x, y)], score[(y, x)] = sxy, syx
        f[(x, y)], f[(y, x)] = fxy, fyx
        records[(x, y)] = rec
    return Tournament(inst.candidates, lam, w, score, f, records)


def tournament_from_weights(candidates: Sequence[str], f: dict[tuple[str, str], Scalar],
                            lam: Scalar, w: Scalar = ZERO) -> Tournament:
    """A bare tournament from given edge weights ``f(XY)``; the reverse edges are filled in."""
    full = dict(f)
    for (x, y), v in f.items():
        full.setdefault((y, x), 1 - v)
    return Tournament(tuple(candidates), lam, w, {}, full)


def wus_members(t: Tournament) -> list[str]:
    """Candidates in the lambda-weighted uncovered set, in candidate order."""
    lam = t.lam
    c = t.candidates
    out = []
    for x in c:
        ok = True
        for y in c:
            if y == x or t.f[(x, y)] >= 1 - lam:
                continue
            if not any(z not in (x, y) and t.f[(x, z)] >= 1 - lam and t.f[(z, y)] >= lam for z in c):
                ok = False
                break
        if ok:
            out.append(x)
    if not out:
        raise EmptyUncoveredSet(f"weighted uncovered set is empty at lambda={lam}")
    return out


def copeland_winner(t: Tournament) -> str:
    """Most beats, where X beats Y when ``f(XY) >= 1/2``; ties go to the lower index."""
    c = t.candidates
    beats = [sum(1 for y in c if y != x and t.f[(x, y)] >= HALF) for x in c]
    best = max(range(len(c)), key=lambda i: (beats[i], -i))
    return c[best]


@dataclass
class ProtocolResult:
    winner: str
    tournament: Tournament
    wus: list[str]
    optimum: str
    costs: dict[str, Scalar]
    distortion: Scalar | object

    def ratio(self, cand: str, ref: str) -> Scalar | object:
        return ratio(self.costs[cand], self.costs[ref])


def ratio(num: Scalar, den: Scalar):
    if den == 0:
        return Fraction(1) if num == 0 else UNBOUNDED
    return num / den


def run_protocol(inst: MetricInstance, ties: TieDirectives | None, lam: Scalar, w: Scalar,
                 policy: str = "by-order", explicit=None) -> ProtocolResult:
    """Run the protocol; the winner is the lowest-index member of the uncovered set."""
    inst = inst.normalized()
    t = build_tournament(inst, ties, lam, w, policy, explicit)
    members = wus_members(t)
    winner = members[0]
    costs = {c: social_cost(inst, c) for c in inst.candidates}
    opt = optimal_candidate(inst)
    return ProtocolResult(winner, t, members, opt, costs, ratio(costs[winner], costs[opt]))
