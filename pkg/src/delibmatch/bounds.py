"""Lower bounds on the distortion of the protocol for each (lambda, w).

Three instance families force A into the weighted uncovered set while B is
much cheaper.  Their sizes come from the permissible ranges of |AC| and
|CB|: the extreme support sizes compatible with f(AC) = 1 - lambda and
f(CB) = lambda.  D(lambda, w) is the largest of the three resulting ratios.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exactnum import Scalar, canonical_params, simplify, tau
from .instances import MetricInstance, TieDirectives, social_cost

HALF = Fraction(1, 2)
EXAMPLES = ("collinear", "colocated", "triangle")


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class RangeQuantities:
    lam: Scalar
    w: Scalar
    ac_min: Scalar
    ac_max: Scalar
    cb_min: Scalar
    cb_max: Scalar
    tau: Scalar
    eta: Scalar

    @property
    def low_w(self) -> bool:
        """True on the ``w <= tau(lambda)`` branch."""
        return self.w <= self.tau


def check_domain(lam: Scalar, w: Scalar) -> None:
    if not (HALF <= lam < 1):
        raise DomainError(f"lambda={lam} outside [1/2, 1)")
    if w < 0:
        raise DomainError(f"w={w} is negative")


def _low_branch(lam, w):
    cb_min = (lam - (1 - lam) * w) / (1 - (1 - lam) * w)
    ac_max = (1 - lam) / (1 - (1 - lam) * w)
    return cb_min, ac_max


def _high_branch(lam, w):
    cb_min = lam / (1 + (1 - lam) * w)
    ac_max = (1 - lam) * (1 + w) / (1 + (1 - lam) * w)
    return cb_min, ac_max


def permissible_ranges(lam: Scalar, w: Scalar) -> RangeQuantities:
    check_domain(lam, w)
    t = tau(lam)
    ac_min = (1 - lam) / (1 + lam * w)
    cb_max = lam * (1 + w) / (1 + lam * w)
    if w <= t:
        cb_min, ac_max = _low_branch(lam, w)
        if w == t:
            assert (cb_min, ac_max) == _high_branch(lam, w), "branches disagree at the threshold"
    else:
        cb_min, ac_max = _high_branch(lam, w)
    eta = 1 - cb_min - ac_min
    s = simplify
    return RangeQuantities(s(lam), s(w), s(ac_min), s(ac_max), s(cb_min), s(cb_max), s(t), s(eta))


def instance_collinear(lam: Scalar, w: Scalar) -> tuple[MetricInstance, TieDirectives]:
    """A=0, B=1, C=2 on a line; AC_max of the mass at B and CB_min at C."""
    r = permissible_ranges(lam, w)
    inst = MetricInstance.from_line({"A": 0, "B": 1, "C": 2},
                                    [("v_B", r.ac_max, 1), ("v_C", r.cb_min, 2)])
    ties = TieDirectives()
    ties.set_pref(0, "A", "C", "A")
    ties.set_delib(None, "C", "B", "C")
    return inst, ties


def instance_colocated(lam: Scalar, w: Scalar) -> tuple[MetricInstance, TieDirectives]:
    """A=0 and B=C=1; AC_min of the mass at A, the rest at B=C."""
    r = permissible_ranges(lam, w)
    inst = MetricInstance.from_line({"A": 0, "B": 1, "C": 1},
                                    [("v_A", r.ac_min, 0), ("v_BC", r.cb_max, 1)])
    ties = TieDirectives()
    ties.set_pref(None, "A", "C", "A")
    ties.set_delib(None, "A", "C", "A")
    # |CB| must reach CB_max, so the co-located voter ranks C above B
    ties.set_pref(1, "C", "B", "C")
    ties.set_pref(0, "C", "B", "B")
    ties.set_delib(None, "C", "B", "B")
    return inst, ties


TRIANGLE_TABLE = {
    "ACB": (1, 1, 1),
    "CBA": (3, 1, 1),
    "BAC": (2, 0, 2),
}


def instance_triangle(lam: Scalar, w: Scalar) -> tuple[MetricInstance, TieDirectives]:
    """Three clusters in the l1 plane with A=(0,0), B=(1,1), C=(2,0)."""
    r = permissible_ranges(lam, w)
    clusters = [("ACB", r.eta, (1, 0)), ("CBA", r.cb_min, (2, 1)), ("BAC", r.ac_min, (1, 1))]
    # eta vanishes at lambda = 1/2, w = 0; an empty cluster is left out
    inst = MetricInstance.from_l1_plane(
        {"A": (0, 0), "B": (1, 1), "C": (2, 0)}, [c for c in clusters if c[1] > 0],
    )
    for v in inst.voters:
        if tuple(v.dist) != TRIANGLE_TABLE[v.name]:
            raise AssertionError(f"embedding gives {v.dist} for {v.name}")
    ties = TieDirectives()
    for vi, v in enumerate(inst.voters):
        rank = v.name
        for i, x in enumerate(rank):
            for y in rank[i + 1:]:
                ties.set_pref(vi, x, y, x)
    return inst, ties


INSTANCE_BUILDERS = {
    "collinear": instance_collinear,
    "colocated": instance_colocated,
    "triangle": instance_triangle,
}


def example_distortion(i: int, lam: Scalar, w: Scalar) -> Scalar:
    """SC(A)/SC(B) evaluated directly on the generated instance."""
    inst, _ = INSTANCE_BUILDERS[EXAMPLES[i - 1]](lam, w)
    return simplify(social_cost(inst, "A") / social_cost(inst, "B"))


def closed_form_d(i: int, lam: Scalar, w: Scalar) -> Scalar:
    """Closed-form ratio for example ``i`` (1 collinear, 2 co-located, 3 triangle)."""
    check_domain(lam, w)
    low = w <= tau(lam)
    if i == 1:
        if low:
            val = (1 + lam - 2 * (1 - lam) * w) / (lam - (1 - lam) * w)
        else:
            val = (lam + 1 + (1 - lam) * w) / lam
    elif i == 2:
        val = lam * (1 + w) / (1 - lam)
    elif i == 3:
        if low:
            num = 2 + lam + (lam * lam + 6 * lam - 4) * w - 3 * lam * (1 - lam) * w * w
            den = lam * (1 + w) * (1 - (1 - lam) * w)
        else:
            num = 2 + lam + (3 * lam * lam - 2 * lam + 2) * w + (lam - lam * lam) * w * w
            den = lam * (1 + w) * (1 + (1 - lam) * w)
        val = num / den
    else:
        raise ValueError(f"no example {i}")
    return simplify(val)


def lower_bound_D(lam: Scalar, w: Scalar) -> Scalar:
    return max(closed_form_d(i, lam, w) for i in (1, 2, 3))


# --- float sweep ------------------------------------------------------------

def d_float(L: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Stack of (d1, d2, d3) evaluated elementwise; shape ``(3,) + L.shape``."""
    L = np.asarray(L, dtype=float)
    W = np.asarray(W, dtype=float)
    low = W <= (2 * L - 1) / (1 - L)
    d1 = np.where(low,
                  (1 + L - 2 * (1 - L) * W) / np.where(low, L - (1 - L) * W, 1.0),
                  (L + 1 + (1 - L) * W) / L)
    d2 = L * (1 + W) / (1 - L)
    d3_low = (2 + L + (L * L + 6 * L - 4) * W - 3 * L * (1 - L) * W * W) / (
        L * (1 + W) * np.where(low, 1 - (1 - L) * W, 1.0))
    d3_high = (2 + L + (3 * L * L - 2 * L + 2) * W + (L - L * L) * W * W) / (
        L * (1 + W) * (1 + (1 - L) * W))
    d3 = np.where(low, d3_low, d3_high)
    return np.stack([d1, d2, d3])


def grid_axes(lam_range=(0.5, 0.7), w_range=(0.0, 1.25), steps=(200, 200),
              include_optimum: bool = True) -> tuple[np.ndarray, np.ndarray]:
    lams = np.linspace(lam_range[0], lam_range[1], steps[0])
    ws = np.linspace(w_range[0], w_range[1], steps[1])
    if include_optimum:
        ls, ws_ = (float(v) for v in canonical_params())
        if lam_range[0] <= ls <= lam_range[1]:
            lams = np.unique(np.append(lams, ls))
        if w_range[0] <= ws_ <= w_range[1]:
            ws = np.unique(np.append(ws, ws_))
    return lams, ws


@dataclass
class Heatmap:
    lams: np.ndarray
    ws: np.ndarray
    d: np.ndarray  # shape (3, len(lams), len(ws))

    @property
    def D(self) -> np.ndarray:
        return self.d.max(axis=0)

    @property
    def argmax(self) -> np.ndarray:
        """1-based index of the binding example per cell."""
        return self.d.argmax(axis=0) + 1

    def argmin(self) -> tuple[float, float, float]:
        D = self.D
        i, j = np.unravel_index(np.argmin(D), D.shape)
        return float(self.lams[i]), float(self.ws[j]), float(D[i, j])

    def rows(self):
        D, am = self.D, self.argmax
        for i, lam in enumerate(self.lams):
            for j, w in enumerate(self.ws):
                yield (float(lam), float(w), float(self.d[0, i, j]), float(self.d[1, i, j]),
                       float(self.d[2, i, j]), float(D[i, j]), int(am[i, j]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(HEATMAP_COLUMNS)
        for row in self.rows():
            wr.writerow([repr(v) if isinstance(v, float) else v for v in row])
        return buf.getvalue()


HEATMAP_COLUMNS = ("lambda", "w", "d1", "d2", "d3", "D", "argmax")


def heatmap(lam_range=(0.5, 0.7), w_range=(0.0, 1.25), steps=(200, 200),
            include_optimum: bool = True, jobs: int = 1) -> Heatmap:
    """Evaluate d1, d2, d3 and D over a grid.  The lambda axis must stay below 1."""
    if not (0.5 <= lam_range[0] <= lam_range[1] < 1) or w_range[0] < 0 or w_range[1] < w_range[0]:
        raise DomainError("heatmap grid must lie in [1/2, 1) x [0, inf)")
    lams, ws = grid_axes(lam_range, w_range, steps, include_optimum)
    if jobs > 1 and len(lams) > 1:
        from concurrent.futures import ThreadPoolExecutor

        chunks = np.array_split(lams, jobs)
        with ThreadPoolExecutor(jobs) as ex:
            parts = list(ex.map(lambda c: d_float(*np.meshgrid(c, ws, indexing="ij")), chunks))
        d = np.concatenate(parts, axis=1)
    else:
        L, W = np.meshgrid(lams, ws, indexing="ij")
        d = d_float(L, W)
    return Heatmap(lams, ws, d)


def parse_point(text: str) -> tuple[Scalar, Scalar]:
    from .exactnum import parse_scalar

    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"expected 'lambda,w', got {text!r}")
    return parse_scalar(parts[0]), parse_scalar(parts[1])


def summary_lines(lam: Scalar, w: Scalar) -> Sequence[tuple[str, Scalar]]:
    r = permissible_ranges(lam, w)
    ds = [closed_form_d(i, lam, w) for i in (1, 2, 3)]
    return [("ac_min", r.ac_min), ("ac_max", r.ac_max), ("cb_min", r.cb_min),
            ("cb_max", r.cb_max), ("tau", r.tau), ("eta", r.eta),
            ("d1", ds[0]), ("d2", ds[1]), ("d3", ds[2]), ("D", max(ds))]
