"""Command-line entry point.

Subcommands::

    run         run the protocol on an instance file
    oracle      worst-case distortion over metrics consistent with an instance's observations
    certify     rebuild and check the case LPs and their dual multipliers
    bounds      lower-bound instances, closed forms and the (lambda, w) heatmap
    montecarlo  random-instance distortion harness
    validate    check an instance file for metric violations

Exit codes: 0 success, 1 validation found violations, 2 missing file or
unparsable input, 3 parameter outside its domain, 4 any other module error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import bounds as bd
from . import certify as ct
from .exactnum import Scalar, canonical_params, format_scalar, parse_scalar, simplify
from .instances import (
    UNBOUNDED,
    InstanceError,
    MetricInstance,
    TieDirectives,
    derive_profile,
    dump_instance,
    instance_from_dict,
    validate_metric,
)
from .oracle import worst_case_distortion
from .protocol import (
    POLICIES,
    ParameterError,
    build_tournament,
    check_params,
    ratio,
    run_protocol,
)

EXIT_OK, EXIT_INVALID, EXIT_INPUT, EXIT_DOMAIN, EXIT_MODULE = 0, 1, 2, 3, 4

RUN_CSV_COLUMNS = ("x", "y", "score_xy", "score_yx", "f_xy", "f_xy_float", "W_xy")
MC_BATCH = 500


class ParseError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    instance: str | None = None
    lam: Scalar = Fraction(1, 2)
    w: Scalar = Fraction(1)
    policy: str = "by-order"
    select: str = "min-index"
    fmt: str = "text"
    seed: int = 0
    jobs: int = 1
    extra: argparse.Namespace | None = None


def _scalar_arg(text: str) -> Scalar:
    try:
        return parse_scalar(text)
    except (ValueError, ZeroDivisionError) as e:
        raise ParseError(f"cannot parse scalar {text!r}") from e


def show(x) -> str:
    """Exact text plus a float approximation."""
    if x is UNBOUNDED:
        return "UNBOUNDED"
    x = simplify(x)
    exact = format_scalar(x)
    approx = f"{float(x):.12g}"
    return exact if exact == approx else f"{exact} (~{approx})"


# --- run / oracle / validate ------------------------------------------------

def _load(path: str) -> tuple[MetricInstance, TieDirectives, dict]:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"no such instance file: {path}")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: {e}") from e
    try:
        inst, ties = instance_from_dict(data)
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, InstanceError):
            raise
        raise ParseError(f"{path}: {e}") from e
    return inst, ties, data


def _explicit_matchings(inst: MetricInstance, data: dict):
    out = {}
    for key, triples in (data.get("matchings") or {}).items():
        x, y = (s.strip() for s in key.split(","))
        out[(x, y)] = [(inst.voter_index(u), inst.voter_index(v), parse_scalar(str(m))) for u, v, m in triples]
    return out


def cmd_run(cfg: RunConfig, out) -> int:
    inst, ties, data = _load(cfg.instance)
    explicit = _explicit_matchings(inst, data) if cfg.policy == "explicit" else None
    res = run_protocol(inst, ties, cfg.lam, cfg.w, cfg.policy, explicit)
    t = res.tournament
    if cfg.fmt == "csv":
        print(",".join(RUN_CSV_COLUMNS), file=out)
        for (x, y), rec in t.records.items():
            print(",".join([x, y, format_scalar(simplify(t.score[(x, y)])), format_scalar(simplify(t.score[(y, x)])),
                            format_scalar(simplify(t.f[(x, y)])), repr(float(t.f[(x, y)])),
                            format_scalar(simplify(rec.W(x)))]), file=out)
        return EXIT_OK
    print(f"lambda = {show(cfg.lam)}  w = {show(cfg.w)}  policy = {cfg.policy}", file=out)
    for (x, y), rec in t.records.items():
        print(f"pair {x}{y}: score({x}{y}) = {show(t.score[(x, y)])}  score({y}{x}) = {show(t.score[(y, x)])}  "
              f"W_{x}{y} = {show(rec.W(x))}  W_{y}{x} = {show(rec.W(y))}", file=out)
        print(f"  f({x}{y}) = {show(t.f[(x, y)])}  f({y}{x}) = {show(t.f[(y, x)])}", file=out)
    print(f"WUS = {{{', '.join(res.wus)}}}", file=out)
    for c in inst.candidates:
        print(f"SC({c}) = {show(res.costs[c])}", file=out)
    print(f"optimum = {res.optimum}", file=out)
    chosen = res.wus if cfg.select == "all" else [res.winner]
    for c in chosen:
        print(f"winner = {c}  distortion = {show(ratio(res.costs[c], res.costs[res.optimum]))}", file=out)
        if cfg.extra is not None and cfg.extra.ref:
            ref = cfg.extra.ref
            print(f"  SC({c})/SC({ref}) = {show(res.ratio(c, ref))}", file=out)
    return EXIT_OK


def cmd_oracle(cfg: RunConfig, out) -> int:
    inst, ties, data = _load(cfg.instance)
    a = cfg.extra
    explicit = _explicit_matchings(inst, data) if cfg.policy == "explicit" else None
    inst = inst.normalized()
    for c in (a.winner, a.ref):
        inst.index(c)
    prof = derive_profile(inst, ties)
    t = build_tournament(inst, ties, cfg.lam, cfg.w, cfg.policy, explicit, profile=prof)
    res = worst_case_distortion(prof, t.records, a.winner, a.ref, with_witness=True)
    print(f"worst-case SC({a.winner})/SC({a.ref}) = {show(res.ratio)}", file=out)
    if a.witness and res.witness:
        for k, v in sorted(res.witness.items()):
            print(f"  {k} = {show(v)}", file=out)
    return EXIT_OK


def cmd_validate(cfg: RunConfig, out) -> int:
    inst, _, _ = _load(cfg.instance)
    bad = validate_metric(inst)
    for v in bad:
        print(str(v), file=out)
    print("valid" if not bad else f"{len(bad)} violation(s)", file=out)
    return EXIT_OK if not bad else EXIT_INVALID


# --- certify ----------------------------------------------------------------

def cmd_certify(cfg: RunConfig, out) -> int:
    a = cfg.extra
    cases = (1, 2) if a.case == "all" else (int(a.case),)
    R = a.R
    t0 = time.perf_counter()
    for c in cases:
        for v in ct.polytope_vertices(c):
            res = ct.certify_vertex(c, v, R)
            vs = "(" + ", ".join(format_scalar(x) for x in v) + ")"
            opt = "-inf (unbounded)" if res.lp_optimum is ct.NEG_UNBOUNDED else format_scalar(res.lp_optimum)
            dual = "dual OK" if res.dual_ok else "no certificate at this R"
            print(f"case {c} vertex {vs}: optimum {opt} / {dual}", file=out)
            if a.audit:
                for line in ct.audit_table(res):
                    print("    " + line, file=out)
    if a.minimal_R:
        for c in cases:
            lo, hi = ct.minimal_R(c)
            print(f"case {c}: minimal R in ({format_scalar(lo)}, {format_scalar(hi)}]", file=out)
    print(f"elapsed {time.perf_counter() - t0:.2f}s", file=out)
    return EXIT_OK


# --- bounds -----------------------------------------------------------------

def _range_arg(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(parse_scalar(s)) for s in text.split(","))
    except ValueError as e:
        raise ParseError(f"expected 'lo,hi', got {text!r}") from e
    return lo, hi


def cmd_bounds(cfg: RunConfig, out) -> int:
    a = cfg.extra
    if a.at:
        try:
            lam, w = bd.parse_point(a.at)
        except ValueError as e:
            raise ParseError(str(e)) from e
        for name, val in bd.summary_lines(lam, w):
            print(f"{name} = {show(val)}", file=out)
        return EXIT_OK
    if a.example:
        lam, w = cfg.lam, cfg.w
        inst, ties = bd.INSTANCE_BUILDERS[a.example](lam, w)
        i = bd.EXAMPLES.index(a.example) + 1
        text = dump_instance(inst, ties, closed_form=format_scalar(bd.closed_form_d(i, lam, w)),
                             reference="B", params={"lambda": format_scalar(lam), "w": format_scalar(w)})
        if a.output:
            Path(a.output).write_text(text + "\n", encoding="utf-8")
        else:
            print(text, file=out)
        return EXIT_OK
    if a.heatmap:
        steps = (a.steps, a.steps)
        h = bd.heatmap(_range_arg(a.lam_range), _range_arg(a.w_range), steps, jobs=cfg.jobs)
        text = h.to_csv()
        if a.output:
            Path(a.output).write_text(text, encoding="utf-8")
        else:
            out.write(text)
        lam, w, D = h.argmin()
        print(f"# grid argmin lambda={lam!r} w={w!r} D={D!r}", file=sys.stderr)
        return EXIT_OK
    raise ParseError("bounds needs one of --at, --example or --heatmap")


# --- Monte Carlo ------------------------------------------------------------

CANDIDATE_NAMES = "ABCDEFGH"


def random_instance(rng: random.Random, m: int, sampler: str = "line") -> tuple[MetricInstance, TieDirectives]:
    """A random instance with integer coordinates and integer voter masses."""
    cands = CANDIDATE_NAMES[:m]
    n = rng.randint(1, 7)
    if sampler == "line":
        pos = {c: rng.randint(-10, 10) for c in cands}
        voters = [(f"v{i}", rng.randint(1, 5), rng.randint(-12, 12)) for i in range(n)]
        inst = MetricInstance.from_line(pos, voters)
    elif sampler == "l1":
        pos = {c: (rng.randint(-5, 5), rng.randint(-5, 5)) for c in cands}
        voters = [(f"v{i}", rng.randint(1, 5), (rng.randint(-6, 6), rng.randint(-6, 6))) for i in range(n)]
        inst = MetricInstance.from_l1_plane(pos, voters)
    elif sampler == "tight2":
        if m != 2:
            raise ParseError("the tight2 sampler is for two candidates")
        eps = Fraction(rng.randint(1, 1000), 10 ** rng.randint(3, 6))
        voters = [("a1", 1, -eps), ("a2", 1, -eps * Fraction(rng.randint(1, 9), 10)), ("b", 1, 1)]
        inst = MetricInstance.from_line({"A": -1, "B": 1}, voters)
    else:
        raise ParseError(f"unknown sampler {sampler!r}")
    return inst, TieDirectives()


def _batch(args) -> tuple[Scalar, int, str | None, int]:
    seed, batch, count, m, sampler, lam_t, w_t, select = args
    lam, w = parse_scalar(lam_t), parse_scalar(w_t)
    rng = random.Random(f"{seed}:{batch}")
    worst: Scalar = Fraction(0)
    worst_dump = None
    unbounded = 0
    for _ in range(count):
        inst, ties = random_instance(rng, m, sampler)
        res = run_protocol(inst, ties, lam, w)
        members = res.wus if select == "all" else [res.winner]
        for c in members:
            d = ratio(res.costs[c], res.costs[res.optimum])
            if d is UNBOUNDED:
                unbounded += 1
                continue
            if d > worst:
                worst = d
                worst_dump = dump_instance(inst, ties, winner=c, distortion=format_scalar(simplify(d)))
    return worst, unbounded, worst_dump, count


@dataclass
class MonteCarloSummary:
    samples: int
    max_distortion: Scalar
    unbounded: int
    argmax_instance: str | None
    seconds: float


def run_montecarlo(m: int, samples: int, seed: int, lam: Scalar, w: Scalar, sampler: str = "line",
                   select: str = "all", jobs: int = 1) -> MonteCarloSummary:
    """Deterministic in ``seed``: batches draw from their own seeded generators, so ``jobs`` never changes results."""
    check_params(lam, w)
    t0 = time.perf_counter()
    tasks = []
    for b, start in enumerate(range(0, samples, MC_BATCH)):
        tasks.append((seed, b, min(MC_BATCH, samples - start), m, sampler,
                      format_scalar(lam), format_scalar(w), select))
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            parts = list(ex.map(_batch, tasks))
    else:
        parts = [_batch(t) for t in tasks]
    worst, dump, unb = Fraction(0), None, 0
    for d, u, text, _ in parts:
        unb += u
        if d > worst:
            worst, dump = d, text
    return MonteCarloSummary(samples, simplify(worst), unb, dump, time.perf_counter() - t0)


def cmd_montecarlo(cfg: RunConfig, out) -> int:
    a = cfg.extra
    if a.m < 2:
        raise ParseError("need at least two candidates")
    s = run_montecarlo(a.m, a.samples, cfg.seed, cfg.lam, cfg.w, a.sampler, cfg.select, cfg.jobs)
    if cfg.fmt == "csv":
        print("m,samples,seed,lambda,w,max_distortion,max_distortion_float,unbounded", file=out)
        print(f"{a.m},{s.samples},{cfg.seed},{format_scalar(cfg.lam)},{format_scalar(cfg.w)},"
              f"{format_scalar(s.max_distortion)},{float(s.max_distortion)!r},{s.unbounded}", file=out)
    else:
        print(f"m = {a.m}  samples = {s.samples}  seed = {cfg.seed}  sampler = {a.sampler}", file=out)
        print(f"lambda = {show(cfg.lam)}  w = {show(cfg.w)}", file=out)
        print(f"max distortion = {show(s.max_distortion)}", file=out)
        print(f"unbounded cases = {s.unbounded}", file=out)
        print(f"elapsed {s.seconds:.2f}s", file=out)
        if a.dump and s.argmax_instance:
            print(s.argmax_instance, file=out)
    return EXIT_OK


# --- wiring -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="delibmatch", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def params(sp, lam="1/2", w="1"):
        sp.add_argument("--lambda", dest="lam", default=lam, help=f"exact scalar (default {lam})")
        sp.add_argument("--w", default=w, help=f"exact scalar (default {w})")

    def policy(sp):
        sp.add_argument("--policy", choices=POLICIES, default="by-order")

    sp = sub.add_parser("run", help="run the protocol on an instance")
    sp.add_argument("instance")
    params(sp)
    policy(sp)
    sp.add_argument("--select", choices=("min-index", "all"), default="min-index")
    sp.add_argument("--format", dest="fmt", choices=("text", "csv"), default="text")
    sp.add_argument("--ref", help="also report SC(winner)/SC(REF)")

    sp = sub.add_parser("oracle", help="worst-case distortion over consistent metrics")
    sp.add_argument("instance")
    sp.add_argument("--winner", required=True)
    sp.add_argument("--ref", required=True)
    params(sp)
    policy(sp)
    sp.add_argument("--witness", action="store_true", help="print the maximizing distances")

    sp = sub.add_parser("certify", help="check the case LPs and dual multipliers")
    sp.add_argument("--case", choices=("1", "2", "all"), default="all")
    sp.add_argument("--R", type=_scalar_arg, default=Fraction(2))
    sp.add_argument("--audit", action="store_true", help="print the multiplier table")
    sp.add_argument("--minimal-R", action="store_true", help="bisect for the smallest certified R")

    sp = sub.add_parser("bounds", help="lower-bound instances and closed forms")
    params(sp, "lambda*", "w*")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--example", choices=bd.EXAMPLES)
    g.add_argument("--heatmap", action="store_true")
    g.add_argument("--at", metavar="LAMBDA,W")
    sp.add_argument("--steps", type=int, default=200)
    sp.add_argument("--lam-range", default="0.5,0.7")
    sp.add_argument("--w-range", default="0,1.25")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("-o", "--output")

    sp = sub.add_parser("montecarlo", help="random-instance distortion harness")
    sp.add_argument("--m", type=int, default=2)
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--sampler", choices=("line", "l1", "tight2"), default="line")
    params(sp)
    sp.add_argument("--select", choices=("min-index", "all"), default="all",
                    help="score the lowest-index member or every member of the uncovered set")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--format", dest="fmt", choices=("text", "csv"), default="text")
    sp.add_argument("--dump", action="store_true", help="print the worst instance found")

    sp = sub.add_parser("validate", help="check an instance for metric violations")
    sp.add_argument("instance")
    return p


def make_config(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(ns.command, extra=ns)
    cfg.instance = getattr(ns, "instance", None)
    cfg.policy = getattr(ns, "policy", "by-order")
    cfg.select = getattr(ns, "select", "min-index")
    cfg.fmt = getattr(ns, "fmt", "text")
    cfg.seed = getattr(ns, "seed", 0)
    cfg.jobs = getattr(ns, "jobs", 1)
    if hasattr(ns, "lam"):
        cfg.lam, cfg.w = _scalar_arg(ns.lam), _scalar_arg(ns.w)
        if ns.command == "bounds":
            bd.check_domain(cfg.lam, cfg.w)
        else:
            check_params(cfg.lam, cfg.w)
    return cfg


COMMANDS = {
    "run": cmd_run,
    "oracle": cmd_oracle,
    "certify": cmd_certify,
    "bounds": cmd_bounds,
    "montecarlo": cmd_montecarlo,
    "validate": cmd_validate,
}


def cmd_dispatch(cfg: RunConfig, out=None) -> int:
    return COMMANDS[cfg.command](cfg, out or sys.stdout)


def _fail(code: int, kind: str, msg) -> int:
    print(f"error[{kind}]: {msg}", file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return cmd_dispatch(make_config(ns))
    except FileNotFoundError as e:
        return _fail(EXIT_INPUT, "FileNotFound", e)
    except (ParseError, json.JSONDecodeError) as e:
        return _fail(EXIT_INPUT, "ParseError", e)
    except (bd.DomainError, ParameterError) as e:
        return _fail(EXIT_DOMAIN, type(e).__name__, e)
    except (InstanceError, ValueError, ArithmeticError, RuntimeError, AssertionError) as e:
        return _fail(EXIT_MODULE, type(e).__name__, e)


if __name__ == "__main__":
    sys.exit(main())
