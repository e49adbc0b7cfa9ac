from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from delibmatch.bounds import instance_collinear, instance_colocated, instance_triangle
from delibmatch.exactnum import Q3, canonical_params
from delibmatch.instances import MetricInstance, derive_profile, split_block
from delibmatch.protocol import (
    EmptyUncoveredSet, InfeasibleExplicitMatching, ParameterError, build_matching, build_tournament,
    copeland_winner, deliberate, pairwise_scores, run_protocol, tournament_from_weights, wus_members,
)

from conftest import four_instance, two_instance_x
from oracles import float_tournament

F = Fraction
HALF = F(1, 2)


def record(inst, ties, pair, policy="by-order"):
    inst = inst.normalized()
    prof = derive_profile(inst, ties)
    mt = build_matching(prof, pair, policy, inst=inst)
    return prof, deliberate(inst, mt, pair, ties)


def test_empty_side_gives_empty_matching():
    inst = MetricInstance.from_line({"A": 0, "B": 4}, [("v", 1, 0), ("u", 1, 1)])
    prof = derive_profile(inst)
    mt = build_matching(prof, ("B", "A"))
    assert mt.triples == [] and mt.size == 0


def test_four_instance_ac_matching():
    inst, ties = four_instance()
    prof = derive_profile(inst, ties)
    mt = build_matching(prof, ("A", "C"))
    assert mt.triples == [(0, 2, F(1, 3))]
    assert mt.unmatched == {1: F(1, 3)}


def test_collinear_ac_matching_at_optimum(star):
    inst, ties = instance_collinear(*star)
    prof = derive_profile(inst, ties)
    assert build_matching(prof, ("A", "C")).triples == [(0, 1, HALF)]


def test_four_instance_ac_deliberation():
    inst, ties = four_instance()
    _, rec = record(inst, ties, ("A", "C"))
    assert rec.outcomes == ["C"]
    assert rec.W("A") == 0 and rec.W("C") == F(1, 3)


def test_equidistant_pair_goes_to_lower_index():
    inst = MetricInstance.from_line({"A": -1, "B": 1}, [("u", 1, -1), ("v", 1, 1)])
    _, rec = record(inst, None, ("A", "B"))
    assert rec.outcomes == ["A"]


def test_collinear_cb_tie_goes_to_c(star):
    inst, ties = instance_collinear(*star)
    _, rec = record(inst, ties, ("C", "B"))
    assert rec.outcomes == ["C"]
    assert rec.W("C") == HALF


def test_scores_four_instance():
    inst, ties = four_instance()
    prof, rec = record(inst, ties, ("A", "C"))
    assert pairwise_scores(prof, rec, 1) == (F(2, 3), F(2, 3), HALF, HALF)


def test_zero_weight_is_plain_majority():
    inst, ties = four_instance()
    prof, rec = record(inst, ties, ("A", "C"))
    assert pairwise_scores(prof, rec, 0)[2] == prof.support("A", "C")


def test_collinear_score_at_optimum(star):
    lam, w = star
    inst, ties = instance_collinear(lam, w)
    prof, rec = record(inst, ties, ("A", "C"))
    f = pairwise_scores(prof, rec, w)[2]
    assert f == Q3(F(-1, 2), F(1, 2))
    assert f == 1 - lam


def test_four_instance_tournament():
    inst, ties = four_instance()
    t = build_tournament(inst, ties, HALF, 1)
    assert t.f[("A", "C")] == HALF and t.f[("C", "B")] == HALF
    assert t.f[("B", "A")] == 1


def test_two_candidates_single_pair():
    inst, ties = two_instance_x()
    t = build_tournament(inst, ties, HALF, 1)
    assert list(t.records) == [("A", "B")]


def test_triangle_tournament_at_optimum(star):
    lam, w = star
    inst, ties = instance_triangle(lam, w)
    t = build_tournament(inst, ties, lam, w)
    assert t.f[("A", "C")] == 1 - lam
    assert t.f[("C", "B")] == lam


def test_wus_examples(star):
    inst, ties = four_instance()
    assert "A" in wus_members(build_tournament(inst, ties, HALF, 1))
    assert wus_members(tournament_from_weights("AB", {("A", "B"): F(1)}, HALF)) == ["A"]
    inst, ties = instance_colocated(*star)
    assert "A" in wus_members(build_tournament(inst, ties, *star))


def test_wus_empty_signals_bug():
    # lambda outside the supported range can empty the set
    f = {("A", "B"): F(1, 10), ("B", "C"): F(1, 10), ("C", "A"): F(1, 10)}
    with pytest.raises(EmptyUncoveredSet):
        wus_members(tournament_from_weights("ABC", f, F(1, 20)))


def test_copeland_examples():
    assert copeland_winner(tournament_from_weights("AB", {("A", "B"): F(7, 10)}, HALF)) == "A"
    inst, ties = two_instance_x()
    t = build_tournament(inst, ties, HALF, 1)
    assert t.f[("A", "B")] == HALF
    assert copeland_winner(t) == "A"
    inst, ties = four_instance()
    assert copeland_winner(build_tournament(inst, ties, HALF, 1)) == "B"


def test_run_protocol_four():
    inst, ties = four_instance()
    res = run_protocol(inst, ties, HALF, 1)
    assert res.winner == "A" and res.distortion == 4


def test_run_protocol_everyone_colocated():
    inst = MetricInstance.from_line({"A": 0, "B": 0}, [("v", 1, 0)])
    assert run_protocol(inst, None, HALF, 1).distortion == 1


def test_run_protocol_collinear(star):
    inst, ties = instance_collinear(*star)
    res = run_protocol(inst, ties, *star)
    assert res.winner == "A" and res.distortion == 3


def test_parameter_checks():
    inst, ties = four_instance()
    with pytest.raises(ParameterError):
        build_tournament(inst, ties, F(2, 5), 1)
    with pytest.raises(ParameterError):
        build_tournament(inst, ties, HALF, -1)


def test_explicit_matching():
    inst, ties = four_instance()
    t = build_tournament(inst, ties, HALF, 1, "explicit",
                         {("A", "C"): [(1, 2, F(1, 3))], ("A", "B"): [], ("B", "C"): [(0, 2, F(1, 3))]})
    assert t.f[("A", "C")] == HALF
    prof = derive_profile(inst.normalized(), ties)
    with pytest.raises(InfeasibleExplicitMatching):
        build_matching(prof, ("A", "C"), "explicit", explicit=[(0, 2, F(1, 6))])
    with pytest.raises(InfeasibleExplicitMatching):
        build_matching(prof, ("A", "C"), "explicit", explicit=[(2, 0, F(1, 3))])
    with pytest.raises(InfeasibleExplicitMatching):
        build_matching(prof, ("A", "C"), "explicit", explicit=[(0, 2, F(1, 3)), (0, 2, F(1, 3))])


def test_counter_monotone_sorts_by_relative_preference():
    inst = MetricInstance.from_line({"A": 0, "B": 10},
                                    [("a", 1, 4), ("b", 1, 1), ("c", 1, 9), ("d", 1, 6)])
    inst = inst.normalized()
    prof = derive_profile(inst)
    mt = build_matching(prof, ("A", "B"), "counter-monotone", inst=inst)
    # A-side: b (t=8) before a (t=2); B-side: c (t=-8) before d (t=-2)
    assert [(u, v) for u, v, _ in mt.triples] == [(1, 2), (0, 3)]


# --- properties -------------------------------------------------------------

voters = st.lists(st.tuples(st.integers(1, 4), st.integers(-8, 8)), min_size=1, max_size=6)
cands = st.lists(st.integers(-6, 6), min_size=2, max_size=4)
lams = st.one_of(st.sampled_from([HALF, F(55, 100), canonical_params()[0], F(7, 10), F(1)]),
                 st.fractions(min_value=HALF, max_value=1, max_denominator=50))
ws = st.one_of(st.just(canonical_params()[1]), st.fractions(min_value=0, max_value=3, max_denominator=20))


def line(cs, vs):
    return MetricInstance.from_line(dict(zip("ABCD", cs)), [(f"v{i}", m, x) for i, (m, x) in enumerate(vs)])


@settings(max_examples=1000, deadline=None)
@given(cands, voters, lams, ws, st.sampled_from(["by-order", "counter-monotone"]))
def test_edges_are_complementary_and_wus_nonempty(cs, vs, lam, w, policy):
    inst = line(cs, vs)
    t = build_tournament(inst, None, lam, w, policy)
    prof = derive_profile(inst.normalized())
    for (x, y), rec in t.records.items():
        assert t.f[(x, y)] + t.f[(y, x)] == 1
        m = min(prof.support(x, y), prof.support(y, x))
        assert rec.W(x) + rec.W(y) == m == rec.matching.size
        assert t.score[(x, y)] + t.score[(y, x)] == 1 + w * m
        sides = {prof.supporters(x, y), prof.supporters(y, x)}
        assert any(set(rec.matching.unmatched) <= set(s) for s in sides)
    assert wus_members(t)


@settings(max_examples=300, deadline=None)
@given(cands, voters)
def test_zero_weight_copeland_is_classical(cs, vs):
    inst = line(cs, vs)
    t = build_tournament(inst, None, HALF, 0)
    names = inst.candidates
    total = sum(m for m, _ in vs)
    pos = dict(zip(names, cs))
    beats = {}
    for x in names:
        beats[x] = 0
        for y in names:
            if x == y:
                continue
            xi, yi = names.index(x), names.index(y)
            sup = sum(m for m, p in vs if abs(p - pos[x]) < abs(p - pos[y]) or (abs(p - pos[x]) == abs(p - pos[y]) and xi < yi))
            beats[x] += 2 * sup >= total
    best = max(names, key=lambda c: (beats[c], -names.index(c)))
    assert copeland_winner(t) == best


@settings(max_examples=300, deadline=None)
@given(cands, voters, st.integers(0, 5), st.integers(1, 9), ws)
def test_mass_split_invariance(cs, vs, idx, k, w):
    inst = line(cs, vs)
    idx %= len(vs)
    split = split_block(inst, idx, [F(k, 10), 1 - F(k, 10)])
    a = build_tournament(inst, None, HALF, w)
    b = build_tournament(split, None, HALF, w)
    assert a.f == b.f


@settings(max_examples=300, deadline=None)
@given(cands, st.lists(st.integers(-8, 8), min_size=1, max_size=6), st.sampled_from([0, 1, 2]))
def test_matches_float_reference(cs, xs, w):
    inst = line(cs, [(1, x) for x in xs])
    t = build_tournament(inst, None, HALF, w)
    ref = float_tournament(dict(zip(inst.candidates, cs)), xs, w)
    for k, v in ref.items():
        assert float(t.f[k]) == pytest.approx(v, abs=1e-12)


@pytest.mark.parametrize("builder", [instance_collinear, instance_colocated, instance_triangle])
def test_examples_are_matching_robust(builder, star):
    inst, ties = builder(*star)
    a = build_tournament(inst, ties, *star, "by-order")
    b = build_tournament(inst, ties, *star, "counter-monotone")
    assert a.f == b.f
