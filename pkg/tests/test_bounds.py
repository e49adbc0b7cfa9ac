from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from delibmatch.bounds import (
    EXAMPLES, HEATMAP_COLUMNS, INSTANCE_BUILDERS, DomainError, closed_form_d, d_float,
    example_distortion, heatmap, lower_bound_D, permissible_ranges,
)
from delibmatch.exactnum import Q3, to_float
from delibmatch.instances import social_cost
from delibmatch.protocol import run_protocol

from oracles import float_D, float_ranges

F = Fraction
lams = st.fractions(min_value=F(1, 2), max_value=F(49, 50), max_denominator=50)
ws = st.fractions(min_value=0, max_value=3, max_denominator=20)


def test_ranges_at_optimum(star):
    lam, w = star
    r = permissible_ranges(lam, w)
    assert (r.ac_min, r.ac_max, r.cb_min, r.cb_max, r.eta) == (F(1, 4), F(1, 2), F(1, 2), F(3, 4), F(1, 4))
    assert r.tau == w and isinstance(r.tau, Q3)


def test_range_identities_on_grid():
    for lam in (F(1, 2) + F(i, 100) for i in range(0, 50)):
        for w in (F(j, 20) for j in range(0, 50)):
            r = permissible_ranges(lam, w)
            assert r.ac_max + r.cb_min == 1 and r.ac_min + r.cb_max == 1
            assert 0 < r.ac_min <= r.ac_max and 0 < r.cb_min <= r.cb_max
            assert r.eta >= 0


@settings(max_examples=60, deadline=None)
@given(lams, ws)
def test_instances_hit_the_ranges_and_closed_forms(lam, w):
    for i, name in enumerate(EXAMPLES, 1):
        inst, ties = INSTANCE_BUILDERS[name](lam, w)
        res = run_protocol(inst, ties, lam, w)
        f = res.tournament.f
        assert f[("A", "C")] == 1 - lam and f[("C", "B")] == lam
        assert "A" in res.wus and res.winner == "A"
        assert social_cost(inst, "A") / social_cost(inst, "B") == closed_form_d(i, lam, w)
        assert example_distortion(i, lam, w) == closed_form_d(i, lam, w)


@settings(max_examples=300, deadline=None)
@given(lams, ws)
def test_closed_forms_match_float_oracle(lam, w):
    exact = [float(closed_form_d(i, lam, w)) for i in (1, 2, 3)]
    approx = float_D(float(lam), float(w))
    assert np.allclose(exact, approx, rtol=1e-9)
    r = permissible_ranges(lam, w)
    assert np.allclose([float(r.ac_min), float(r.ac_max), float(r.cb_min), float(r.cb_max)],
                       float_ranges(float(lam), float(w)), rtol=1e-9)
    assert np.allclose(d_float(np.array(float(lam)), np.array(float(w))), exact, rtol=1e-12)


def test_tight_at_optimum(star):
    lam, w = star
    assert [closed_form_d(i, lam, w) for i in (1, 2, 3)] == [3, 3, 3]
    assert lower_bound_D(lam, w) == 3


def test_off_optimum_value():
    assert lower_bound_D(F(51, 100), F(1, 100)) == F(250312603, 51257601)
    assert lower_bound_D(F(51, 100), F(1, 100)) > 3


def test_heatmap_shape_and_minimum(star):
    hm = heatmap(steps=(40, 30))
    assert hm.d.shape == (3, 41, 31)
    lam, w, d = hm.argmin()
    assert (lam, w) == (to_float(star[0]), to_float(star[1]))
    assert abs(d - 3) < 1e-9 and hm.D.min() >= 3 - 1e-12
    rows = list(hm.rows())
    assert len(rows) == 41 * 31 and all(r[5] == max(r[2:5]) for r in rows)
    assert hm.to_csv().splitlines()[0] == ",".join(HEATMAP_COLUMNS)


def test_heatmap_jobs_agree():
    a = heatmap(steps=(30, 30))
    b = heatmap(steps=(30, 30), jobs=4)
    assert np.array_equal(a.d, b.d)


def test_single_point_grid():
    hm = heatmap(lam_range=(0.6, 0.6), w_range=(0.5, 0.5), steps=(1, 1), include_optimum=False)
    assert hm.d.shape == (3, 1, 1)
    assert hm.D[0, 0] == pytest.approx(float(lower_bound_D(F(3, 5), F(1, 2))))


@pytest.mark.parametrize("lam,w", [(F(2, 5), F(1)), (F(1), F(1)), (F(3, 5), F(-1))])
def test_domain_errors(lam, w):
    with pytest.raises(DomainError):
        permissible_ranges(lam, w)
    with pytest.raises(DomainError):
        lower_bound_D(lam, w)


def test_heatmap_domain_error():
    with pytest.raises(DomainError):
        heatmap(lam_range=(0.4, 0.7))
