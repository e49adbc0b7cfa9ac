from fractions import Fraction

import pytest

from delibmatch.exactnum import canonical_params
from delibmatch.instances import MetricInstance, TieDirectives

THIRD = Fraction(1, 3)
HALF = Fraction(1, 2)


def four_instance():
    """A=0, B=1, C=2; two voters at B who break the (A,C) tie toward A, one voter at C."""
    inst = MetricInstance.from_line({"A": 0, "B": 1, "C": 2},
                                    [("u1", THIRD, 1), ("u2", THIRD, 1), ("v", THIRD, 2)])
    ties = TieDirectives().set_pref(None, "A", "C", "A").set_delib(None, "C", "B", "C")
    return inst, ties


def two_instance_x():
    """A=-1, B=1; two voters at A, one at B; the single deliberation goes to B."""
    inst = MetricInstance.from_line({"A": -1, "B": 1},
                                    [("a1", THIRD, -1), ("a2", THIRD, -1), ("b", THIRD, 1)])
    ties = TieDirectives().set_delib(None, "A", "B", "B")
    return inst, ties


def two_instance_y():
    """A=-1, B=1; two voters at 0 who break the tie toward A, one at B."""
    inst = MetricInstance.from_line({"A": -1, "B": 1},
                                    [("a1", THIRD, 0), ("a2", THIRD, 0), ("b", THIRD, 1)])
    ties = TieDirectives().set_pref(None, "A", "B", "A")
    return inst, ties


@pytest.fixture
def star():
    return canonical_params()
