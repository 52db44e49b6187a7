from fractions import Fraction

import pytest

from slitplane.lattice_enum import StepSet

CATALOG_V = ([-1, 1], [-2, 1, 2], [-2, -1, 1, 2], [-1, 2])


@pytest.fixture
def flagship() -> StepSet:
    return StepSet.from_parts([-1, 1], [-2, 1, 2])


@pytest.fixture
def simple() -> StepSet:
    return StepSet.from_parts([-1, 1], [-1, 1])


def frac_list(*xs):
    return [Fraction(x) for x in xs]
