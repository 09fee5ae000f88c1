"""Shared fixtures: one potential table and the small equilibrium objects
most test modules need.  Session-scoped because both are immutable and
their construction (Green evaluations, dense solves) is the slow part.
"""

import pytest

from rinterlace import LatticeSet, PotentialTable, equilibrium_measure


@pytest.fixture(scope="session")
def table3():
    return PotentialTable(3)


@pytest.fixture(scope="session")
def singleton_eq(table3):
    return equilibrium_measure(LatticeSet.from_sites([(0, 0, 0)]), table3)


@pytest.fixture(scope="session")
def pair_eq(table3):
    return equilibrium_measure(LatticeSet.from_sites([(0, 0, 0), (1, 0, 0)]), table3)


@pytest.fixture(scope="session")
def box222_eq(table3):
    return equilibrium_measure(LatticeSet.from_box((2, 2, 2)), table3)


@pytest.fixture(scope="session")
def bar113_eq(table3):
    return equilibrium_measure(LatticeSet.from_box((1, 1, 3)), table3)


@pytest.fixture(scope="session")
def box444_eq(table3):
    return equilibrium_measure(LatticeSet.from_box((4, 4, 4)), table3)
