import numpy as np
import pytest

from netspace.lattice import Lattice, LatticeElement, make_integer_lattice, make_su2_dual


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture
def su2_small():
    # l = 0, 1/2, ..., 5/2
    return make_su2_dual(2.5)


@pytest.fixture
def z_lattice():
    # m = 0, -1, 1, ..., -4, 4
    return make_integer_lattice(1, 4)


@pytest.fixture
def two_point_lattice():
    elements = (
        LatticeElement(id=0, label="a", lam=1.0, delta=1, kappa=1),
        LatticeElement(id=1, label="b", lam=2.0, delta=1, kappa=1),
    )
    return Lattice(elements=elements)


def brute_force_average(F, family, level):
    """Averaging by direct enumeration of the family members."""
    values = F.weighted_traces()
    best = 0.0
    for member in family.members():
        nu = family.measure(member)
        if nu >= level:
            best = max(best, abs(values[list(member)].sum()) / nu)
    return best
