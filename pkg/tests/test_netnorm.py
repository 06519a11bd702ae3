import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize

from netspace.corpus import random_net
from netspace.errors import DomainError
from netspace.families import make_family
from netspace.harness import verify_embedding
from netspace.lattice import Lattice, LatticeElement, make_integer_lattice, make_su2_dual
from netspace.netnorm import (
    CoefficientNet,
    NormParams,
    averaging,
    averaging_table,
    class_I_net,
    diagonal_net,
    duality_quotient,
    ellp_duality_gap,
    ellp_norm,
    is_class_I,
    lorentz_discrete_norm,
    net_from_json,
    net_norm,
    net_to_json,
    zero_net,
)
from tests.conftest import brute_force_average


def test_net_shapes_are_checked(su2_small):
    with pytest.raises(DomainError):
        CoefficientNet(su2_small, tuple(np.zeros((1, 1)) for _ in su2_small))
    with pytest.raises(DomainError):
        CoefficientNet(su2_small, ())


def test_diagonal_net_traces(su2_small):
    traces = np.arange(len(su2_small)) + 1j
    F = diagonal_net(su2_small, traces)
    assert np.allclose(F.traces(), traces)
    assert np.allclose(F.weighted_traces(), su2_small.deltas * traces)


def test_class_one_nets():
    elements = (
        LatticeElement(id=0, label="trivial", lam=1.0, delta=1, kappa=1),
        LatticeElement(id=1, label="spherical", lam=4.0, delta=3, kappa=1),
    )
    lattice = Lattice(elements=elements)
    square = [np.array([[2.0]]), np.zeros((3, 3))]
    square[1][0] = [1.0, 2.0, 3.0]
    assert is_class_I(lattice, square)
    F = class_I_net(lattice, square)
    assert F.matrices[1].shape == (1, 3)
    assert np.allclose(F.traces(), [2.0, 1.0])
    square[1][2, 0] = 1.0
    assert not is_class_I(lattice, square)
    with pytest.raises(DomainError):
        class_I_net(lattice, square)


def test_net_norm_by_hand(two_point_lattice):
    F = diagonal_net(two_point_lattice, [3.0, 1.0])
    family = make_family("all-subsets", two_point_lattice)
    table = averaging_table(F, family)
    assert [a.value for a in table] == [3.0, 2.0]
    assert [a.witness for a in table] == [(0,), (0, 1)]
    assert net_norm(F, NormParams(p=1.0, q=1.0, family=family)).value == pytest.approx(5.0)
    assert net_norm(F, NormParams(p=2.0, q=math.inf, family=family)).value == pytest.approx(3.0)
    assert net_norm(F, NormParams(p=2.0, q=2.0, family=family)).value == pytest.approx(math.sqrt(13.0))


def test_single_element_net_norm():
    lattice = make_integer_lattice(1, 0)
    F = diagonal_net(lattice, [-2.5])
    family = make_family("segments", lattice)
    for q in (1.0, 2.0, math.inf):
        assert net_norm(F, NormParams(p=1.5, q=q, family=family)).value == pytest.approx(2.5)


def test_averaging_without_admissible_member():
    lattice = make_su2_dual(1)
    F = diagonal_net(lattice, [1.0, 1.0, 1.0])
    family = make_family("segments", lattice)
    average = averaging(F, 27.0, family)
    assert average.value == 0.0
    assert average.witness is None
    result = net_norm(F, NormParams(p=2.0, q=2.0, family=family))
    assert result.empty_levels == [27.0]
    assert result.to_dict(lattice)["witnesses"][0]["members"] == ["l=0"]


def test_averaging_level_must_be_positive(su2_small):
    family = make_family("segments", su2_small)
    with pytest.raises(DomainError):
        averaging(zero_net(su2_small), 0.0, family)


@given(st.integers(min_value=0, max_value=2**32 - 1), st.sampled_from(["all-subsets", "segments"]))
@settings(max_examples=30, deadline=None)
def test_exact_averaging_matches_enumeration(seed, kind):
    lattice = make_su2_dual(2.5)
    family = make_family(kind, lattice)
    F = random_net(lattice, np.random.default_rng(seed), decay=seed % 3)
    table = averaging_table(F, family)
    for average in table:
        assert average.exact
        assert average.value == pytest.approx(brute_force_average(F, family, average.level), rel=1e-12, abs=1e-15)
    values = [average.value for average in table]
    assert all(a >= b - 1e-12 * max(1.0, a) for a, b in zip(values, values[1:]))


@given(st.integers(min_value=0, max_value=2**32 - 1), st.booleans())
@settings(max_examples=30, deadline=None)
def test_heuristic_is_a_lower_bound(seed, real):
    lattice = make_su2_dual(2)
    family = make_family("all-subsets", lattice)
    F = random_net(lattice, np.random.default_rng(seed), real=real, diagonal=True)
    exact = averaging_table(F, family, "exact")
    heuristic = averaging_table(F, family, "heuristic")
    for lower, upper in zip(heuristic, exact):
        assert not lower.exact
        assert lower.value <= upper.value * (1.0 + 1e-12) + 1e-15
    result = net_norm(F, NormParams(p=2.0, q=2.0, family=family), "heuristic")
    assert not result.exact
    assert result.to_dict(lattice)["lower_bound"]


def test_heuristic_engine_restrictions(su2_small):
    capped = make_family("all-subsets", su2_small, max_cardinality=2)
    with pytest.raises(DomainError):
        averaging_table(zero_net(su2_small), capped, "heuristic")
    with pytest.raises(DomainError):
        averaging_table(zero_net(su2_small), make_family("segments", su2_small), "greedy")


def test_ellp_norm_formula(su2_small, rng):
    F = random_net(su2_small, rng)
    for p in (1.0, 2.0, 3.5):
        expected = sum(e.delta * e.kappa ** (1 - p / 2) * np.linalg.norm(m) ** p for e, m in zip(su2_small, F.matrices)) ** (1 / p)
        assert ellp_norm(F, p) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("p", [1.25, 1.5, 2.0, 3.0, 6.0])
def test_ellp_duality(su2_small, p):
    F = random_net(su2_small, np.random.default_rng(11))
    report = ellp_duality_gap(F, p, trials=200, seed=3)
    assert report["gap"] <= 1e-8 * report["norm"]
    assert report["random_violations"] == 0
    assert report["max_random_quotient"] <= report["norm"]


def test_ellp_duality_survives_local_search():
    lattice = make_su2_dual(1)
    F = random_net(lattice, np.random.default_rng(5), real=True)
    shapes = [m.shape for m in F.matrices]
    sizes = [int(np.prod(shape)) for shape in shapes]
    p = 1.5
    norm = ellp_norm(F, p)

    def negative_quotient(x):
        pieces = np.split(x, np.cumsum(sizes)[:-1])
        g = CoefficientNet(lattice, tuple(piece.reshape(shape) for piece, shape in zip(pieces, shapes)))
        return -duality_quotient(F, g, p)

    start = np.random.default_rng(9).standard_normal(sum(sizes))
    best = minimize(negative_quotient, start, method="Nelder-Mead", options={"maxiter": 4000, "xatol": 1e-10, "fatol": 1e-12})
    assert -best.fun <= norm * (1.0 + 1e-9)


def test_discrete_lorentz_pp_matches_ellp(z_lattice, rng):
    F = random_net(z_lattice, rng)
    for p in (1.5, 2.0, 4.0):
        assert lorentz_discrete_norm(F, p, p) == pytest.approx(ellp_norm(F, p), rel=1e-12)


def test_net_json(su2_small, rng):
    F = random_net(su2_small, rng)
    data = net_to_json(F)
    partial = {"labels": data["labels"][:2], "matrices": data["matrices"][:2]}
    G = net_from_json(partial, su2_small)
    assert np.allclose(G.matrices[1], F.matrices[1])
    assert not np.any(G.matrices[3])
    with pytest.raises(DomainError):
        net_from_json({"labels": ["l=0"]}, su2_small)
    with pytest.raises(DomainError):
        net_from_json({"labels": ["l=9"], "matrices": [[[[1.0, 0.0]]]]}, su2_small)


def test_norm_params_domain(su2_small):
    family = make_family("segments", su2_small)
    with pytest.raises(DomainError):
        NormParams(p=0.5, q=2.0, family=family)
    with pytest.raises(DomainError):
        NormParams(p=math.inf, q=2.0, family=family)
    with pytest.raises(DomainError):
        NormParams(p=2.0, q=0.5, family=family)


def test_averaging_of_the_three_point_net():
    elements = tuple(LatticeElement(id=i, label=str(i + 1), lam=float(i + 1), delta=1, kappa=i + 1) for i in range(3))
    lattice = Lattice(elements=elements)
    F = diagonal_net(lattice, [1.0, -1.0, 0.0])
    family = make_family("all-subsets", lattice)
    # nu = (1, 2, 3): {3}: 0/3, {1,2}: 0/3, {1,3}: 1/4, {2,3}: 1/5, {1,2,3}: 0/6
    top = averaging(F, 3.0, family)
    assert top.value == pytest.approx(0.25, abs=1e-15)
    assert top.witness == (0, 2)
    bottom = averaging(F, 1.0, family)
    assert bottom.value == pytest.approx(1.0, abs=1e-15)
    assert bottom.witness == (0,)
    for level in (1.0, 2.0, 3.0):
        assert averaging(F, level, family).value == pytest.approx(brute_force_average(F, family, level), abs=1e-15)


def test_ties_go_to_the_first_member_in_canonical_order():
    lattice = make_integer_lattice(1, 1)
    F = diagonal_net(lattice, [1.0, 0.0, 1.0])
    family = make_family("all-subsets", lattice)
    # {0}, {2} and {0,2} all reach ratio 1 at level 1
    table = averaging_table(F, family)
    assert [average.witness for average in table] == [(0,), (0, 2), (0, 1, 2)]
    assert [average.value for average in table] == pytest.approx([1.0, 1.0, 2.0 / 3.0])


@pytest.mark.parametrize("p, q", [(1.5, 1.0), (2.0, 3.0), (3.0, 2.0), (2.5, math.inf)])
def test_discrete_lorentz_of_a_single_atom(p, q):
    lattice = make_integer_lattice(1, 0)
    F = diagonal_net(lattice, [-2.5])
    plain = 2.5 if math.isinf(q) else 2.5 * (p / q) ** (1.0 / q)
    assert lorentz_discrete_norm(F, p, q, normalized=False) == pytest.approx(plain, rel=1e-14)
    assert lorentz_discrete_norm(F, p, q) == pytest.approx(2.5, rel=1e-14)


@given(
    st.integers(min_value=0, max_value=2**32 - 1),
    st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False),
    st.sampled_from(["all-subsets", "segments"]),
    st.sampled_from([1.0, 2.0, math.inf]),
)
@settings(max_examples=40, deadline=None)
def test_net_norm_is_homogeneous(seed, c, kind, q):
    lattice = make_su2_dual(2)
    family = make_family(kind, lattice)
    F = random_net(lattice, np.random.default_rng(seed), decay=seed % 3)
    params = NormParams(p=1.5, q=q, family=family)
    assert net_norm(F.scaled(c), params).value == pytest.approx(abs(c) * net_norm(F, params).value, rel=1e-12)
    assert net_norm(F.scaled(0.0), params).value == 0.0


def test_heuristic_net_norm_is_homogeneous():
    lattice = make_su2_dual(2)
    family = make_family("all-subsets", lattice)
    F = random_net(lattice, np.random.default_rng(17), diagonal=True)
    params = NormParams(p=2.0, q=2.0, family=family)
    assert net_norm(F.scaled(-4.0), params, "heuristic").value == pytest.approx(4.0 * net_norm(F, params, "heuristic").value, rel=1e-12)


@pytest.mark.parametrize("scale", [4.0, 0.3, 17.0])
def test_embedding_ratios_are_scale_invariant(scale):
    lattice = make_su2_dual(1.5)
    family = make_family("segments", lattice)
    plain = verify_embedding(lattice, family, p=2.0, q1=2.0, q2=math.inf, corpus="mixed:10:seed=4")
    scaled = verify_embedding(lattice, family, p=2.0, q1=2.0, q2=math.inf, corpus=f"mixed:10:seed=4:scale={scale}")
    assert [row["name"] for row in scaled.rows] == [row["name"] for row in plain.rows]
    for before, after in zip(plain.rows, scaled.rows):
        assert after["ratio"] == pytest.approx(before["ratio"], rel=1e-12)
        assert after["lhs"] == pytest.approx(scale * before["lhs"], rel=1e-12)


def test_norms_grow_with_the_family():
    lattice = make_integer_lattice(1, 5).restrict(range(10))
    progressions, segments = make_family("progressions", lattice), make_family("segments", lattice)
    everything = make_family("all-subsets", lattice)
    rng = np.random.default_rng(42)
    for index in range(100):
        F = random_net(lattice, rng, decay=index % 3, real=bool(index % 2))
        for p, q in ((1.0, 1.0), (1.5, 2.0), (2.0, math.inf)):
            larger = net_norm(F, NormParams(p=p, q=q, family=everything)).value
            for smaller in (progressions, segments):
                assert net_norm(F, NormParams(p=p, q=q, family=smaller)).value <= larger * (1.0 + 1e-12)
