import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netspace.errors import DomainError
from netspace.group_fourier import (
    SU2ClassFunction,
    TorusFunction,
    characters,
    class_coefficients,
    class_sup_norms,
    fourier_net,
    lp_norm,
    quadrature_panels,
    su2_class_fourier,
    su2_lp_norm,
    su2_sup_norm,
    torus_fourier,
    torus_from_coefficients,
    torus_lorentz_norm,
    torus_lp_norm,
)
from netspace.lattice import make_integer_lattice, make_su2_dual
from netspace.netnorm import conjugate_exponent, ellp_norm

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def _random_torus(seed, bandwidth=6, n=1, M=None):
    rng = np.random.default_rng(seed)
    frequencies = [m for m in np.ndindex(*(2 * bandwidth + 1,) * n)]
    coeffs = {tuple(c - bandwidth for c in m): complex(*rng.standard_normal(2)) for m in frequencies}
    return coeffs, torus_from_coefficients(coeffs, n=n, M=M)


def _random_su2(seed, two_l_max=8):
    rng = np.random.default_rng(seed)
    return SU2ClassFunction({j: complex(*rng.standard_normal(2)) for j in range(two_l_max + 1)})


def test_single_exponential_on_a_small_grid():
    grid = np.exp(2j * np.pi * np.arange(8) / 8)
    F = torus_fourier(TorusFunction(n=1, M=8, grid=grid), radius=3)
    traces = F.traces()
    labels = [e.label for e in F.lattice]
    assert traces[labels.index("m=1")] == pytest.approx(1.0, abs=1e-12)
    others = [t for label, t in zip(labels, traces) if label != "m=1"]
    assert np.allclose(others, 0.0, atol=1e-12)


def test_aliasing_is_rejected():
    with pytest.raises(DomainError):
        torus_from_coefficients({5: 1.0}, M=8)
    f = torus_from_coefficients({1: 1.0}, M=8)
    with pytest.raises(DomainError):
        torus_fourier(f, radius=4)
    with pytest.raises(DomainError):
        TorusFunction(n=1, M=8, grid=np.zeros(4))


def test_fourier_net_lattice_checks():
    f = torus_from_coefficients({1: 1.0})
    with pytest.raises(DomainError):
        fourier_net(f, make_su2_dual(1))
    with pytest.raises(DomainError):
        fourier_net(SU2ClassFunction({0: 1.0}), make_integer_lattice(1, 2))
    with pytest.raises(DomainError):
        fourier_net(np.zeros(4), make_integer_lattice(1, 2))


@given(seeds, st.sampled_from([1, 2]))
@settings(max_examples=20, deadline=None)
def test_torus_plancherel(seed, n):
    coeffs, f = _random_torus(seed, bandwidth=3 if n == 2 else 6, n=n)
    expected = sum(abs(c) ** 2 for c in coeffs.values())
    assert torus_lp_norm(f, 2) ** 2 == pytest.approx(expected, rel=1e-12)
    F = fourier_net(f, make_integer_lattice(n, 3 if n == 2 else 6))
    assert ellp_norm(F, 2.0) ** 2 == pytest.approx(expected, rel=1e-12)


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_su2_plancherel(seed):
    f = _random_su2(seed)
    expected = sum(abs(c) ** 2 for c in f.coeffs.values())
    assert su2_lp_norm(f, 2) ** 2 == pytest.approx(expected, rel=1e-12)
    assert ellp_norm(su2_class_fourier(f), 2.0) ** 2 == pytest.approx(expected, rel=1e-12)


def test_su2_coefficients_are_recovered():
    f = SU2ClassFunction({0: 1.0, 3: -2.0 + 1j, 6: 0.5})
    F = su2_class_fourier(f, two_l_max=8)
    assert len(F.lattice) == 9
    assert np.allclose(F.traces(), [1.0, 0, 0, -2.0 + 1j, 0, 0, 0.5, 0, 0], atol=1e-12)
    assert F.matrices[3].shape == (4, 4)


def test_characters_at_the_poles():
    chi = characters(4, [0.0, math.pi])
    assert np.allclose(chi[:, 0], [1, 2, 3, 4, 5])
    assert np.allclose(chi[:, 1], [1, -2, 3, -4, 5])


def test_quadrature_node_floor():
    with pytest.raises(DomainError, match="need at least 40"):
        quadrature_panels(9, 39, 64)
    assert quadrature_panels(9, 640, 64) == 10
    f = SU2ClassFunction({0: 1.0}, quad=2000)
    assert su2_lp_norm(f, 3.0) == pytest.approx(1.0, rel=1e-13)


def test_class_coefficients_of_a_callable():
    c = class_coefficients(lambda theta: np.cos(theta), 2)
    # cos(theta) = chi_{1/2}(theta) / 2
    assert np.allclose(c, [0.0, 0.5, 0.0], atol=1e-13)


@given(seeds, st.sampled_from([1.25, 1.5, 1.8, 2.0]))
@settings(max_examples=20, deadline=None)
def test_hausdorff_young_on_both_groups(seed, p):
    p_prime = conjugate_exponent(p)
    _, f = _random_torus(seed, M=512)
    lhs = ellp_norm(fourier_net(f, make_integer_lattice(1, 6)), p_prime)
    assert lhs <= torus_lp_norm(f, p) * (1.0 + 1e-9)
    g = _random_su2(seed)
    assert ellp_norm(su2_class_fourier(g), p_prime) <= su2_lp_norm(g, p) * (1.0 + 1e-9)


def test_sup_norms():
    chi = SU2ClassFunction({4: 1.0})
    assert su2_sup_norm(chi) == pytest.approx(5.0)
    assert lp_norm(chi, math.inf) == pytest.approx(5.0)
    f = torus_from_coefficients({0: 1.0, 1: 1.0, -1: 1.0})
    assert lp_norm(f, math.inf) == pytest.approx(3.0)


@given(seeds, st.integers(min_value=1, max_value=12))
@settings(max_examples=25, deadline=None)
def test_su2_sup_norm_is_attained_and_bracketed(seed, two_l_max):
    rng = np.random.default_rng(seed)
    coeffs = rng.normal(size=two_l_max + 1) + 1j * rng.normal(size=two_l_max + 1)
    f = SU2ClassFunction({k: complex(c) for k, c in enumerate(coeffs)})
    value, error = su2_sup_norm(f, with_error=True)
    dense = float(np.abs(coeffs @ characters(two_l_max, np.linspace(0.0, math.pi, 200001))).max())
    # never above the true maximum, and the bound covers the gap
    assert value <= dense * (1.0 + 1e-7)
    assert error >= 0.0
    assert dense <= (value + error) * (1.0 + 1e-12)


def test_class_sup_norms_rows_are_independent():
    rows = np.array([[0.0, 0.0, 1.0], [1.0, -0.5, 0.25], [0.0, 1.0, 0.0]])
    maxima, bounds = class_sup_norms(rows, 2)
    for row, maximum in zip(rows, maxima):
        assert maximum == pytest.approx(class_sup_norms(row[None, :], 2)[0][0], rel=1e-14)
    assert maxima[0] == pytest.approx(3.0)
    assert maxima[2] == pytest.approx(2.0)
    assert np.all(bounds >= 0.0)


def test_torus_lorentz_of_a_constant():
    f = torus_from_coefficients({0: -2.0}, M=16)
    for p, q in ((1.5, 1.0), (2.0, 3.0), (3.0, math.inf)):
        assert torus_lorentz_norm(f, p, q) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        torus_lorentz_norm(f, math.inf, 2.0)
