import math

import numpy as np
import pytest

from netspace.errors import DomainError
from netspace.lattice import (
    Lattice,
    LatticeElement,
    check_density_condition,
    load_lattice_json,
    make_integer_lattice,
    make_su2_dual,
    nu_measure,
    save_lattice_json,
    weyl_count_check,
)


def test_su2_dual_labels_and_weights():
    lattice = make_su2_dual(1.5)
    assert [e.label for e in lattice] == ["l=0", "l=1/2", "l=1", "l=3/2"]
    assert list(lattice.lams) == [1.0, 8.0, 27.0, 64.0]
    assert list(lattice.deltas) == [1, 2, 3, 4]
    assert list(lattice.masses) == [1, 4, 9, 16]
    assert lattice.minimal.label == "l=0"


def test_su2_dual_rejects_non_half_integers():
    with pytest.raises(DomainError):
        make_su2_dual(0.3)
    with pytest.raises(DomainError):
        make_su2_dual(-1)


def test_integer_lattice_order():
    lattice = make_integer_lattice(1, 2)
    assert [e.label for e in lattice] == ["m=0", "m=-1", "m=1", "m=-2", "m=2"]
    assert list(lattice.lams) == [1.0, 2.0, 3.0, 4.0, 5.0]


def test_integer_lattice_abs_m_rule_has_ties():
    lattice = make_integer_lattice(1, 2, "abs-m")
    assert list(lattice.lams) == [1.0, 1.0, 1.0, 2.0, 2.0]


def test_abs_m_rule_uses_the_euclidean_norm():
    lattice = make_integer_lattice(2, 2, "abs-m")
    assert lattice.by_key((0, 0)).lam == 1.0
    assert lattice.by_key((1, 0)).lam == 1.0
    assert lattice.by_key((1, 1)).lam == pytest.approx(math.sqrt(2.0))
    assert lattice.by_key((2, 0)).lam == 2.0
    assert lattice.by_key((2, 2)).lam == pytest.approx(2.0 * math.sqrt(2.0))
    # the same |m| orders the elements, so lambda never decreases
    assert np.all(np.diff(lattice.lams) >= 0)
    assert [e.key for e in lattice][:5] == [(0, 0), (-1, 0), (0, -1), (0, 1), (1, 0)]


def test_integer_lattice_in_two_dimensions():
    lattice = make_integer_lattice(2, 1)
    assert len(lattice) == 9
    assert lattice.minimal.key == (0, 0)
    assert lattice.by_key((1, -1)).label == "m=(1,-1)"
    assert lattice.by_key((2, 0)) is None


def test_unknown_lambda_rule():
    with pytest.raises(DomainError):
        make_integer_lattice(1, 2, "sqrt")


def test_nu_measure():
    lattice = make_su2_dual(1.5)
    assert nu_measure(lattice, [0, 1, 2]) == 14.0
    assert nu_measure(lattice, []) == 0.0
    with pytest.raises(DomainError):
        nu_measure(lattice, [7])


def test_lattice_rejects_decreasing_lambda():
    elements = (
        LatticeElement(id=0, label="a", lam=2.0, delta=1, kappa=1),
        LatticeElement(id=1, label="b", lam=1.0, delta=1, kappa=1),
    )
    with pytest.raises(DomainError, match="nondecreasing"):
        Lattice(elements=elements)


def test_lattice_rejects_kappa_above_delta_for_class_one_kinds():
    elements = (LatticeElement(id=0, label="a", lam=1.0, delta=1, kappa=2, key=(0,)),)
    with pytest.raises(DomainError):
        Lattice(elements=elements, kind="su2-dual")


def test_restrict_renumbers_ids():
    lattice = make_su2_dual(2)
    sub = lattice.restrict([4, 1])
    assert [e.id for e in sub] == [0, 1]
    assert [e.label for e in sub] == ["l=1/2", "l=2"]
    with pytest.raises(DomainError):
        lattice.restrict([])


def test_rank_rule_density_ratio_is_exactly_one():
    report = check_density_condition(make_integer_lattice(1, 10), beta=0.0, side="below")
    assert report["min"] == 1.0
    assert report["max"] == 1.0


def test_su2_density_band_is_bounded():
    report = check_density_condition(make_su2_dual(50), beta=0.0, side="below")
    assert report["spread"] <= 10
    assert report["min"] >= 0.3


def test_density_condition_above():
    report = check_density_condition(make_integer_lattice(1, 20), beta=-2.0, side="above")
    assert 0 < report["min"] <= report["max"] < 2
    assert report["window"][0] == len(make_integer_lattice(1, 20)) // 4


@pytest.mark.parametrize("beta, side", [(-1.0, "below"), (-2.0, "below"), (0.0, "above"), (0.0, "sideways")])
def test_density_condition_domain(beta, side):
    with pytest.raises(DomainError):
        check_density_condition(make_su2_dual(3), beta=beta, side=side)


def test_weyl_counting_band():
    report = weyl_count_check(make_su2_dual(100))
    assert report["eigenvalues"] == 201 * 202 * 403 // 6
    assert report["monotone"]
    low, high = report["interior_band"]
    assert 0.3 <= low <= high <= 3.5
    assert math.isclose(high, 3.0, rel_tol=0.1)


def test_weyl_needs_su2():
    with pytest.raises(DomainError):
        weyl_count_check(make_integer_lattice(1, 3))


def test_lattice_json_file(tmp_path):
    path = tmp_path / "lattice.json"
    save_lattice_json(make_su2_dual(1), path)
    loaded = load_lattice_json(path, dimension_n=3)
    assert loaded.kind == "generic"
    assert [e.label for e in loaded] == ["l=0", "l=1/2", "l=1"]
    assert np.array_equal(loaded.masses, [1, 4, 9])


def test_lattice_json_malformed(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('[{"label": "a", "lambda": 1.0}]', encoding="utf-8")
    with pytest.raises(DomainError, match="malformed"):
        load_lattice_json(path)


def test_su2_density_bands_for_both_sides():
    lattice = make_su2_dual(100)
    below = check_density_condition(lattice, beta=1.0, side="below")
    # sum_{d <= D} d^5 lies between D^6 / 6 and (D + 1)^6 / 6
    assert 1.0 / 6.0 <= below["min"] <= below["max"] <= 0.2
    assert below["spread"] <= 1.1
    above = check_density_condition(lattice, beta=-2.0, side="above")
    assert 0.15 <= above["min"] <= above["max"] <= 0.4
    assert above["spread"] <= 3.0
