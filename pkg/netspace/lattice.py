"""
Finite truncations of weighted ordered lattices.

A lattice element carries the weight lambda (the ordering sequence), the column count delta and
the row count kappa. The measure of a set Q of elements is the sum of delta * kappa over Q.
"""
import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from netspace.errors import DomainError

logger = logging.getLogger(__name__)

KINDS = ("integer-lattice", "su2-dual", "generic")
LAMBDA_RULES = ("rank", "abs-m")


@dataclass(frozen=True)
class LatticeElement:
    id: int
    label: str
    lam: float
    delta: int
    kappa: int
    # coordinates: m for Z^n, (2l,) for the SU(2) dual, () for generic lattices
    key: tuple = ()

    @property
    def mass(self) -> int:
        return self.delta * self.kappa


@dataclass(frozen=True)
class Lattice:
    """
    Ordered finite truncation of a lattice together with its measure.

    Elements are stored sorted by lambda (nondecreasing) and their ids are dense 0..N-1, so an id
    doubles as a position. Arrays used by the engines are built once in __post_init__.
    """

    elements: tuple
    dimension_n: int = 1
    kind: str = "generic"
    lams: np.ndarray = field(init=False, repr=False, compare=False)
    masses: np.ndarray = field(init=False, repr=False, compare=False)
    deltas: np.ndarray = field(init=False, repr=False, compare=False)
    kappas: np.ndarray = field(init=False, repr=False, compare=False)
    _by_label: dict = field(init=False, repr=False, compare=False)
    _by_key: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown lattice kind '{self.kind}'")
        if not self.elements:
            raise DomainError("a lattice needs at least one element (the minimal element)")
        previous = -math.inf
        for position, element in enumerate(self.elements):
            if element.id != position:
                raise DomainError(f"element ids must be dense and ordered, found id {element.id} at position {position}")
            if not element.lam > 0:
                raise DomainError(f"element {element.label} has nonpositive lambda {element.lam}")
            if element.delta < 1 or element.kappa < 1:
                raise DomainError(f"element {element.label} needs delta >= 1 and kappa >= 1")
            if self.kind != "generic" and element.kappa > element.delta:
                raise DomainError(f"class-I element {element.label} has kappa > delta")
            if element.lam < previous:
                raise DomainError(f"lambda must be nondecreasing along the order, violated at {element.label}")
            previous = element.lam
        object.__setattr__(self, "lams", np.array([e.lam for e in self.elements], dtype=np.float64))
        object.__setattr__(self, "deltas", np.array([e.delta for e in self.elements], dtype=np.int64))
        object.__setattr__(self, "kappas", np.array([e.kappa for e in self.elements], dtype=np.int64))
        object.__setattr__(self, "masses", self.deltas * self.kappas)
        object.__setattr__(self, "_by_label", {e.label: e for e in self.elements})
        object.__setattr__(self, "_by_key", {e.key: e for e in self.elements if e.key})
        for array in (self.lams, self.deltas, self.kappas, self.masses):
            array.flags.writeable = False

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def minimal(self) -> LatticeElement:
        return self.elements[0]

    def element(self, element_id) -> LatticeElement:
        if not isinstance(element_id, (int, np.integer)) or not 0 <= element_id < len(self.elements):
            raise DomainError(f"invalid element id {element_id!r} for a lattice of {len(self.elements)} elements")
        return self.elements[int(element_id)]

    def by_label(self, label: str) -> LatticeElement:
        try:
            return self._by_label[label]
        except KeyError:
            raise DomainError(f"no element labelled '{label}'")

    def by_key(self, key: tuple):
        """Element with the given coordinates, or None when outside the truncation."""
        return self._by_key.get(tuple(key))

    def labels(self, ids) -> list:
        return [self.elements[i].label for i in ids]

    def restrict(self, ids) -> "Lattice":
        """Sub-lattice on the given ids (order preserved, ids renumbered densely)."""
        chosen = sorted(set(int(i) for i in ids))
        if not chosen:
            raise DomainError("cannot restrict a lattice to an empty set of elements")
        elements = tuple(
            LatticeElement(id=position, label=e.label, lam=e.lam, delta=e.delta, kappa=e.kappa, key=e.key)
            for position, e in enumerate(self.element(i) for i in chosen)
        )
        return Lattice(elements=elements, dimension_n=self.dimension_n, kind=self.kind)


def nu_measure(lat: Lattice, Q) -> float:
    """
    Measure of a set of elements: the sum of delta * kappa over Q.

    Args:
        lat (Lattice): The lattice.
        Q (Iterable[int]): Element ids.

    Returns:
        float: nu(Q); 0 for the empty set.
    """
    total = 0
    for element_id in Q:
        total += lat.element(element_id).mass
    # delta * kappa are integers, so the sum is exact
    return float(total)


def _format_half_integer(two_l: int) -> str:
    if two_l % 2 == 0:
        return f"l={two_l // 2}"
    return f"l={two_l}/2"


def _half_integer_twice(value) -> int:
    try:
        twice = Fraction(str(value)) * 2
    except ValueError:
        raise DomainError(f"expected a nonnegative half-integer, got {value!r}")
    if twice.denominator != 1 or twice < 0:
        raise DomainError(f"expected a nonnegative half-integer, got {value}")
    return int(twice)


def make_su2_dual(l_max) -> Lattice:
    """
    Truncated unitary dual of SU(2): l = 0, 1/2, 1, ..., l_max.

    Args:
        l_max (float | Fraction | str): Largest half-integer label.

    Returns:
        Lattice: Elements with delta = kappa = 2l+1 and lambda = (2l+1)^3.
    """
    top = _half_integer_twice(l_max)
    elements = tuple(
        LatticeElement(id=j, label=_format_half_integer(j), lam=float((j + 1) ** 3), delta=j + 1, kappa=j + 1, key=(j,))
        for j in range(top + 1)
    )
    return Lattice(elements=elements, dimension_n=3, kind="su2-dual")


def make_integer_lattice(n: int, radius: int, lambda_rule: str = "rank") -> Lattice:
    """
    All m in Z^n with |m|_inf <= radius, ordered by the Euclidean |m| with lexicographic tie-breaking.

    Args:
        n (int): Dimension of the torus T^n.
        radius (int): Truncation radius K.
        lambda_rule (str): 'rank' (lambda = 1-based position) or 'abs-m' (lambda = max(|m|, 1))
            with the Euclidean |m| used for the ordering.

    Returns:
        Lattice: Integer lattice with delta = kappa = 1.
    """
    if n < 1:
        raise DomainError(f"dimension must be positive, got {n}")
    if radius < 0:
        raise DomainError(f"radius must be nonnegative, got {radius}")
    if lambda_rule not in LAMBDA_RULES:
        raise DomainError(f"unknown lambda rule '{lambda_rule}', choose one of {', '.join(LAMBDA_RULES)}")

    points = sorted(itertools.product(range(-radius, radius + 1), repeat=n), key=lambda m: (sum(c * c for c in m), m))
    elements = []
    for position, m in enumerate(points):
        if lambda_rule == "rank":
            lam = float(position + 1)
        else:
            lam = max(math.sqrt(sum(c * c for c in m)), 1.0)
        label = f"m={m[0]}" if n == 1 else "m=(" + ",".join(str(c) for c in m) + ")"
        elements.append(LatticeElement(id=position, label=label, lam=lam, delta=1, kappa=1, key=tuple(m)))
    return Lattice(elements=tuple(elements), dimension_n=n, kind="integer-lattice")


def _density_ratios(lat: Lattice, beta: float, side: str) -> np.ndarray:
    lams = lat.lams
    terms = lams**beta * lat.masses
    if side == "below":
        prefix = np.cumsum(terms)
        # all theta with lambda_theta <= lambda_pi, ties included
        last = np.searchsorted(lams, lams, side="right") - 1
        sums = prefix[last]
    else:
        suffix = np.cumsum(terms[::-1])[::-1]
        first = np.searchsorted(lams, lams, side="left")
        sums = suffix[first]
    return sums / lams ** (beta + 1.0)


def check_density_condition(lat: Lattice, beta: float, side: str = "below") -> dict:
    """
    Density condition: ratios of the partial sums of lambda^beta * nu to lambda^(beta+1).

    For side='below' the band is taken over the upper half of the elements; for side='above' over
    the interior half, since the top of a truncated tail sum is itself an edge.

    Args:
        lat (Lattice): Lattice to check.
        beta (float): Exponent; must exceed -1 for 'below' and be less than -1 for 'above'.
        side (str): 'below' or 'above'.

    Returns:
        dict: min/max/median of the ratio over the reporting window, plus the window bounds.
    """
    if beta == -1:
        raise DomainError("beta = -1 is excluded")
    if side not in ("below", "above"):
        raise DomainError(f"side must be 'below' or 'above', got '{side}'")
    if side == "below" and not beta > -1:
        raise DomainError(f"side 'below' needs beta > -1, got {beta}")
    if side == "above" and not beta < -1:
        raise DomainError(f"side 'above' needs beta < -1, got {beta}")

    ratios = _density_ratios(lat, beta, side)
    size = len(lat)
    if side == "below":
        start, stop = size // 2, size
    else:
        start, stop = size // 4, max(size // 4 + 1, (3 * size) // 4)
    window = ratios[start:stop]
    logger.debug(f"Density condition ({side}, beta={beta}) on {size} elements, window [{start}, {stop})")
    return {
        "beta": beta,
        "side": side,
        "elements": size,
        "window": [start, stop],
        "min": float(window.min()),
        "max": float(window.max()),
        "median": float(np.median(window)),
        "spread": float(window.max() / window.min()) if window.min() > 0 else math.inf,
    }


def weyl_count_check(lat: Lattice) -> dict:
    """
    Eigenvalue counting check on the SU(2) dual.

    The eigenvalue lambda_l of (I - Delta)^(3/2) is repeated (2l+1)^2 times; m_k / k must stay in a
    bounded band. Both the full band and the band over the upper half of the indices are returned.

    Args:
        lat (Lattice): An SU(2) dual truncation.

    Returns:
        dict: Bands, eigenvalue count and the monotonicity flag.
    """
    if lat.kind != "su2-dual":
        raise DomainError(f"the Weyl counting check needs an su2-dual lattice, got '{lat.kind}'")
    eigenvalues = np.repeat(lat.lams, lat.masses)
    k = np.arange(1, eigenvalues.size + 1, dtype=np.float64)
    ratios = eigenvalues / k
    interior = ratios[eigenvalues.size // 2:]
    return {
        "eigenvalues": int(eigenvalues.size),
        "band": [float(ratios.min()), float(ratios.max())],
        "interior_band": [float(interior.min()), float(interior.max())],
        "monotone": bool(np.all(np.diff(eigenvalues) >= 0)),
    }


def load_lattice_json(path, dimension_n: int = 1) -> Lattice:
    """
    Load a generic lattice from a JSON array of {label, lambda, delta, kappa} records.

    Args:
        path (str | Path): JSON file.
        dimension_n (int): Manifold dimension recorded on the lattice.

    Returns:
        Lattice: Elements sorted by lambda (stable), ids reassigned densely.
    """
    with open(Path(path), "r", encoding="utf-8") as handle:
        records = json.load(handle)
    if not isinstance(records, list):
        raise DomainError(f"{path}: expected a JSON array of lattice records")
    cleaned = []
    for record in records:
        try:
            label, lam, delta, kappa = str(record["label"]), float(record["lambda"]), int(record["delta"]), int(record["kappa"])
        except (KeyError, TypeError, ValueError) as e:
            raise DomainError(f"{path}: malformed lattice record {record!r}: {e}")
        if lam <= 0 or delta <= 0 or kappa <= 0:
            raise DomainError(f"{path}: record '{label}' has a nonpositive weight")
        cleaned.append((label, lam, delta, kappa))
    cleaned.sort(key=lambda record: record[1])
    elements = tuple(
        LatticeElement(id=i, label=label, lam=lam, delta=delta, kappa=kappa) for i, (label, lam, delta, kappa) in enumerate(cleaned)
    )
    logger.info(f"Loaded lattice with {len(elements)} elements from {path}")
    return Lattice(elements=elements, dimension_n=dimension_n, kind="generic")


def save_lattice_json(lat: Lattice, path) -> None:
    """Write a lattice in the format read by load_lattice_json."""
    records = [{"label": e.label, "lambda": e.lam, "delta": e.delta, "kappa": e.kappa} for e in lat]
    with open(Path(path), "w", encoding="utf-8") as handle:
        json.dump(records, handle, indent=2, sort_keys=True)
