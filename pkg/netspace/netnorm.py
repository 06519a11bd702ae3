"""
Averaging functions and net norms N_{p,q}(Gamma, M), weighted l^p norms and discrete Lorentz norms.
"""
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from netspace.errors import ConsistencyError, DomainError
from netspace.families import SubsetFamily, prefix_best
from netspace.lattice import Lattice
from netspace.rearrangement import StepFunction

logger = logging.getLogger(__name__)

ENGINES = ("exact", "heuristic")
MONOTONE_TOLERANCE = 1e-12
HEURISTIC_PHASES_COMPLEX = 64
HEURISTIC_MAX_ITERATIONS = 60


@dataclass(frozen=True, eq=False)
class CoefficientNet:
    """
    A net of complex matrices F(pi) of shape (kappa_pi, delta_pi) over a lattice.

    Fourier coefficients of functions are the main source of nets; any matrix family with the
    right shapes is accepted.
    """

    lattice: Lattice
    matrices: tuple

    def __post_init__(self):
        if len(self.matrices) != len(self.lattice):
            raise DomainError(f"net has {len(self.matrices)} matrices for a lattice of {len(self.lattice)} elements")
        frozen = []
        for element, matrix in zip(self.lattice, self.matrices):
            matrix = np.array(matrix, dtype=np.complex128)
            if matrix.shape != (element.kappa, element.delta):
                raise DomainError(f"matrix at {element.label} has shape {matrix.shape}, expected {(element.kappa, element.delta)}")
            matrix.flags.writeable = False
            frozen.append(matrix)
        object.__setattr__(self, "matrices", tuple(frozen))

    def traces(self) -> np.ndarray:
        # np.trace sums F_jj for j < min(kappa, delta) on rectangular matrices
        return np.array([np.trace(m) for m in self.matrices], dtype=np.complex128)

    def weighted_traces(self) -> np.ndarray:
        """delta_theta * Tr F(theta), the summand of the averaging function."""
        return self.lattice.deltas * self.traces()

    def hs_norms(self) -> np.ndarray:
        return np.array([np.linalg.norm(m) for m in self.matrices], dtype=np.float64)

    def is_real(self) -> bool:
        return all(not np.any(m.imag) for m in self.matrices)

    def scaled(self, c) -> "CoefficientNet":
        return CoefficientNet(self.lattice, tuple(c * m for m in self.matrices))

    def __add__(self, other: "CoefficientNet") -> "CoefficientNet":
        _same_lattice(self, other)
        return CoefficientNet(self.lattice, tuple(a + b for a, b in zip(self.matrices, other.matrices)))

    def __sub__(self, other: "CoefficientNet") -> "CoefficientNet":
        _same_lattice(self, other)
        return CoefficientNet(self.lattice, tuple(a - b for a, b in zip(self.matrices, other.matrices)))


def _same_lattice(a: CoefficientNet, b: CoefficientNet):
    if a.lattice is not b.lattice and a.lattice != b.lattice:
        raise DomainError("nets live on different lattices")


def diagonal_net(lattice: Lattice, traces) -> CoefficientNet:
    """Net with F(pi) = (t_pi / min(kappa, delta)) * I, so that Tr F(pi) = t_pi."""
    traces = np.asarray(traces, dtype=np.complex128)
    if traces.size != len(lattice):
        raise DomainError(f"expected {len(lattice)} traces, got {traces.size}")
    matrices = []
    for element, t in zip(lattice, traces):
        rank = min(element.kappa, element.delta)
        matrices.append(np.eye(element.kappa, element.delta, dtype=np.complex128) * (t / rank))
    return CoefficientNet(lattice, tuple(matrices))


def is_class_I(lattice: Lattice, square_matrices) -> bool:
    """True iff every delta x delta matrix vanishes outside its first kappa rows."""
    for element, matrix in zip(lattice, square_matrices):
        matrix = np.asarray(matrix)
        if matrix.shape != (element.delta, element.delta):
            raise DomainError(f"matrix at {element.label} has shape {matrix.shape}, expected {(element.delta, element.delta)}")
        if np.any(matrix[element.kappa:]):
            return False
    return True


def class_I_net(lattice: Lattice, square_matrices) -> CoefficientNet:
    """Net from full delta x delta Fourier coefficients of a function on G/K (rows below kappa dropped)."""
    square_matrices = tuple(np.asarray(m, dtype=np.complex128) for m in square_matrices)
    if len(square_matrices) != len(lattice):
        raise DomainError(f"net has {len(square_matrices)} matrices for a lattice of {len(lattice)} elements")
    if not is_class_I(lattice, square_matrices):
        raise DomainError("coefficients have nonzero rows beyond kappa; not the transform of a function on G/K")
    return CoefficientNet(lattice, tuple(m[: e.kappa] for e, m in zip(lattice, square_matrices)))


def zero_net(lattice: Lattice) -> CoefficientNet:
    return CoefficientNet(lattice, tuple(np.zeros((e.kappa, e.delta), dtype=np.complex128) for e in lattice))


@dataclass(frozen=True)
class NormParams:
    p: float
    q: float
    family: SubsetFamily

    def __post_init__(self):
        if not 1.0 <= self.p < math.inf:
            raise DomainError(f"net norms need 1 <= p < inf, got p={self.p}")
        if not self.q >= 1.0:
            raise DomainError(f"net norms need 1 <= q <= inf, got q={self.q}")


@dataclass(frozen=True)
class Average:
    level: float
    value: float
    witness: Optional[tuple]
    exact: bool


@dataclass
class NormResult:
    value: float
    exact: bool
    witnesses: dict = field(default_factory=dict)
    empty_levels: list = field(default_factory=list)

    def to_dict(self, lattice: Lattice) -> dict:
        return {
            "value": self.value,
            "exact": self.exact,
            "lower_bound": not self.exact,
            "witnesses": [
                {"level": level, "members": lattice.labels(member) if member else []} for level, member in sorted(self.witnesses.items())
            ],
            "empty_levels": sorted(self.empty_levels),
        }


# -- exact engine --------------------------------------------------------------------------------


class _ExactTable:
    """Sorted member ratios with a running maximum from the largest measure downwards."""

    def __init__(self, F: CoefficientNet, fam: SubsetFamily):
        sums, nus, decode = fam.aggregate(F.weighted_traces())
        self.decode = decode
        if nus.size == 0:
            self.sorted_nus = np.zeros(0)
            return
        self.sorted_nus, self.running, self.best_index = prefix_best(np.abs(sums) / nus, nus)

    def at(self, level: float) -> Average:
        # members admissible at this level: nu(Q) >= level
        count = int(np.searchsorted(-self.sorted_nus, -level, side="right"))
        if count == 0:
            return Average(level=level, value=0.0, witness=None, exact=True)
        witness = self.decode(int(self.best_index[count - 1]))
        return Average(level=level, value=float(self.running[count - 1]), witness=witness, exact=True)


# -- heuristic engine ----------------------------------------------------------------------------


def _inner_selection(gains: np.ndarray, weights: np.ndarray, level: float) -> np.ndarray:
    chosen = gains > 0
    capacity = weights[chosen].sum()
    if capacity < level:
        rest = np.flatnonzero(~chosen)
        rest = rest[np.argsort(-(gains[rest] / weights[rest]), kind="stable")]
        for index in rest:
            chosen[index] = True
            capacity += weights[index]
            if capacity >= level:
                break
    return chosen


def _dinkelbach_level(values: np.ndarray, weights: np.ndarray, level: float, phases) -> Average:
    best_value, best_mask = 0.0, None
    if weights.sum() < level:
        return Average(level=level, value=0.0, witness=None, exact=False)
    for phi in phases:
        projected = np.real(np.exp(-1j * phi) * values)
        ratio, mask = 0.0, None
        for _ in range(HEURISTIC_MAX_ITERATIONS):
            candidate = _inner_selection(projected - ratio * weights, weights, level)
            candidate_ratio = projected[candidate].sum() / weights[candidate].sum()
            if mask is not None and candidate_ratio <= ratio:
                break
            ratio, mask = candidate_ratio, candidate
        true_ratio = abs(values[mask].sum()) / weights[mask].sum()
        if true_ratio > best_value:
            best_value, best_mask = float(true_ratio), mask
    witness = tuple(int(i) for i in np.flatnonzero(best_mask)) if best_mask is not None else None
    return Average(level=level, value=best_value, witness=witness, exact=False)


def _heuristic_phases(F: CoefficientNet):
    if F.is_real():
        return (0.0, math.pi)
    return tuple(2.0 * math.pi * k / HEURISTIC_PHASES_COMPLEX for k in range(HEURISTIC_PHASES_COMPLEX))


def _uses_heuristic(fam: SubsetFamily, engine: str) -> bool:
    if engine not in ENGINES:
        raise DomainError(f"unknown engine '{engine}', choose one of {', '.join(ENGINES)}")
    if engine == "heuristic" and fam.kind == "all-subsets":
        if fam.max_cardinality is not None:
            raise DomainError("the heuristic engine does not support max_cardinality caps")
        return True
    return False


# -- public operations ---------------------------------------------------------------------------


def _check_monotone(table: list):
    for upper, lower in zip(table, table[1:]):
        if lower.value > upper.value + MONOTONE_TOLERANCE * max(1.0, upper.value):
            raise ConsistencyError(
                f"averaging increased from {upper.value} at level {upper.level} to {lower.value} at level {lower.level}"
            )


def averaging_table(F: CoefficientNet, fam: SubsetFamily, engine: str = "exact") -> list:
    """
    The averaging function at every distinct lambda of the lattice.

    Args:
        F (CoefficientNet): The net.
        fam (SubsetFamily): Family over the same lattice.
        engine (str): 'exact' or 'heuristic' (all-subsets families only; certified lower bounds).

    Returns:
        list[Average]: One entry per distinct lambda, in increasing lambda order. The values are
        checked to be nonincreasing.
    """
    if fam.lattice != F.lattice:
        raise DomainError("family and net live on different lattices")
    levels = [float(level) for level in np.unique(F.lattice.lams)]
    if _uses_heuristic(fam, engine):
        values = F.weighted_traces()
        weights = F.lattice.masses.astype(np.float64)
        phases = _heuristic_phases(F)
        raw = [_dinkelbach_level(values, weights, level, phases) for level in levels]
        # a member admissible at a higher level is admissible at every lower one
        table, best = [], None
        for average in reversed(raw):
            if best is None or average.value > best.value:
                best = average
            table.append(Average(level=average.level, value=best.value, witness=best.witness, exact=False))
        table.reverse()
    else:
        exact = _ExactTable(F, fam)
        table = [exact.at(level) for level in levels]
    _check_monotone(table)
    return table


def averaging(F: CoefficientNet, level: float, fam: SubsetFamily, engine: str = "exact") -> Average:
    """
    sup over Q in fam with nu(Q) >= level of |sum_{theta in Q} delta_theta Tr F(theta)| / nu(Q).

    Returns 0 (with no witness) when no member is admissible. The heuristic engine returns a
    certified lower bound flagged exact=False.
    """
    if not level > 0:
        raise DomainError(f"averaging level must be positive, got {level}")
    if fam.lattice != F.lattice:
        raise DomainError("family and net live on different lattices")
    if _uses_heuristic(fam, engine):
        weights = F.lattice.masses.astype(np.float64)
        return _dinkelbach_level(F.weighted_traces(), weights, float(level), _heuristic_phases(F))
    return _ExactTable(F, fam).at(float(level))


def weighted_levels(F: CoefficientNet, table: list, p: float) -> np.ndarray:
    """lambda_pi^(1/p) * averaging at lambda_pi for every element pi."""
    by_level = {average.level: average.value for average in table}
    return np.array([e.lam ** (1.0 / p) * by_level[float(e.lam)] for e in F.lattice], dtype=np.float64)


def net_norm(F: CoefficientNet, params: NormParams, engine: str = "exact", table: Optional[list] = None) -> NormResult:
    """
    The net norm ||F||_{N_{p,q}(Gamma, M)}.

    Args:
        F (CoefficientNet): The net.
        params (NormParams): p, q and the family M.
        engine (str): Averaging engine.
        table (list): A precomputed averaging_table for (F, params.family, engine).

    Returns:
        NormResult: Value, exactness flag and the achieving member per level.
    """
    if table is None:
        table = averaging_table(F, params.family, engine)
    lattice = F.lattice
    weighted = weighted_levels(F, table, params.p)
    if math.isinf(params.q):
        value = float(weighted.max()) if weighted.size else 0.0
    else:
        pieces = weighted**params.q * lattice.masses / lattice.lams
        value = math.fsum(pieces) ** (1.0 / params.q)
    return NormResult(
        value=float(value),
        exact=all(average.exact for average in table),
        witnesses={average.level: average.witness for average in table},
        empty_levels=[average.level for average in table if average.witness is None and average.value == 0.0],
    )


def ellp_norm(F: CoefficientNet, p: float) -> float:
    """
    (sum_pi delta_pi kappa_pi^(p(1/p - 1/2)) ||F(pi)||_HS^p)^(1/p).

    Args:
        F (CoefficientNet): The net.
        p (float): Exponent, 1 <= p < inf.

    Returns:
        float: The weighted l^p norm.
    """
    if not 1.0 <= p < math.inf:
        raise DomainError(f"l^p norms need 1 <= p < inf, got p={p}")
    lattice = F.lattice
    weights = lattice.deltas * lattice.kappas.astype(np.float64) ** (1.0 - p / 2.0)
    return float(math.fsum(weights * F.hs_norms() ** p) ** (1.0 / p))


def conjugate_exponent(p: float) -> float:
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def duality_quotient(h: CoefficientNet, g: CoefficientNet, p: float) -> float:
    """|sum_pi delta_pi Tr[h(pi) g(pi)^*]| / ||g||_{l^p'}."""
    denominator = ellp_norm(g, conjugate_exponent(p))
    if denominator == 0:
        return 0.0
    pairing = sum(delta * np.vdot(gm, hm) for delta, hm, gm in zip(h.lattice.deltas, h.matrices, g.matrices))
    return float(abs(pairing) / denominator)


def duality_extremizer(h: CoefficientNet, p: float) -> CoefficientNet:
    """
    g(pi) = kappa_pi^((p' - p) / (2p')) ||h(pi)||_HS^(p-2) h(pi), the equality case of Hoelder's
    inequality with the kappa weights of both norms.
    """
    p_prime = conjugate_exponent(p)
    matrices = []
    for element, matrix, norm in zip(h.lattice, h.matrices, h.hs_norms()):
        if norm == 0:
            matrices.append(np.zeros_like(matrix))
            continue
        scale = element.kappa ** ((p_prime - p) / (2.0 * p_prime)) * norm ** (p - 2.0)
        matrices.append(scale * matrix)
    return CoefficientNet(h.lattice, tuple(matrices))


def ellp_duality_gap(h: CoefficientNet, p: float, trials: int = 100, seed: int = 0) -> dict:
    """
    Check the l^p duality formula: the extremizer attains the norm and random g never exceed it.

    Args:
        h (CoefficientNet): The net.
        p (float): Exponent, 1 < p < inf.
        trials (int): Number of random g.
        seed (int): Seed for the random g.

    Returns:
        dict: norm, extremal quotient, gap, largest random quotient and the violation count.
    """
    if not 1.0 < p < math.inf:
        raise DomainError(f"the duality check needs 1 < p < inf, got p={p}")
    norm = ellp_norm(h, p)
    if norm == 0:
        return {"norm": 0.0, "extremal_quotient": 0.0, "gap": 0.0, "max_random_quotient": 0.0, "random_violations": 0}
    extremal = duality_quotient(h, duality_extremizer(h, p), p)
    rng = np.random.default_rng(seed)
    largest, violations = 0.0, 0
    for _ in range(trials):
        g = CoefficientNet(
            h.lattice, tuple(rng.standard_normal(m.shape) + 1j * rng.standard_normal(m.shape) for m in h.matrices)
        )
        quotient = duality_quotient(h, g, p)
        largest = max(largest, quotient)
        if quotient > norm * (1.0 + 1e-12):
            violations += 1
    return {
        "norm": norm,
        "extremal_quotient": extremal,
        "gap": abs(extremal - norm),
        "max_random_quotient": largest,
        "random_violations": violations,
    }


def lorentz_discrete_norm(F: CoefficientNet, p: float, q: float, normalized: bool = True) -> float:
    """
    Lorentz l^{p,q} norm of the atoms kappa_pi^(-1/2) ||F(pi)||_HS with masses delta_pi kappa_pi.

    normalized=False gives the plain ||t^(1/p) f*(t)||_{L^q(dt/t)}, which is (p/q)^(1/q) times the
    normalized value.
    """
    if not 1.0 < p < math.inf:
        raise DomainError(f"discrete Lorentz norms need 1 < p < inf, got p={p}")
    lattice = F.lattice
    atoms = F.hs_norms() / np.sqrt(lattice.kappas)
    return StepFunction.from_atoms(atoms, lattice.masses).lorentz_norm(p, q, normalized)


# -- JSON ----------------------------------------------------------------------------------------


def net_to_json(F: CoefficientNet) -> dict:
    return {
        "labels": [e.label for e in F.lattice],
        "matrices": [[[[float(z.real), float(z.imag)] for z in row] for row in matrix] for matrix in F.matrices],
    }


def net_from_json(data: dict, lattice: Lattice) -> CoefficientNet:
    """Net from {labels, matrices}; labels missing from the file get zero matrices."""
    try:
        labels, raw = data["labels"], data["matrices"]
    except (KeyError, TypeError):
        raise DomainError("a net file needs 'labels' and 'matrices'")
    if len(labels) != len(raw):
        raise DomainError("'labels' and 'matrices' differ in length")
    given = {}
    for label, matrix in zip(labels, raw):
        element = lattice.by_label(str(label))
        given[element.id] = np.array([[complex(re, im) for re, im in row] for row in matrix], dtype=np.complex128).reshape(
            element.kappa, element.delta
        )
    matrices = tuple(given.get(e.id, np.zeros((e.kappa, e.delta), dtype=np.complex128)) for e in lattice)
    return CoefficientNet(lattice, matrices)


def save_net_json(F: CoefficientNet, path) -> None:
    with open(Path(path), "w", encoding="utf-8") as handle:
        json.dump(net_to_json(F), handle, sort_keys=True)


def load_net_json(path, lattice: Lattice) -> CoefficientNet:
    with open(Path(path), "r", encoding="utf-8") as handle:
        data = json.load(handle)
    logger.info(f"Loaded coefficient net from {path}")
    return net_from_json(data, lattice)
