"""
Decreasing rearrangements of finitely supported nonnegative functions.

A StepFunction stores f* as (value, mass) steps with strictly decreasing values. Lebesgue and
Lorentz norms are evaluated in closed form per step:

    ||f||_{p,q}^q = (q/p) int_0^inf (t^(1/p) f*(t))^q dt/t = sum_i v_i^q (T_i^{q/p} - T_{i-1}^{q/p})
    ||f||_{p,inf} = max_i v_i T_i^{1/p}

with T_i = m_1 + ... + m_i. The (q/p) normalisation makes ||1_E||_{p,q} = |E|^(1/p) for every q.
"""
import math
from dataclasses import dataclass

import numpy as np

from netspace.errors import DomainError


@dataclass(frozen=True, eq=False)
class StepFunction:
    values: np.ndarray
    masses: np.ndarray
    total_mass: float

    @classmethod
    def from_atoms(cls, values, masses, total_mass=None) -> "StepFunction":
        """
        Build f* from atoms (|value|, mass).

        Args:
            values (array-like): Nonnegative atom values.
            masses (array-like): Positive atom masses.
            total_mass (float): Measure of the whole space (defaults to the sum of masses).

        Returns:
            StepFunction: Canonical form: decreasing values, equal values merged, zero values dropped.
        """
        values = np.abs(np.asarray(values, dtype=np.float64)).ravel()
        masses = np.asarray(masses, dtype=np.float64).ravel()
        if masses.size == 1 and values.size > 1:
            masses = np.full(values.size, masses[0])
        if values.shape != masses.shape:
            raise DomainError("values and masses must have the same length")
        if np.any(masses <= 0):
            raise DomainError("step masses must be positive")
        total = float(masses.sum()) if total_mass is None else float(total_mass)
        keep = values > 0
        values, masses = values[keep], masses[keep]
        if values.size == 0:
            return cls(values=np.zeros(0), masses=np.zeros(0), total_mass=total)
        order = np.argsort(-values, kind="stable")
        values, masses = values[order], masses[order]
        unique_values, starts = np.unique(-values, return_index=True)
        merged_masses = np.add.reduceat(masses, starts)
        return cls(values=-unique_values, masses=merged_masses, total_mass=total)

    @classmethod
    def from_samples(cls, samples, cell_mass: float) -> "StepFunction":
        """Rearrangement of |samples| with each sample carrying the same mass."""
        samples = np.abs(np.asarray(samples)).ravel()
        return cls.from_atoms(samples, np.full(samples.size, cell_mass), total_mass=samples.size * cell_mass)

    @property
    def breakpoints(self) -> np.ndarray:
        return np.cumsum(self.masses)

    def rearrangement(self, t: float) -> float:
        """f*(t) (right-continuous, 0 beyond the support)."""
        index = np.searchsorted(self.breakpoints, t, side="right")
        return float(self.values[index]) if index < self.values.size else 0.0

    def lp_norm(self, p: float) -> float:
        if self.values.size == 0:
            return 0.0
        if math.isinf(p):
            return float(self.values[0])
        return float(np.sum(self.values**p * self.masses) ** (1.0 / p))

    def lorentz_norm(self, p: float, q: float, normalized: bool = True) -> float:
        """
        Lorentz (p, q) norm in closed form; normalized=False drops the (q/p) factor and returns
        the plain L^q(dt/t) norm of t^(1/p) f*(t).
        """
        if not 0 < p < math.inf:
            raise DomainError(f"Lorentz norms need 0 < p < inf, got p={p}")
        if q < 1:
            raise DomainError(f"Lorentz norms need q >= 1, got q={q}")
        if self.values.size == 0:
            return 0.0
        ends = self.breakpoints
        if math.isinf(q):
            return float(np.max(self.values * ends ** (1.0 / p)))
        starts = np.concatenate(([0.0], ends[:-1]))
        exponent = q / p
        pieces = self.values**q * (ends**exponent - starts**exponent)
        scale = 1.0 if normalized else p / q
        return float((scale * math.fsum(pieces)) ** (1.0 / q))

    def sup_weighted(self, a: float, t_min: float = 0.0) -> float:
        """sup over t in (t_min, total] of t^a f*(t); each step contributes v_i T_i^a."""
        if self.values.size == 0:
            return 0.0
        ends = self.breakpoints
        keep = ends > t_min
        if not np.any(keep):
            return 0.0
        return float(np.max(self.values[keep] * ends[keep] ** a))


def pairing_upper(f: StepFunction, g: StepFunction) -> float:
    """Integral of f* g* over (0, inf), the rearrangement upper bound for the integral of |fg|."""
    if f.values.size == 0 or g.values.size == 0:
        return 0.0
    cuts = np.union1d(f.breakpoints, g.breakpoints)
    cuts = cuts[cuts <= min(f.breakpoints[-1], g.breakpoints[-1])]
    lefts = np.concatenate(([0.0], cuts[:-1]))
    widths = cuts - lefts
    f_vals = f.values[np.searchsorted(f.breakpoints, lefts, side="right")]
    g_vals = g.values[np.searchsorted(g.breakpoints, lefts, side="right")]
    return float(math.fsum(f_vals * g_vals * widths))


def lorentz_holder_constant(p: float, q: float) -> float:
    """
    C with int f* g* <= C ||f||_{p,q} ||g||_{p',q'} under the (q/p) normalisation:
    C = (p/q)^(1/q) (p'/q')^(1/q'), a factor of 1 standing for each infinite secondary exponent.
    """
    if not 1.0 < p < math.inf or q < 1.0:
        raise DomainError(f"the Lorentz Hoelder constant needs 1 < p < inf and q >= 1, got p={p}, q={q}")
    p_prime = p / (p - 1.0)
    q_prime = math.inf if q == 1.0 else (1.0 if math.isinf(q) else q / (q - 1.0))
    factor = 1.0 if math.isinf(q) else (p / q) ** (1.0 / q)
    dual = 1.0 if math.isinf(q_prime) else (p_prime / q_prime) ** (1.0 / q_prime)
    return factor * dual
