"""
Fourier frontends: the torus T^n through grid DFTs and SU(2) class functions through Weyl
characters and conjugacy-class quadrature.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from netspace.config import NETSPACE_QUAD_ORDER
from netspace.errors import DomainError
from netspace.lattice import make_integer_lattice, make_su2_dual
from netspace.netnorm import CoefficientNet, diagonal_net
from netspace.quadrature import haar_integral, haar_nodes, panels_for
from netspace.rearrangement import StepFunction

logger = logging.getLogger(__name__)

LOCAL_SCAN_POINTS = 65


# -- torus ---------------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TorusFunction:
    """Samples of a function on T^n at the uniform grid j/M, j in {0..M-1}^n."""

    n: int
    M: int
    grid: np.ndarray
    bandwidth: Optional[int] = None

    def __post_init__(self):
        if self.grid.shape != (self.M,) * self.n:
            raise DomainError(f"grid has shape {self.grid.shape}, expected {(self.M,) * self.n}")

    @property
    def cell_mass(self) -> float:
        return 1.0 / self.M**self.n

    def scaled(self, c) -> "TorusFunction":
        return TorusFunction(self.n, self.M, c * self.grid, self.bandwidth)


def _as_index(m, n: int) -> tuple:
    return (int(m),) if n == 1 and np.isscalar(m) else tuple(int(c) for c in m)


def torus_from_coefficients(coeffs: dict, n: int = 1, M: Optional[int] = None) -> TorusFunction:
    """
    Synthesise f(x) = sum_m c_m e^{2 pi i m.x} on the grid.

    Args:
        coeffs (dict): Frequency (int for n=1, tuple otherwise) -> complex coefficient.
        n (int): Torus dimension.
        M (int): Grid size per axis; defaults to 4 * bandwidth + 4 so |f|^2 is integrated exactly.

    Returns:
        TorusFunction: Sampled trigonometric polynomial.
    """
    indices = {_as_index(m, n): complex(c) for m, c in coeffs.items()}
    bandwidth = max((max(abs(x) for x in m) for m in indices), default=0)
    M = 4 * bandwidth + 4 if M is None else int(M)
    if M < 2 * bandwidth + 1:
        raise DomainError(f"grid size {M} aliases bandwidth {bandwidth}; need M >= {2 * bandwidth + 1}")
    spectrum = np.zeros((M,) * n, dtype=np.complex128)
    for m, c in indices.items():
        spectrum[tuple(x % M for x in m)] += c
    grid = np.fft.ifftn(spectrum) * M**n
    return TorusFunction(n=n, M=M, grid=grid, bandwidth=bandwidth)


def torus_fourier(f: TorusFunction, radius: int, lambda_rule: str = "rank") -> CoefficientNet:
    """
    Fourier coefficients (1/M^n) sum_j f(j/M) e^{-2 pi i m.j/M} for |m|_inf <= radius.

    Args:
        f (TorusFunction): Sampled function.
        radius (int): Truncation radius K of the coefficient lattice.
        lambda_rule (str): Lambda rule of the integer lattice.

    Returns:
        CoefficientNet: 1x1 matrices over make_integer_lattice(n, radius, lambda_rule).
    """
    return fourier_net(f, make_integer_lattice(f.n, radius, lambda_rule))


def torus_lp_norm(f: TorusFunction, p: float) -> float:
    """L^p norm by equal-weight grid quadrature (p = inf gives the grid maximum)."""
    if p < 1:
        raise DomainError(f"L^p norms need p >= 1, got p={p}")
    magnitudes = np.abs(f.grid)
    if math.isinf(p):
        return float(magnitudes.max())
    return float(np.mean(magnitudes**p) ** (1.0 / p))


def torus_rearrangement(f: TorusFunction) -> StepFunction:
    return StepFunction.from_samples(f.grid, f.cell_mass)


def torus_lorentz_norm(f: TorusFunction, p: float, q: float) -> float:
    """L^{p,q} norm from the rearrangement of the grid samples, each carrying mass 1/M^n."""
    if not 1.0 <= p < math.inf:
        raise DomainError(f"Lorentz norms need 1 <= p < inf, got p={p}")
    return torus_rearrangement(f).lorentz_norm(p, q)


# -- SU(2) ---------------------------------------------------------------------------------------


def characters(two_l_max: int, theta) -> np.ndarray:
    """
    chi_l(theta) = sin((2l+1) theta) / sin(theta) for 2l = 0..two_l_max.

    Returns:
        np.ndarray: Shape (two_l_max + 1, len(theta)); the removable singularities at 0 and pi
        take their limits (2l+1) and (-1)^{2l} (2l+1).
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    k = np.arange(1, two_l_max + 2, dtype=np.float64)[:, None]
    s = np.sin(theta)[None, :]
    regular = np.abs(s) > 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.sin(k * theta[None, :]) / s
    limit = k * np.sign(np.cos(theta))[None, :] ** (k - 1)
    return np.where(regular, ratio, limit)


@dataclass(frozen=True, eq=False)
class SU2ClassFunction:
    """
    f(theta) = sum_l c_l chi_l(theta), stored as {2l: c_l}.

    Attributes:
        coeffs (dict): Character coefficients keyed by the integer 2l.
        quad (int): Quadrature node count; None picks the certified default for l_max.
    """

    coeffs: dict
    quad: Optional[int] = None

    def __post_init__(self):
        if any(int(key) != key or key < 0 for key in self.coeffs):
            raise DomainError("SU(2) coefficient keys are the nonnegative integers 2l")

    @property
    def two_l_max(self) -> int:
        return max(self.coeffs, default=0)

    def coefficient_vector(self) -> np.ndarray:
        vector = np.zeros(self.two_l_max + 1, dtype=np.complex128)
        for key, c in self.coeffs.items():
            vector[int(key)] = c
        return vector

    def evaluate(self, theta) -> np.ndarray:
        return self.coefficient_vector() @ characters(self.two_l_max, theta)

    def scaled(self, c) -> "SU2ClassFunction":
        return SU2ClassFunction({key: c * value for key, value in self.coeffs.items()}, self.quad)


def required_nodes(two_l_max: int) -> int:
    return 4 * (two_l_max + 1)


def quadrature_panels(two_l_max: int, quad: Optional[int], order: int) -> int:
    if quad is None:
        return panels_for(two_l_max)
    if quad < required_nodes(two_l_max):
        raise DomainError(f"{quad} quadrature nodes are not enough for l_max={two_l_max / 2}; need at least {required_nodes(two_l_max)}")
    return max(2, math.ceil(quad / order))


def class_coefficients(func, two_l_max: int, quad: Optional[int] = None, order: int = NETSPACE_QUAD_ORDER) -> np.ndarray:
    """
    c_l = (2/pi) int_0^pi f(theta) chi_l(theta) sin^2(theta) d theta for 2l = 0..two_l_max.

    Args:
        func (callable): Vectorised class function of theta.
        two_l_max (int): Largest 2l.
        quad (int): Node count (None for the default rule).
        order (int): Gauss points per panel.

    Returns:
        np.ndarray: Complex coefficients.
    """
    nodes, weights = haar_nodes(two_l_max, order, quadrature_panels(two_l_max, quad, order))
    values = func(nodes)
    return characters(two_l_max, nodes) @ (weights * values)


def su2_class_fourier(f: SU2ClassFunction, two_l_max: Optional[int] = None) -> CoefficientNet:
    """
    Fourier coefficients of a class function: f^(l) = (c_l / (2l+1)) I_{2l+1}, so Tr f^(l) = c_l.

    Args:
        f (SU2ClassFunction): The class function (evaluated on the quadrature nodes).
        two_l_max (int): Truncation of the dual (defaults to the function's own l_max).

    Returns:
        CoefficientNet: Net over make_su2_dual(two_l_max / 2).
    """
    top = f.two_l_max if two_l_max is None else int(two_l_max)
    rule_top = max(top, f.two_l_max)
    c = class_coefficients(f.evaluate, rule_top, f.quad)[: top + 1]
    return diagonal_net(make_su2_dual(top / 2), c)


def su2_lp_norm(f: SU2ClassFunction, p: float, with_error: bool = False):
    """
    ((2/pi) int_0^pi |f(theta)|^p sin^2(theta) d theta)^(1/p).

    Args:
        f (SU2ClassFunction): The class function.
        p (float): Exponent, 1 <= p < inf.
        with_error (bool): Also return the quadrature error estimate of the norm.

    Returns:
        float | tuple[float, float]: Norm (and its error estimate).
    """
    if not 1.0 <= p < math.inf:
        raise DomainError(f"L^p norms need 1 <= p < inf, got p={p}")
    two_l_max = f.two_l_max
    integral, error = haar_integral(lambda theta: np.abs(f.evaluate(theta)) ** p, two_l_max, panels=quadrature_panels(two_l_max, f.quad, NETSPACE_QUAD_ORDER))
    integral = max(float(np.real(integral)), 0.0)
    value = integral ** (1.0 / p)
    if not with_error:
        return value
    norm_error = float(error) / (p * integral ** (1.0 - 1.0 / p)) if integral > 0 else float(error) ** (1.0 / p)
    return value, norm_error


# -- frontend dispatch ---------------------------------------------------------------------------


def fourier_net(f, lattice) -> CoefficientNet:
    """
    Fourier coefficients of f over any truncation of its group's dual.

    Args:
        f (TorusFunction | SU2ClassFunction): The function.
        lattice (Lattice): Integer lattice of the same dimension, or an SU(2) dual.

    Returns:
        CoefficientNet: f^(pi) for every pi in the lattice.
    """
    if isinstance(f, TorusFunction):
        if lattice.kind != "integer-lattice" or lattice.dimension_n != f.n:
            raise DomainError(f"torus functions on T^{f.n} need an integer lattice of dimension {f.n}")
        radius = max(max(abs(c) for c in e.key) for e in lattice)
        if f.M < 2 * radius + 1:
            raise DomainError(f"radius {radius} aliases on a grid of size {f.M}; need M >= {2 * radius + 1}")
        spectrum = np.fft.fftn(f.grid) / f.M**f.n
        return CoefficientNet(lattice, tuple(np.array([[spectrum[tuple(c % f.M for c in e.key)]]]) for e in lattice))
    if isinstance(f, SU2ClassFunction):
        if lattice.kind != "su2-dual":
            raise DomainError("SU(2) class functions need an su2-dual lattice")
        top = int(lattice.element(len(lattice) - 1).key[0])
        c = class_coefficients(f.evaluate, max(top, f.two_l_max), f.quad)
        return diagonal_net(lattice, [c[e.key[0]] for e in lattice])
    raise DomainError(f"no Fourier frontend for {type(f).__name__}")


def class_sup_norms(coefficients: np.ndarray, two_l_max: int):
    """
    sup |sum_l c_l chi_l| for each row of a coefficient matrix.

    The maximum over a uniform grid of 8 (2 l_max + 1) + 1 points is refined by a dense scan
    around the best grid point, so every value is attained by the function. Each chi_l is a
    cosine polynomial of degree 2l, and a degree-D polynomial sampled with spacing h has
    sup <= grid max / cos(D h / 2); the returned bound is that gap.

    Args:
        coefficients (np.ndarray): Shape (rows, two_l_max + 1), indexed by 2l.
        two_l_max (int): Largest 2l.

    Returns:
        tuple[np.ndarray, np.ndarray]: Attained maxima and their error bounds.
    """
    coefficients = np.atleast_2d(np.asarray(coefficients, dtype=np.complex128))
    rows = coefficients.shape[0]
    points = 8 * (two_l_max + 1) + 1
    grid = np.linspace(0.0, math.pi, points)
    h = math.pi / (points - 1)
    values = np.abs(coefficients @ characters(two_l_max, grid))
    peak = np.argmax(values, axis=1)
    offsets = np.linspace(-h, h, LOCAL_SCAN_POINTS)
    local = np.clip(grid[peak][:, None] + offsets[None, :], 0.0, math.pi)
    local_chars = characters(two_l_max, local.ravel()).reshape(two_l_max + 1, rows, LOCAL_SCAN_POINTS)
    local_values = np.abs(np.einsum("rk,krj->rj", coefficients, local_chars))
    maxima = np.maximum(values[np.arange(rows), peak], local_values.max(axis=1))
    bounds = maxima * (1.0 / math.cos(two_l_max * h / 2.0) - 1.0)
    return maxima, bounds


def su2_sup_norm(f: SU2ClassFunction, with_error: bool = False):
    """Maximum of |f|, attained on a refined grid; the error is a bound on the remaining gap."""
    maxima, bounds = class_sup_norms(f.coefficient_vector()[None, :], f.two_l_max)
    value, error = float(maxima[0]), float(bounds[0])
    return (value, error) if with_error else value


def lp_norm(f, p: float) -> float:
    """L^p norm on the function's group, p in [1, inf]."""
    if isinstance(f, TorusFunction):
        return torus_lp_norm(f, p)
    if math.isinf(p):
        return su2_sup_norm(f)
    return su2_lp_norm(f, p)
