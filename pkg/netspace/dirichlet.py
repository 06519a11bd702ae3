"""
Dirichlet kernels D_Q = sum_{pi in Q} d_pi Tr pi(x), their L^p' norms and the characterization
constant

    C_{pM} = sup_pi lambda_pi^(1/p') sup_{Q in M, nu(Q) >= lambda_pi} ||D_Q||_{L^p'} / nu(Q).
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from netspace.config import NETSPACE_GRID_SIZE, NETSPACE_QUAD_ORDER
from netspace.errors import DomainError
from netspace.families import SubsetFamily, prefix_best
from netspace.group_fourier import (
    LOCAL_SCAN_POINTS,
    SU2ClassFunction,
    TorusFunction,
    characters,
    class_coefficients,
    class_sup_norms,
    quadrature_panels,
    su2_lp_norm,
    su2_sup_norm,
    torus_from_coefficients,
    torus_lp_norm,
    torus_rearrangement,
)
from netspace.lattice import Lattice
from netspace.netnorm import conjugate_exponent
from netspace.parallel import ordered_map
from netspace.quadrature import haar_nodes, panels_for

logger = logging.getLogger(__name__)

FRONTENDS = ("torus", "su2")
FRONTEND_KINDS = {"torus": "integer-lattice", "su2": "su2-dual"}
ROW_COLUMNS = ["pi_label", "Q_encoding", "nu_Q", "DQ_norm", "ratio"]
CHUNK_ROWS = 2048
CHUNK_CELLS = 1 << 21


def frontend_for(lattice: Lattice) -> str:
    for frontend, kind in FRONTEND_KINDS.items():
        if lattice.kind == kind:
            return frontend
    raise DomainError(f"no Fourier frontend for a '{lattice.kind}' lattice; use an integer or su2 lattice")


def _check_frontend(lattice: Lattice, frontend: str):
    if frontend not in FRONTENDS:
        raise DomainError(f"unknown frontend '{frontend}', choose one of {', '.join(FRONTENDS)}")
    if lattice.kind != FRONTEND_KINDS[frontend]:
        raise DomainError(f"the {frontend} frontend needs a {FRONTEND_KINDS[frontend]} lattice, got '{lattice.kind}'")


def default_grid_size(n: int, bandwidth: int, grid_size: Optional[int]) -> int:
    if grid_size is not None:
        return int(grid_size)
    # the full default grid is only affordable on the circle
    return NETSPACE_GRID_SIZE if n == 1 else max(32, 4 * bandwidth + 4)


@dataclass(frozen=True)
class DirichletKernel:
    """
    D_Q for a set Q of element ids, realised on the frontend matching the lattice.

    On T^n, D_Q(x) = sum_{m in Q} e^{2 pi i m.x}; on SU(2), D_Q(theta) = sum_{l in Q} (2l+1) chi_l(theta).
    """

    lattice: Lattice
    Q: tuple
    frontend: str = field(default=None)

    def __post_init__(self):
        if not self.Q:
            raise DomainError("a Dirichlet kernel needs a nonempty set Q")
        ids = tuple(sorted(set(int(i) for i in self.Q)))
        for element_id in ids:
            self.lattice.element(element_id)
        object.__setattr__(self, "Q", ids)
        frontend = frontend_for(self.lattice) if self.frontend is None else self.frontend
        _check_frontend(self.lattice, frontend)
        object.__setattr__(self, "frontend", frontend)

    @property
    def nu(self) -> float:
        return float(sum(int(self.lattice.masses[i]) for i in self.Q))

    def realize(self, grid_size: Optional[int] = None, quad: Optional[int] = None):
        """
        Args:
            grid_size (int): Torus grid size per axis.
            quad (int): SU(2) quadrature node count.

        Returns:
            TorusFunction | SU2ClassFunction: The kernel as a function on the group.
        """
        elements = [self.lattice.element(i) for i in self.Q]
        if self.frontend == "torus":
            n = self.lattice.dimension_n
            bandwidth = max(max(abs(c) for c in e.key) for e in elements)
            return torus_from_coefficients({e.key: 1.0 for e in elements}, n=n, M=default_grid_size(n, bandwidth, grid_size))
        return SU2ClassFunction({e.key[0]: float(e.delta) for e in elements}, quad=quad)


def dirichlet_norm(
    Q,
    p_prime: float,
    frontend: Optional[str] = None,
    lattice: Optional[Lattice] = None,
    grid_size: Optional[int] = None,
    quad: Optional[int] = None,
    with_uncertainty: bool = False,
):
    """
    ||D_Q||_{L^p'} on the frontend's group.

    Args:
        Q (DirichletKernel | Iterable[int]): The kernel, or element ids of lattice.
        p_prime (float): Exponent in [1, inf]; inf uses the refined grid maximum.
        frontend (str): 'torus' or 'su2' (inferred from the lattice when omitted).
        lattice (Lattice): Needed when Q is given as ids.
        grid_size (int): Torus grid size per axis.
        quad (int): SU(2) quadrature node count.
        with_uncertainty (bool): Also return the numerical uncertainty.

    Returns:
        float | tuple[float, float]: The norm (and its uncertainty).
    """
    if not isinstance(Q, DirichletKernel) and lattice is None:
        raise DomainError("element ids need the lattice they refer to")
    kernel = Q if isinstance(Q, DirichletKernel) else DirichletKernel(lattice=lattice, Q=tuple(Q), frontend=frontend)
    if not p_prime >= 1.0:
        raise DomainError(f"Dirichlet norms need p' in [1, inf], got {p_prime}")
    realized = kernel.realize(grid_size, quad)
    if kernel.frontend == "torus":
        # grid quadrature; for p' = inf the peak D_Q(0) = |Q| is a grid point
        result = (torus_lp_norm(realized, p_prime), 0.0)
    elif math.isinf(p_prime):
        result = su2_sup_norm(realized, with_error=True)
    else:
        result = su2_lp_norm(realized, p_prime, with_error=True)
    return result if with_uncertainty else result[0]


# -- characterization constant -------------------------------------------------------------------


@dataclass
class CharacterizationResult:
    value: float
    witness: Optional[dict]
    rows: list
    p: float
    frontend: str

    def to_dict(self) -> dict:
        return {"value": self.value, "witness": self.witness, "rows": self.rows, "p": self.p, "frontend": self.frontend}


def _basis(lattice: Lattice, frontend: str, p_prime: float, grid_size: Optional[int], quad: Optional[int]):
    """
    Values d_pi Tr pi(x) at the integration nodes, one row per element, with the node weights.

    For p' = inf on SU(2) the rows are instead the character coefficients d_pi e_{2l} of each
    element and the weights are None; the member maxima come from class_sup_norms.
    """
    if frontend == "torus":
        n = lattice.dimension_n
        bandwidth = max(max(abs(c) for c in e.key) for e in lattice)
        M = default_grid_size(n, bandwidth, grid_size)
        if M < 2 * bandwidth + 1:
            raise DomainError(f"grid size {M} aliases bandwidth {bandwidth}; need M >= {2 * bandwidth + 1}")
        axes = np.meshgrid(*([np.arange(M) / M] * n), indexing="ij")
        points = np.stack([axis.ravel() for axis in axes], axis=1)
        keys = np.array([e.key for e in lattice], dtype=np.float64)
        rows = np.exp(2j * np.pi * keys @ points.T)
        return rows, np.full(points.shape[0], 1.0 / M**n)
    two_l_max = int(lattice.element(len(lattice) - 1).key[0])
    present = [e.key[0] for e in lattice]
    scale = lattice.deltas.astype(np.float64)[:, None]
    if math.isinf(p_prime):
        embedding = np.zeros((len(lattice), two_l_max + 1))
        embedding[np.arange(len(lattice)), present] = lattice.deltas
        return embedding, None
    panels = quadrature_panels(two_l_max, quad, NETSPACE_QUAD_ORDER)
    nodes, weights = haar_nodes(two_l_max, NETSPACE_QUAD_ORDER, panels)
    return scale * characters(two_l_max, nodes)[present], weights


def _member_norms(masks: np.ndarray, basis: np.ndarray, weights, p_prime: float) -> np.ndarray:
    if weights is None:
        return class_sup_norms(masks @ basis, basis.shape[1] - 1)[0]
    magnitudes = np.abs(masks @ basis)
    if math.isinf(p_prime):
        return np.max(magnitudes, axis=1)
    return (magnitudes**p_prime @ weights) ** (1.0 / p_prime)


def _chunk_rows(nodes: int) -> int:
    # keeps one chunk's member-by-node product near CHUNK_CELLS complex entries
    return max(1, min(CHUNK_ROWS, CHUNK_CELLS // max(nodes, 1)))


def member_dirichlet_norms(fam: SubsetFamily, p_prime: float, frontend: Optional[str] = None, grid_size=None, quad=None, threads: int = 1):
    """
    ||D_Q||_{L^p'} for every member of a family, vectorised over chunks of members.

    Returns:
        tuple: (norms, nus, decode) in the family's canonical member order.
    """
    lattice = fam.lattice
    frontend = frontend_for(lattice) if frontend is None else frontend
    _check_frontend(lattice, frontend)
    size = len(lattice)
    # aggregating the basis vectors e_i gives the membership mask of every member
    _, nus, decode = fam.aggregate(np.zeros(size))
    count = nus.size
    basis, weights = _basis(lattice, frontend, p_prime, grid_size, quad)
    # on SU(2) with p' = inf each row costs one grid scan plus a local scan per character
    nodes = basis.shape[1] if weights is not None else (8 + LOCAL_SCAN_POINTS) * basis.shape[1] + 1
    rows_per_chunk = _chunk_rows(nodes)
    logger.debug(f"Evaluating {count} Dirichlet kernels on {nodes} nodes, {rows_per_chunk} per chunk")

    def chunk_norms(start):
        stop = min(start + rows_per_chunk, count)
        masks = np.zeros((stop - start, size))
        for row, index in enumerate(range(start, stop)):
            masks[row, list(decode(index))] = 1.0
        return _member_norms(masks, basis, weights, p_prime)

    pieces = ordered_map(chunk_norms, range(0, count, rows_per_chunk), threads)
    norms = np.concatenate(pieces) if pieces else np.zeros(0)
    return norms, nus, decode


def _encode(lattice: Lattice, member) -> str:
    return ";".join(lattice.labels(member))


def characterization_constant(
    lat: Lattice,
    fam: SubsetFamily,
    p: float,
    frontend: Optional[str] = None,
    grid_size: Optional[int] = None,
    quad: Optional[int] = None,
    threads: int = 1,
) -> CharacterizationResult:
    """
    The characterization constant C_{pM} with its achieving (pi, Q).

    Args:
        lat (Lattice): Truncated dual (integer lattice for the torus, SU(2) dual for su2).
        fam (SubsetFamily): Family M over lat.
        p (float): Exponent in (1, inf]; the kernels are measured in L^p'.
        frontend (str): 'torus' or 'su2' (inferred from the lattice when omitted).
        grid_size (int): Torus grid size per axis.
        quad (int): SU(2) quadrature node count.
        threads (int): Worker threads for the kernel evaluations.

    Returns:
        CharacterizationResult: Value, witness and one row per pi with its best member.
    """
    if fam.lattice != lat:
        raise DomainError("family and lattice differ")
    if not p > 1.0:
        raise DomainError(f"the characterization constant needs p in (1, inf], got {p}")
    p_prime = conjugate_exponent(p)
    norms, nus, decode = member_dirichlet_norms(fam, p_prime, frontend, grid_size, quad, threads)
    frontend = frontend_for(lat) if frontend is None else frontend
    rows, best_value, witness = [], 0.0, None
    if nus.size:
        sorted_nus, running, best_index = prefix_best(norms / nus, nus)
    for element in lat:
        admissible = int(np.searchsorted(-sorted_nus, -element.lam, side="right")) if nus.size else 0
        if admissible == 0:
            continue
        index = int(best_index[admissible - 1])
        member = decode(index)
        value = element.lam ** (1.0 / p_prime) * float(running[admissible - 1])
        row = {
            "pi_label": element.label,
            "Q_encoding": _encode(lat, member),
            "nu_Q": float(nus[index]),
            "DQ_norm": float(norms[index]),
            "ratio": float(value),
        }
        rows.append(row)
        if value > best_value:
            best_value, witness = value, row
    logger.info(f"C_pM on {frontend} with p={p}: {best_value} over {nus.size} members")
    return CharacterizationResult(value=float(best_value), witness=witness, rows=rows, p=p, frontend=frontend)


# -- torus rearrangement bound -------------------------------------------------------------------


def _is_progression(frequencies: list) -> bool:
    steps = np.diff(sorted(frequencies))
    return steps.size == 0 or bool(np.all(steps == steps[0]) and steps[0] > 0)


def rearrangement_bound_check(Q, p: float, grid_size: int = 4096) -> float:
    """
    sup_{1/M < t <= 1} D_Q*(t) t^(1/p') / |Q|^(1/p) for an arithmetic progression Q in Z.

    Args:
        Q (Iterable[int]): Frequencies of the progression.
        p (float): Exponent in [1, inf).
        grid_size (int): Grid size M used for the rearrangement.

    Returns:
        float: The empirical constant.
    """
    frequencies = sorted(set(int(m) for m in Q))
    if not frequencies:
        raise DomainError("a Dirichlet kernel needs a nonempty set Q")
    if not _is_progression(frequencies):
        raise DomainError(f"{frequencies} is not an arithmetic progression")
    if not 1.0 <= p < math.inf:
        raise DomainError(f"the rearrangement bound needs 1 <= p < inf, got p={p}")
    kernel = torus_from_coefficients({m: 1.0 for m in frequencies}, n=1, M=grid_size)
    star = torus_rearrangement(kernel)
    p_prime = conjugate_exponent(p)
    a = 0.0 if math.isinf(p_prime) else 1.0 / p_prime
    return star.sup_weighted(a, t_min=1.0 / grid_size) / len(frequencies) ** (1.0 / p)


# -- pairing identity ----------------------------------------------------------------------------


def pairing_identity_gap(f, Q, lattice: Lattice) -> float:
    """
    |(f, D_Q)_{L^2} - sum_{pi in Q} d_pi Tr f^(pi)|, with the inner product by quadrature and the
    right side from the frontend's Fourier coefficients.

    Args:
        f (TorusFunction | SU2ClassFunction): The function.
        Q (Iterable[int]): Element ids of lattice.
        lattice (Lattice): Dual truncation of the function's group.

    Returns:
        float: The absolute gap.
    """
    kernel = DirichletKernel(lattice=lattice, Q=tuple(Q))
    elements = [lattice.element(i) for i in kernel.Q]
    if isinstance(f, TorusFunction):
        if kernel.frontend != "torus" or lattice.dimension_n != f.n:
            raise DomainError("torus functions pair with Dirichlet kernels on an integer lattice of the same dimension")
        D = kernel.realize(grid_size=f.M)
        inner = np.mean(f.grid * np.conj(D.grid))
        spectrum = np.fft.fftn(f.grid) / f.M**f.n
        traces = sum(spectrum[tuple(c % f.M for c in e.key)] for e in elements)
        return float(abs(inner - traces))
    if not isinstance(f, SU2ClassFunction) or kernel.frontend != "su2":
        raise DomainError("SU(2) class functions pair with Dirichlet kernels on the SU(2) dual")
    D = kernel.realize(quad=f.quad)
    two_l_max = max(f.two_l_max, D.two_l_max)
    nodes, weights = haar_nodes(two_l_max, NETSPACE_QUAD_ORDER, panels_for(two_l_max))
    inner = np.sum(weights * f.evaluate(nodes) * np.conj(D.evaluate(nodes)))
    coefficients = class_coefficients(f.evaluate, two_l_max, f.quad)
    traces = sum(e.delta * coefficients[e.key[0]] for e in elements)
    return float(abs(inner - traces))
