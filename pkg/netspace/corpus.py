"""
Seeded function corpora for the verification campaigns.

Corpus spec strings:
    deterministic                      characters, exponentials, Dirichlet and Fejer kernels
    random:<size>:seed=<s>[:decay=<d>] random coefficients decaying like (1+|m|)^-d
    mixed:<size>:seed=<s>              the deterministic members, then random ones up to size
    file:<path>                        coefficient lists from a JSON file

Without an explicit decay, random members cycle through the exponents 0, 1, 2. A trailing
:scale=<c> multiplies every generated member by c > 0.
"""
import itertools
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from netspace.errors import ConfigError, DomainError
from netspace.group_fourier import SU2ClassFunction, torus_from_coefficients
from netspace.lattice import Lattice
from netspace.netnorm import CoefficientNet, diagonal_net

logger = logging.getLogger(__name__)

DECAYS = (0, 1, 2)
CORPUS_KINDS = ("deterministic", "random", "mixed", "file")


@dataclass(frozen=True)
class CorpusSpec:
    kind: str
    size: int = 0
    seed: int = 0
    decay: Optional[int] = None
    path: Optional[str] = None
    scale: float = 1.0

    def decay_for(self, index: int) -> int:
        return DECAYS[index % len(DECAYS)] if self.decay is None else self.decay


def parse_corpus_spec(spec: str) -> CorpusSpec:
    """
    Parse a corpus spec string.

    Args:
        spec (str): e.g. 'random:50:seed=7', 'mixed:20:seed=0' or 'deterministic:scale=3'.

    Returns:
        CorpusSpec: The parsed spec.
    """
    spec = spec.strip()
    if spec.startswith("file:"):
        return CorpusSpec(kind="file", path=spec[len("file:"):])
    parts = spec.split(":")
    kind = parts[0]
    if kind not in ("deterministic", "random", "mixed") or (kind != "deterministic" and len(parts) < 2):
        raise ConfigError(
            f"invalid corpus '{spec}'; use deterministic[:scale=<c>], random:<size>:seed=<s>[:decay=<d>][:scale=<c>], "
            "mixed:<size>:seed=<s>[:scale=<c>] or file:<path>"
        )
    try:
        size = 0 if kind == "deterministic" else int(parts[1])
        options = dict(part.split("=", 1) for part in parts[1 if kind == "deterministic" else 2 :])
        scale = float(options.pop("scale", 1.0))
        if kind == "deterministic" and options:
            raise ValueError("deterministic corpora only take scale")
        seed = int(options.pop("seed", 0))
        decay = int(options.pop("decay")) if "decay" in options else None
    except ValueError as e:
        raise ConfigError(f"invalid corpus '{spec}': {e}")
    if options:
        raise ConfigError(f"invalid corpus '{spec}': unknown options {', '.join(sorted(options))}")
    if size < 0:
        raise ConfigError(f"invalid corpus '{spec}': size must be nonnegative")
    if not (scale > 0 and math.isfinite(scale)):
        raise ConfigError(f"invalid corpus '{spec}': scale must be positive and finite")
    if decay is not None and decay not in DECAYS:
        raise ConfigError(f"invalid corpus '{spec}': decay must be one of {DECAYS}")
    if kind == "mixed" and decay is not None:
        raise ConfigError(f"invalid corpus '{spec}': mixed corpora cycle through every decay")
    return CorpusSpec(kind=kind, size=size, seed=seed, decay=decay, scale=scale)


def _complex_normal(rng, shape=None):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _random_count(spec: CorpusSpec, deterministic: int) -> int:
    if spec.kind == "random":
        return spec.size
    if spec.kind == "mixed":
        return max(0, spec.size - deterministic)
    return 0


def _as_spec(spec) -> CorpusSpec:
    return parse_corpus_spec(spec) if isinstance(spec, str) else spec


def _scaled(members: list, scale: float) -> list:
    return members if scale == 1.0 else [(name, member.scaled(scale)) for name, member in members]


# -- torus ---------------------------------------------------------------------------------------


def _cube(n: int, radius: int):
    return list(itertools.product(range(-radius, radius + 1), repeat=n))


def _torus_deterministic(bandwidth: int, n: int) -> list:
    zero, unit = (0,) * n, (1,) + (0,) * (n - 1)
    top = (bandwidth,) + (0,) * (n - 1)
    half = max(1, bandwidth // 2)
    members = [
        ("constant", {zero: 1.0}),
        ("exponential:m=1", {unit: 1.0}),
        (f"exponential:m={bandwidth}", {top: 1.0}),
        ("dirichlet:N=2", {m: 1.0 for m in _cube(n, min(2, bandwidth))}),
        (f"dirichlet:N={half}", {m: 1.0 for m in _cube(n, half)}),
        (f"fejer:N={half}", {m: float(np.prod([1.0 - abs(c) / (half + 1) for c in m])) for m in _cube(n, half)}),
    ]
    # small bandwidths produce duplicate names
    seen, unique = set(), []
    for name, coefficients in members:
        if name not in seen:
            seen.add(name)
            unique.append((name, coefficients))
    return unique


def torus_corpus(spec, bandwidth: int, n: int = 1, grid_size: Optional[int] = None) -> list:
    """
    Trigonometric polynomials on T^n of bandwidth <= bandwidth.

    Args:
        spec (str | CorpusSpec): Corpus spec.
        bandwidth (int): Largest |m|_inf.
        n (int): Torus dimension.
        grid_size (int): Sampling grid per axis (default 4 * bandwidth + 4).

    Returns:
        list[tuple[str, TorusFunction]]: Named corpus members in a fixed order.
    """
    spec = _as_spec(spec)
    if bandwidth < 1:
        raise DomainError(f"torus corpora need bandwidth >= 1, got {bandwidth}")
    # one grid for the whole corpus, fine enough for the largest bandwidth
    grid_size = 4 * bandwidth + 4 if grid_size is None else int(grid_size)
    if spec.kind == "file":
        return [(name, torus_from_coefficients(c, n=n, M=grid_size)) for name, c in load_corpus_json(spec.path, "torus", n)]
    members = [] if spec.kind == "random" else _torus_deterministic(bandwidth, n)
    rng = np.random.default_rng(spec.seed)
    frequencies = _cube(n, bandwidth)
    sizes = np.array([max(abs(c) for c in m) for m in frequencies], dtype=np.float64)
    for index in range(_random_count(spec, len(members))):
        decay = spec.decay_for(index)
        values = _complex_normal(rng, len(frequencies)) / (1.0 + sizes) ** decay
        members.append((f"random[{index}]:decay={decay}", dict(zip(frequencies, values))))
    logger.debug(f"Built torus corpus of {len(members)} functions (bandwidth {bandwidth}, n={n})")
    return _scaled([(name, torus_from_coefficients(c, n=n, M=grid_size)) for name, c in members], spec.scale)


# -- SU(2) ---------------------------------------------------------------------------------------


def _su2_deterministic(two_l_max: int) -> list:
    half = two_l_max // 2
    members = [
        ("character:l=0", {0: 1.0}),
        ("character:l=1/2", {1: 1.0}) if two_l_max >= 1 else None,
        (f"character:2l={two_l_max}", {two_l_max: 1.0}),
        (f"dirichlet:2k={half}", {j: float(j + 1) for j in range(half + 1)}),
        (f"dirichlet:2k={two_l_max}", {j: float(j + 1) for j in range(two_l_max + 1)}),
        (f"fejer:2k={two_l_max}", {j: (1.0 - j / (two_l_max + 1)) * (j + 1) for j in range(two_l_max + 1)}),
    ]
    seen, unique = set(), []
    for member in members:
        if member is not None and member[0] not in seen:
            seen.add(member[0])
            unique.append(member)
    return unique


def su2_corpus(spec, two_l_max: int, quad: Optional[int] = None) -> list:
    """
    Class functions on SU(2) with coefficients up to 2l = two_l_max.

    Returns:
        list[tuple[str, SU2ClassFunction]]: Named corpus members in a fixed order.
    """
    spec = _as_spec(spec)
    if spec.kind == "file":
        return [(name, SU2ClassFunction(c, quad=quad)) for name, c in load_corpus_json(spec.path, "su2")]
    members = [] if spec.kind == "random" else _su2_deterministic(two_l_max)
    rng = np.random.default_rng(spec.seed)
    dims = np.arange(1, two_l_max + 2, dtype=np.float64)
    for index in range(_random_count(spec, len(members))):
        decay = spec.decay_for(index)
        values = _complex_normal(rng, two_l_max + 1) / dims**decay
        members.append((f"random[{index}]:decay={decay}", dict(enumerate(values))))
    logger.debug(f"Built SU(2) corpus of {len(members)} class functions (2l_max {two_l_max})")
    return _scaled([(name, SU2ClassFunction(c, quad=quad)) for name, c in members], spec.scale)


# -- nets ----------------------------------------------------------------------------------------


def random_net(lattice: Lattice, rng, decay: int = 0, real: bool = False, diagonal: bool = False) -> CoefficientNet:
    """
    Random net with entries of size ~ lambda_pi^(-decay).

    Args:
        lattice (Lattice): The lattice.
        rng (np.random.Generator): Randomness source.
        decay (int): Polynomial decay exponent in lambda.
        real (bool): Real entries only.
        diagonal (bool): Diagonal matrices (trace nets).

    Returns:
        CoefficientNet: The random net.
    """
    matrices = []
    for element in lattice:
        shape = (element.kappa, element.delta)
        entries = rng.standard_normal(shape) if real else _complex_normal(rng, shape)
        if diagonal:
            entries = entries * np.eye(*shape)
        matrices.append(entries / element.lam**decay)
    return CoefficientNet(lattice, tuple(matrices))


def _net_deterministic(lattice: Lattice) -> list:
    size = len(lattice)
    minimal = np.zeros(size)
    minimal[0] = 1.0
    return [
        ("minimal-element", diagonal_net(lattice, minimal)),
        ("unit-traces", diagonal_net(lattice, np.ones(size))),
        ("alternating-traces", diagonal_net(lattice, (-1.0) ** np.arange(size))),
        ("dirichlet-traces", diagonal_net(lattice, lattice.deltas.astype(np.float64))),
    ]


def net_corpus(spec, lattice: Lattice, real: bool = False) -> list:
    """Coefficient nets on a lattice: trace patterns, then random nets."""
    spec = _as_spec(spec)
    if spec.kind == "file":
        raise ConfigError("net corpora are generated; use random, mixed or deterministic")
    members = [] if spec.kind == "random" else _net_deterministic(lattice)
    rng = np.random.default_rng(spec.seed)
    for index in range(_random_count(spec, len(members))):
        decay = spec.decay_for(index)
        members.append((f"random[{index}]:decay={decay}", random_net(lattice, rng, decay=decay, real=real)))
    return _scaled(members, spec.scale)


# -- JSON ----------------------------------------------------------------------------------------


def _parse_key(key: str, frontend: str, n: int):
    try:
        if frontend == "su2":
            two_l = int(key)
            if two_l < 0:
                raise ValueError(key)
            return two_l
        parts = tuple(int(c) for c in str(key).split(","))
    except ValueError:
        raise DomainError(f"invalid coefficient key '{key}' for the {frontend} frontend")
    if len(parts) != n:
        raise DomainError(f"coefficient key '{key}' is not a point of Z^{n}")
    return parts


def load_corpus_json(path, frontend: str, n: int = 1) -> list:
    """
    Load coefficient lists from JSON.

    The file holds an array; each entry is either a coefficient map or {"name": ..., "coefficients":
    {...}}. Torus keys are 'm' or 'm1,m2,...'; SU(2) keys are the integers 2l. Values are [re, im].

    Returns:
        list[tuple[str, dict]]: Named coefficient maps.
    """
    with open(Path(path), "r", encoding="utf-8") as handle:
        raw = json.load(handle)
    if not isinstance(raw, list):
        raise DomainError(f"{path}: expected a JSON array of coefficient maps")
    corpus = []
    for index, entry in enumerate(raw):
        name, coefficients = (entry.get("name", f"file[{index}]"), entry["coefficients"]) if "coefficients" in entry else (f"file[{index}]", entry)
        parsed = {}
        for key, value in coefficients.items():
            try:
                re, im = value
            except (TypeError, ValueError):
                raise DomainError(f"{path}: coefficient '{key}' must be [re, im]")
            parsed[_parse_key(key, frontend, n)] = complex(float(re), float(im))
        corpus.append((str(name), parsed))
    logger.info(f"Loaded {len(corpus)} {frontend} functions from {path}")
    return corpus
