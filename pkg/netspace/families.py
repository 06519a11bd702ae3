"""
Subset families M over a lattice truncation.

Members are canonical tuples of element ids (sorted ascending). Enumeration is deterministic:
lexicographic on the canonical tuples.
"""
import itertools
import json
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from netspace.config import NETSPACE_EXACT_CAP
from netspace.errors import CapacityError, DomainError
from netspace.lattice import Lattice

logger = logging.getLogger(__name__)

FAMILY_KINDS = ("all-subsets", "arithmetic-progressions", "segments", "explicit-list")
FAMILY_ALIASES = {
    "all-subsets": "all-subsets",
    "progressions": "arithmetic-progressions",
    "arithmetic-progressions": "arithmetic-progressions",
    "segments": "segments",
    "explicit": "explicit-list",
    "explicit-list": "explicit-list",
}


def capacity_message(size: int, cap: int) -> str:
    return f"exact engine capped at {cap} elements (all-subsets family on {size} elements); use the heuristic engine"


@dataclass(frozen=True)
class SubsetFamily:
    """
    A lazily enumerable collection of finite nonempty subsets of a lattice truncation.

    Attributes:
        kind (str): One of FAMILY_KINDS.
        lattice (Lattice): The truncation the members live in.
        max_cardinality (int): Members larger than this are skipped.
        max_count (int): Enumerating more members than this raises CapacityError.
        hard_cap (int): Largest lattice on which all-subsets may be enumerated.
        explicit (tuple): Members of an explicit-list family.
        directions (tuple): Step vectors for progressions in Z^n (default: all lexicographically
            positive vectors with |v|_inf <= 2K).
        segment_measure (str): 'lattice' (nu of the segment) or 'lambda' (lambda of its top element).
    """

    kind: str
    lattice: Lattice
    max_cardinality: Optional[int] = None
    max_count: Optional[int] = None
    hard_cap: int = NETSPACE_EXACT_CAP
    explicit: Optional[tuple] = None
    directions: Optional[tuple] = None
    segment_measure: str = "lattice"

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise DomainError(f"unknown family kind '{self.kind}', choose one of {', '.join(FAMILY_KINDS)}")
        if self.segment_measure not in ("lattice", "lambda"):
            raise DomainError(f"segment_measure must be 'lattice' or 'lambda', got '{self.segment_measure}'")
        if self.kind == "explicit-list":
            if not self.explicit:
                raise DomainError("an explicit-list family needs at least one member")
            canonical = []
            for member in self.explicit:
                ids = tuple(sorted(set(int(i) for i in member)))
                if not ids:
                    raise DomainError("explicit-list members must be nonempty")
                for element_id in ids:
                    self.lattice.element(element_id)
                canonical.append(ids)
            object.__setattr__(self, "explicit", tuple(sorted(set(canonical))))
        if self.kind == "arithmetic-progressions" and self.lattice.kind != "integer-lattice":
            raise DomainError("arithmetic progressions need an integer lattice (coordinates in Z^n)")

    # -- measure -----------------------------------------------------------------------------

    def measure(self, member) -> float:
        """nu(Q) as used by this family (the segment override applies to segments only)."""
        if self.kind == "segments" and self.segment_measure == "lambda":
            return float(self.lattice.element(member[-1]).lam)
        return float(sum(int(self.lattice.masses[i]) for i in member))

    # -- enumeration -------------------------------------------------------------------------

    def _raw_members(self) -> Iterator[tuple]:
        size = len(self.lattice)
        if self.kind == "all-subsets":
            if size > self.hard_cap:
                raise CapacityError(capacity_message(size, self.hard_cap))
            yield from _lex_subsets(size, self.max_cardinality)
        elif self.kind == "segments":
            lams = self.lattice.lams
            for last in range(size):
                if last == size - 1 or lams[last + 1] > lams[last]:
                    yield tuple(range(last + 1))
        elif self.kind == "arithmetic-progressions":
            yield from self._progressions
        else:
            yield from self.explicit

    def members(self) -> Iterator[tuple]:
        """Every member that fits the caps, in deterministic order."""
        emitted = 0
        for member in self._raw_members():
            if self.max_cardinality is not None and len(member) > self.max_cardinality:
                continue
            emitted += 1
            if self.max_count is not None and emitted > self.max_count:
                raise CapacityError(f"family '{self.kind}' has more than max_count={self.max_count} members")
            yield member

    @cached_property
    def _progressions(self) -> tuple:
        lat = self.lattice
        n = lat.dimension_n
        radius = max(max(abs(c) for c in e.key) for e in lat) if len(lat) > 1 else 0
        if self.directions is not None:
            steps = [tuple(int(c) for c in v) for v in self.directions]
            if any(not any(v) or len(v) != n for v in steps):
                raise DomainError(f"progression directions must be nonzero vectors in Z^{n}")
        else:
            steps = [v for v in itertools.product(range(-2 * radius, 2 * radius + 1), repeat=n) if _lex_positive(v)]
        found = set()
        for start in lat:
            found.add((start.id,))
            for v in steps:
                ids = [start.id]
                point = tuple(a + b for a, b in zip(start.key, v))
                nxt = lat.by_key(point)
                while nxt is not None:
                    ids.append(nxt.id)
                    found.add(tuple(sorted(ids)))
                    point = tuple(a + b for a, b in zip(point, v))
                    nxt = lat.by_key(point)
        logger.debug(f"Enumerated {len(found)} arithmetic progressions on {len(lat)} points")
        return tuple(sorted(found))

    # -- aggregation used by the averaging engines -------------------------------------------

    @cached_property
    def member_index(self):
        """
        Flattened member table: (members, flat ids, offsets, nu per member).

        Not available for all-subsets families, which the engines aggregate by bitmask doubling.
        """
        if self.kind == "all-subsets":
            raise DomainError("all-subsets families are aggregated by bitmask, not by member table")
        members = list(self.members())
        flat = np.fromiter(itertools.chain.from_iterable(members), dtype=np.int64)
        lengths = np.array([len(m) for m in members], dtype=np.int64)
        offsets = np.concatenate(([0], np.cumsum(lengths)[:-1])).astype(np.int64)
        nus = np.array([self.measure(m) for m in members], dtype=np.float64)
        return members, flat, offsets, nus

    def aggregate(self, values: np.ndarray):
        """
        Sums of per-element values over every member, with the member measures.

        Args:
            values (np.ndarray): One complex value per lattice element.

        Returns:
            tuple: (sums, nus, decode) where decode(index) returns the member tuple.
        """
        if self.kind == "all-subsets":
            return _bitmask_aggregate(self.lattice, values, self.max_cardinality, self.hard_cap)
        members, flat, offsets, nus = self.member_index
        sums = np.add.reduceat(np.asarray(values)[flat], offsets) if members else np.zeros(0, dtype=complex)
        return sums, nus, members.__getitem__


def _lex_positive(v) -> bool:
    for c in v:
        if c != 0:
            return c > 0
    return False


def _lex_subsets(size: int, max_cardinality: Optional[int]) -> Iterator[tuple]:
    def extend(prefix, start):
        for i in range(start, size):
            member = prefix + (i,)
            yield member
            if max_cardinality is None or len(member) < max_cardinality:
                yield from extend(member, i + 1)

    yield from extend((), 0)


def _bitmask_aggregate(lat: Lattice, values, max_cardinality, hard_cap):
    size = len(lat)
    if size > hard_cap:
        raise CapacityError(capacity_message(size, hard_cap))
    values = np.asarray(values, dtype=np.complex128)
    sums = np.zeros(1, dtype=np.complex128)
    nus = np.zeros(1, dtype=np.float64)
    counts = np.zeros(1, dtype=np.int64)
    # bit i of the index <-> element i
    for i in range(size):
        sums = np.concatenate((sums, sums + values[i]))
        nus = np.concatenate((nus, nus + float(lat.masses[i])))
        counts = np.concatenate((counts, counts + 1))
    keep = np.arange(1, sums.size)
    if max_cardinality is not None:
        keep = keep[counts[1:] <= max_cardinality]

    def decode(index):
        mask = int(keep[index])
        return tuple(i for i in range(size) if mask >> i & 1)

    logger.debug(f"Aggregated {keep.size} subsets of a {size}-element lattice")
    return sums[keep], nus[keep], decode


def prefix_best(ratios: np.ndarray, nus: np.ndarray):
    """
    Best ratio among the members admissible at each capacity, largest measure first.

    Args:
        ratios (np.ndarray): One ratio per member, in canonical member order.
        nus (np.ndarray): Member measures in the same order.

    Returns:
        tuple: (sorted_nus, running, best_index). sorted_nus is decreasing; running[k] is the
        largest ratio among the first k+1 members by measure and best_index[k] the canonical
        index achieving it (the smallest one on ties).
    """
    order = np.argsort(-nus, kind="stable")
    indices = np.arange(ratios.size)
    # rank by ratio, then by decreasing canonical index: the top rank is the earliest maximiser
    by_key = np.lexsort((-indices, ratios))
    rank = np.empty(ratios.size, dtype=np.int64)
    rank[by_key] = indices
    best_index = by_key[np.maximum.accumulate(rank[order])]
    return nus[order], ratios[best_index], best_index


def enumerate_with_capacity(fam: SubsetFamily, min_nu: float) -> Iterator[tuple]:
    """
    Stream the members Q of a family with nu(Q) >= min_nu.

    Args:
        fam (SubsetFamily): The family.
        min_nu (float): Capacity floor (>= 0).

    Yields:
        tuple: Canonical member tuples in deterministic order.
    """
    if min_nu < 0:
        raise DomainError(f"min_nu must be nonnegative, got {min_nu}")
    for member in fam.members():
        if fam.measure(member) >= min_nu:
            yield member


def family_contains(fam_a: SubsetFamily, fam_b: SubsetFamily) -> bool:
    """True iff every member of fam_a is a member of fam_b."""
    if fam_a.lattice != fam_b.lattice:
        raise DomainError("families live on different lattices")
    if fam_b.kind == "all-subsets" and fam_b.max_cardinality is None:
        # every member of any family is a finite nonempty subset of the truncation
        return True
    members_b = set(fam_b.members())
    return all(member in members_b for member in fam_a.members())


def load_family_json(path, lattice: Lattice, **caps) -> SubsetFamily:
    """
    Load an explicit-list family from a JSON array of arrays of element labels.

    Args:
        path (str | Path): JSON file.
        lattice (Lattice): Lattice the labels refer to.

    Returns:
        SubsetFamily: explicit-list family.
    """
    with open(Path(path), "r", encoding="utf-8") as handle:
        raw = json.load(handle)
    if not isinstance(raw, list) or not all(isinstance(member, list) for member in raw):
        raise DomainError(f"{path}: expected a JSON array of arrays of element labels")
    members = tuple(tuple(lattice.by_label(str(label)).id for label in member) for member in raw)
    return SubsetFamily(kind="explicit-list", lattice=lattice, explicit=members, **caps)


def make_family(kind: str, lattice: Lattice, family_file=None, **options) -> SubsetFamily:
    """Build a family from a CLI/API kind name ('progressions', 'explicit', ...)."""
    try:
        canonical = FAMILY_ALIASES[kind]
    except KeyError:
        raise DomainError(f"unknown family '{kind}'")
    if canonical == "explicit-list":
        return load_family_json(family_file, lattice, **options)
    return SubsetFamily(kind=canonical, lattice=lattice, **options)
