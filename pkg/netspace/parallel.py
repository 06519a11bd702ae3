"""Ordered worker-pool map used by the campaigns and the characterization engine."""
import logging
from concurrent.futures import ThreadPoolExecutor

from netspace.config import NETSPACE_THREADS

logger = logging.getLogger(__name__)


def ordered_map(func, items, threads: int = None) -> list:
    """
    Apply func to every item and return the results in input order.

    Args:
        func (callable): Pure function of one item.
        items (Iterable): Inputs.
        threads (int): Worker count; 1 runs inline (the reference execution). Defaults to NETSPACE_THREADS.

    Returns:
        list: func(item) for each item, in the order of items.
    """
    threads = NETSPACE_THREADS if threads is None else int(threads)
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    logger.debug(f"Mapping {len(items)} items over {threads} threads")
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))
