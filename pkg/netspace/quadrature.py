"""Composite Gauss-Legendre rules and Haar integration of SU(2) class functions."""
import math
from functools import lru_cache

import numpy as np

from netspace.config import NETSPACE_QUAD_ORDER

HAAR_FACTOR = 2.0 / math.pi


@lru_cache(maxsize=64)
def _reference_rule(order: int):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def composite_gauss(a: float, b: float, panels: int, order: int = NETSPACE_QUAD_ORDER):
    """
    Nodes and weights of the composite Gauss-Legendre rule on [a, b].

    Args:
        a (float): Left end.
        b (float): Right end.
        panels (int): Number of equal panels.
        order (int): Gauss points per panel.

    Returns:
        tuple[np.ndarray, np.ndarray]: nodes, weights (panels * order each).
    """
    reference_nodes, reference_weights = _reference_rule(order)
    edges = np.linspace(a, b, panels + 1)
    half = (edges[1:] - edges[:-1]) / 2.0
    centres = (edges[1:] + edges[:-1]) / 2.0
    nodes = (centres[:, None] + half[:, None] * reference_nodes[None, :]).ravel()
    weights = (half[:, None] * reference_weights[None, :]).ravel()
    return nodes, weights


def panels_for(two_l_max: int) -> int:
    """
    Panel count for integrands built from characters up to l_max.

    Products of two characters times sin^2 oscillate with frequency up to 2(2 l_max + 1) + 2;
    two panels per period of that frequency on [0, pi], and never fewer than two panels.
    """
    frequency = 2 * (two_l_max + 1) + 2
    return max(2, frequency)


def haar_nodes(two_l_max: int, order: int = NETSPACE_QUAD_ORDER, panels: int = None):
    """Nodes on [0, pi] and weights of the Haar rule (2/pi) sin^2(theta) d theta."""
    panels = panels_for(two_l_max) if panels is None else panels
    nodes, weights = composite_gauss(0.0, math.pi, panels, order)
    return nodes, HAAR_FACTOR * weights * np.sin(nodes) ** 2


def haar_integral(integrand, two_l_max: int, order: int = NETSPACE_QUAD_ORDER, panels: int = None):
    """
    Haar integral of a class function given as a vectorised callable of theta.

    Returns:
        tuple[float, float]: value and an error estimate (difference to the rule with half the panels).
    """
    panels = panels_for(two_l_max) if panels is None else panels
    nodes, weights = haar_nodes(two_l_max, order, panels)
    value = np.sum(weights * integrand(nodes))
    coarse_nodes, coarse_weights = haar_nodes(two_l_max, order, max(1, panels // 2))
    coarse = np.sum(coarse_weights * integrand(coarse_nodes))
    return value, abs(value - coarse)
