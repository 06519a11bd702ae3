"""Net-space norms on weighted lattices, Fourier frontends for T^n and SU(2), and verification campaigns."""
from netspace.lattice import Lattice, LatticeElement, make_integer_lattice, make_su2_dual, nu_measure
from netspace.families import SubsetFamily, make_family
from netspace.netnorm import CoefficientNet, NormParams, averaging, ellp_norm, lorentz_discrete_norm, net_norm

__version__ = "0.1.0"

__all__ = [
    "CoefficientNet",
    "Lattice",
    "LatticeElement",
    "NormParams",
    "SubsetFamily",
    "averaging",
    "ellp_norm",
    "lorentz_discrete_norm",
    "make_family",
    "make_integer_lattice",
    "make_su2_dual",
    "net_norm",
    "nu_measure",
]
