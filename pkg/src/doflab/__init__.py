"""Degrees-of-freedom toolkit for MIMO interference networks.

Subspace algebra over exact rationals or floats, generic and structured
channel families, genie-chain outer bounds with a symbolic entropy ledger,
closed-form DoF values with proof status, and alignment precoder designs.
"""

from . import alignment, dof_formulas, exact_linalg, multilook, network, subspace
from .dof_formulas import classify, counting_bound, decomposition_bound
from .network import Network, generate_generic
from .subspace import Subspace

__version__ = "0.1.0"

__all__ = [
    "Network",
    "Subspace",
    "alignment",
    "classify",
    "counting_bound",
    "decomposition_bound",
    "dof_formulas",
    "exact_linalg",
    "generate_generic",
    "multilook",
    "network",
    "subspace",
]
