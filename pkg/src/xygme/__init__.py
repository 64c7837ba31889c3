"""Multiqubit entangled-state preparation with XY couplings, scored by
genuine multipartite negativity."""
from .gme import genuine_negativity
from .qstate import Bipartition, DensityMatrix, PureState

__all__ = ["Bipartition", "DensityMatrix", "PureState", "genuine_negativity"]
__version__ = "0.1.0"
