"""qchain package"""

from .core.divergence import RenyiOrder
from .core.quantum import DensityOperator, PositiveMapRep
from .core.verify import Verifier

__version__ = "0.1.0"

__all__ = ["DensityOperator", "PositiveMapRep", "RenyiOrder", "Verifier", "__version__"]
