"""Reservoir computers on signed {-1, 0, +1} networks."""
from .errors import SignedReservoirError

__version__ = "0.1.0"
