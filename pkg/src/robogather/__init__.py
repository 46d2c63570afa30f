"""SSYNC oblivious mobile-robot gathering: simulator and property harness."""

from .scalars import EXACT, FLOAT64, Backend, ExactBackend, FloatBackend, Point, get_backend

__version__ = "0.1.0"

__all__ = [
    "Backend",
    "EXACT",
    "ExactBackend",
    "FLOAT64",
    "FloatBackend",
    "Point",
    "get_backend",
    "__version__",
]
