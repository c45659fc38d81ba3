"""Random walks in random environment on Z: killed hitting-time generating
functions, the dual continued fractions, and numerical checks of their
space-reversal dualities."""

from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
