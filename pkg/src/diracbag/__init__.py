"""Numerical toolkit for the large-mass spectral asymptotics of the 2D
Dirac operator with an exterior mass barrier, and its confined
(infinite-mass) limit on bounded domains.
"""

__version__ = "0.1.0"

from .errors import NumericalError, ValidationError

__all__ = ["NumericalError", "ValidationError", "__version__"]
