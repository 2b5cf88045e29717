"""kdl: a deterministic phase-space simulator and verification lab.

The package implements a truncated 3D x 3D kinetic model: free streaming,
cell homogenization, bilinear collision quadrature, the explicit one-step
recurrence built from them, the closed-form constants attached to the model,
and a numerical inequality/convergence verification suite.

Heavy submodules (operators, scheme, analysis) import numba; keep this
top-level import light so the CLI can configure the thread pool first.
"""

__version__ = "0.1.0"

from .errors import ConfigurationError

__all__ = ["ConfigurationError", "__version__"]
