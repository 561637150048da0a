"""Linear integrable quad-equations on bipartite rhombic quad-graphs.

Submodules:

- :mod:`quadlin.theta` -- Jacobi theta functions for the three torus regimes
- :mod:`quadlin.coeffs` -- coefficient families ``(f, g, h)`` and their identities
- :mod:`quadlin.quadgraph` -- rhombically embedded bipartite quad-graphs
- :mod:`quadlin.quadeq` -- the quad-equation, consistency, Bäcklund transforms, exponentials
- :mod:`quadlin.laplace` -- massive Laplacians, Dirichlet energies and solvers
- :mod:`quadlin.pluri` -- star-triangle maps and pluri-Lagrangian structure
- :mod:`quadlin.identities` -- randomized identity suites
- :mod:`quadlin.cli` -- the ``quadlin`` command
"""

from .coeffs import CoefficientFamily
from .errors import QuadlinError
from .quadeq import FieldAssignment
from .quadgraph import QuadGraph
from .theta import ThetaParams

__version__ = "0.1.0"

__all__ = ["CoefficientFamily", "FieldAssignment", "QuadGraph", "QuadlinError", "ThetaParams"]
