"""conalflow: verification and simulation toolkit for differentially positive
flows and conal orders on Riemannian manifolds.

The package checks, by computation rather than proof, the chain of hypotheses
behind almost-sure convergence of strongly differentially positive systems:
cone-invariance of the linearized flow, the conal order and its dichotomy on
ordered curves, omega-limit classification, and a Fubini-style foliation
census that bounds the measure of the non-convergent set.
"""

from . import (
    census,
    cones,
    config,
    dynamics,
    expressions,
    geometry,
    integrate,
    limits,
    order,
    reports,
)
from .errors import (
    ArgumentError,
    ConalflowError,
    ConfigError,
    DomainError,
    FoliationError,
    NumericError,
    StiffnessError,
)

__version__ = "0.1.0"

__all__ = [
    "census",
    "cones",
    "config",
    "dynamics",
    "expressions",
    "geometry",
    "integrate",
    "limits",
    "order",
    "reports",
    "ArgumentError",
    "ConalflowError",
    "ConfigError",
    "DomainError",
    "FoliationError",
    "NumericError",
    "StiffnessError",
    "__version__",
]
