"""Well-balanced third-order PAMPA solver for the 2-D Ripa system.

The solution is globally continuous with two kinds of unknowns: point values
at the vertices and edge midpoints of a triangulation, and one independent
average per element.  Averages evolve in conservative form, point values in
a non-conservative pressure-momentum-temperature form whose upwind residual
cancels exactly at lake-at-rest and isobaric equilibria.
"""

from .bathymetry import Bathymetry
from .cases import (
    Scenario,
    builtin_scenario,
    convergence_study,
    error_norms,
    initialize_field,
    steady_state_check,
)
from .fields import SolutionField
from .mesh import Mesh, MeshError, build_mesh
from .meshgen import rectangle_mesh, rectangle_structured, rectangle_unstructured
from .model import HyperbolicityError, InvariantDomainError
from .mood import FlagState, MoodLimiter
from .scheme_high import HighOrderScheme, Rhs
from .scheme_low import LowOrderScheme, lf_flux
from .timestepping import RunOptions, SolveResult, advance, compute_dt

__version__ = "0.1.0"

__all__ = [
    "Bathymetry",
    "FlagState",
    "HighOrderScheme",
    "HyperbolicityError",
    "InvariantDomainError",
    "LowOrderScheme",
    "Mesh",
    "MeshError",
    "MoodLimiter",
    "Rhs",
    "RunOptions",
    "Scenario",
    "SolutionField",
    "SolveResult",
    "advance",
    "build_mesh",
    "builtin_scenario",
    "compute_dt",
    "convergence_study",
    "error_norms",
    "initialize_field",
    "lf_flux",
    "rectangle_mesh",
    "rectangle_structured",
    "rectangle_unstructured",
    "steady_state_check",
]
