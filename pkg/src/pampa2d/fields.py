"""Discrete solution container: point values at boundary DoFs + cell averages."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class SolutionField:
    """Globally continuous discrete field.

    ``point_values`` has shape (n_dofs,) or (n_dofs, m); ``cell_averages``
    (n_elements,) or (n_elements, m).  Scalar fields (bathymetry) use the 1-D
    form, states the 4-component form.  Point values on shared edges are
    single-valued by construction (one slot per global DoF).
    """

    point_values: np.ndarray
    cell_averages: np.ndarray

    def copy(self):
        return SolutionField(
            point_values=self.point_values.copy(),
            cell_averages=self.cell_averages.copy(),
        )

    def finite(self):
        return bool(
            np.isfinite(self.point_values).all()
            and np.isfinite(self.cell_averages).all()
        )
