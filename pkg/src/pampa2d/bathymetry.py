"""Projected bottom topography and the static data derived from it.

The bottom enters the schemes in three places: the reconstruction gradient of
Z_h inside the area source integral, the FD-operator gradients of Z and Z**2
in the point-value source, and the plateau condition steering the edge rule.
Z is static, so everything is precomputed here once per mesh.

Z**2 is handled as its own nodal data set: its point values are the squares
of the Z point values and its centroid value is the square of the Z centroid
value, which is exactly what the FD-operator cancellation at the lake-at-rest
equilibrium requires.
"""

from __future__ import annotations

import numpy as np

from . import basis
from .fields import SolutionField
from .quadrature import AREA7, PLATEAU_EPS_DEFAULT, lobatto_selection, plateau_flags


class Bathymetry:
    """Static per-element bottom data shared by the spatial schemes.

    Attributes:
        field: the projected Z as a SolutionField (scalar).
        z_dof: (n_dofs,) point values.
        z_avg: (ne,) cell averages.
        z_nodes: (ne, 7) values at the 6 boundary DoFs + centroid.
        dz_nodes, dz2_nodes: (ne, 6, 2) FD gradients D(Z), D(Z^2) at the
            boundary DoFs of each element.
        grad_z_area: (ne, 7, 2) reconstruction gradient of Z_h at the area
            quadrature nodes.
        plateau: (ne,) plateau-condition flags.
        interp_grads: (ne, 7, 7, 2) physical interpolation-basis gradients at
            all element nodes (reused by the point-value scheme).
    """

    def __init__(self, mesh, field, eps=PLATEAU_EPS_DEFAULT):
        self.mesh = mesh
        self.field = field
        self.eps = eps
        self.z_dof = np.asarray(field.point_values, dtype=float)
        self.z_avg = np.asarray(field.cell_averages, dtype=float)

        z_c = basis.centroid_values(field, mesh)
        self.z_centroid = z_c
        self.z_nodes = np.concatenate(
            [self.z_dof[mesh.elem_dofs], z_c[:, None]], axis=1
        )
        z2_nodes = self.z_nodes**2

        self.interp_grads = basis.interp_grad_table(mesh)
        G6 = self.interp_grads[:, :6]
        self.dz_nodes = np.einsum("ejid,ei->ejd", G6, self.z_nodes)
        self.dz2_nodes = np.einsum("ejid,ei->ejd", G6, z2_nodes)

        gb = basis.eval_basis_bary_grad(AREA7.nodes)  # (7q, 7, 3)
        gl = basis.bary_gradients(mesh)
        coeff = np.concatenate(
            [self.z_dof[mesh.elem_dofs], self.z_avg[:, None]], axis=1
        )
        self.grad_z_area = np.einsum(
            "qik,ekd,ei->eqd", gb, gl, coeff, optimize=True
        )
        phi_area = basis.eval_basis(AREA7.nodes)  # (7q, 7)
        self.z_area = coeff @ phi_area.T  # (ne, 7q) Z_h at area nodes

        self.plateau = plateau_flags(mesh, self.z_nodes, eps)

    @classmethod
    def from_function(cls, mesh, z, eps=PLATEAU_EPS_DEFAULT, avg_mode="interpolation"):
        field = basis.project_function(z, mesh, avg_mode=avg_mode)
        return cls(mesh, field, eps=eps)

    @classmethod
    def flat(cls, mesh, value=0.0, eps=PLATEAU_EPS_DEFAULT):
        field = SolutionField(
            point_values=np.full(mesh.n_dofs, float(value)),
            cell_averages=np.full(mesh.n_elements, float(value)),
        )
        return cls(mesh, field, eps=eps)

    def lobatto_mask(self, wb_mode="adaptive"):
        """Elements whose edge integrals use the collocated Lobatto rule."""
        if wb_mode == "adaptive":
            return self.plateau.copy()
        return lobatto_selection(self.mesh, self.z_nodes, self.eps, wb_mode)
