"""Third-order well-balanced semi-discretization.

Cell averages evolve through the conservative form: the boundary flux is
integrated edge by edge (collocated Gauss-Lobatto where the bottom is locally
flat, 5-point Gauss-Legendre otherwise) and the source with the 7-point area
rule.  Point values evolve through the non-conservative form with an
LDA-type upwind residual: each element sends N_sigma K+ (J.grad v - S~) to its
DoFs, with gradients from the linear FD operator on the 6 boundary values
plus the centroid value recovered from the cell average.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import basis, model
from .linalg import pinv_apply
from .quadrature import AREA7, LEGENDRE5, LOBATTO3

# local DoF trios per edge: endpoints and midpoint of edges (v0,v1), (v1,v2),
# (v2,v0); the matching outward scaled normals sit in normal slots 3,4,5
EDGE_LOCAL = np.array([[0, 3, 1], [1, 4, 2], [2, 5, 0]])


def _edge_shape_matrix(nodes):
    """Quadratic shape functions on [0,1] at ``nodes``, columns (end0, mid, end1)."""
    s = np.asarray(nodes)
    return np.stack(
        [(2.0 * s - 1.0) * (s - 1.0), 4.0 * s * (1.0 - s), s * (2.0 * s - 1.0)],
        axis=1,
    )


@dataclass
class Rhs:
    """Time derivatives of every cell average and boundary-DoF point value."""

    d_avg: np.ndarray     # (ne, 4), conservative
    d_points: np.ndarray  # (n_dofs, 4), active non-conservative set


class HighOrderScheme:
    """Spatial operator of the third-order scheme on a fixed mesh + bottom.

    Args:
        mesh: Mesh.
        bathy: Bathymetry (projected bottom and its static tables).
        g: gravity.
        wb_mode: "adaptive" (plateau-driven rule choice), "lobatto_only" or
            "legendre_only" (the forced non-WB comparison modes).
        variable_set: "pmt" or "prim" point-value variables.
        boundary: "extrapolation" or "dirichlet".
        exact: callable (x, y, t) -> (..., 4) conservative states; required
            for Dirichlet boundaries.
        pinv_workers: threads for the per-DoF pseudo-inverse batch.
    """

    def __init__(
        self,
        mesh,
        bathy,
        g,
        wb_mode="adaptive",
        variable_set="pmt",
        boundary="extrapolation",
        exact=None,
        pinv_workers=2,
    ):
        if boundary not in ("extrapolation", "dirichlet"):
            raise ValueError(f"unknown boundary treatment: {boundary!r}")
        if boundary == "dirichlet" and exact is None:
            raise ValueError("dirichlet boundaries require an exact-state closure")
        self.mesh = mesh
        self.bathy = bathy
        self.g = float(g)
        self.wb_mode = wb_mode
        self.variable_set = variable_set
        self.boundary = boundary
        self.exact = exact
        self.pinv_workers = pinv_workers

        self.lobatto_mask = bathy.lobatto_mask(wb_mode)
        self.legendre_idx = np.flatnonzero(~self.lobatto_mask)
        self.rule_counts = {
            "lobatto3": int(self.lobatto_mask.sum()),
            "legendre5": int(mesh.n_elements - self.lobatto_mask.sum()),
        }

        self.edge_normals = mesh.scaled_normals[:, 3:6]  # (ne, 3, 2) outward
        self.leg_shapes = _edge_shape_matrix(LEGENDRE5.nodes)  # (5, 3)
        self.phi_area = basis.eval_basis(AREA7.nodes)  # (7q, 7)
        self.interp_grads6 = bathy.interp_grads[:, :6]  # (ne, 6, 7, 2)

        # boundary sides (element, local edge) for Dirichlet substitution
        sides = []
        for l in range(3):
            eids = mesh.elem_edges[:, l]
            on_b = mesh.boundary_edge_mask[eids]
            for e in np.flatnonzero(on_b):
                sides.append((e, l))
        self.boundary_sides = np.array(sides, dtype=np.int64).reshape(-1, 2)
        if len(self.boundary_sides):
            e = self.boundary_sides[:, 0]
            l = self.boundary_sides[:, 1]
            trio = mesh.elem_dofs[e[:, None], EDGE_LOCAL[l]]
            self.bside_trio_coords = mesh.dof_coords[trio]  # (nb, 3, 2)
            ends = self.bside_trio_coords[:, [0, 2], :]
            s = LEGENDRE5.nodes[None, :, None]
            self.bside_leg_coords = ends[:, 0:1, :] * (1 - s) + ends[:, 1:2, :] * s
            self.bside_lobatto = self.lobatto_mask[e]

    # -- conservative cell-average update ---------------------------------

    def cell_average_parts(self, field, t=0.0):
        """Per-side edge integrals (ne, 3, 4) and source integrals (ne, 4)."""
        with np.errstate(invalid="ignore", divide="ignore"):
            pts_cons = model.from_variables(
                field.point_values, self.variable_set, check=False
            )
            edge_int = self._edge_integrals(pts_cons, t)
            src = self._area_source(field, pts_cons)
        return edge_int, src

    def cell_average_rhs(self, field, t=0.0):
        """d(ubar)/dt for every element, shape (ne, 4)."""
        edge_int, src = self.cell_average_parts(field, t)
        return (-edge_int.sum(axis=1) + src) / self.mesh.areas[:, None]

    def _edge_integrals(self, pts_cons, t):
        """Per-(element, local edge) flux integrals, (ne, 3, 4)."""
        mesh = self.mesh
        g = self.g
        trio = mesh.elem_dofs[:, EDGE_LOCAL]  # (ne, 3, 3)
        u_trio = pts_cons[trio]  # (ne, 3, 3, 4)
        edge_int = np.empty((mesh.n_elements, 3, 4))

        # Lobatto: collocation at the three edge DoFs
        f_dof = model.flux(pts_cons, g, check=False)  # (ndof, 4, 2)
        f_trio = f_dof[trio]  # (ne, 3, 3, 4, 2)
        fn = np.einsum("elkvd,eld->elkv", f_trio, self.edge_normals)
        lob = np.einsum("k,elkv->elv", LOBATTO3.weights, fn)
        edge_int[:] = lob

        # Legendre elements: evaluate the edge quadratic at 5 Gauss points
        leg = self.legendre_idx
        if leg.size:
            u_q = np.einsum("qk,elkv->elqv", self.leg_shapes, u_trio[leg])
            f_q = model.flux(u_q, g, check=False)
            fn_q = np.einsum("elqvd,eld->elqv", f_q, self.edge_normals[leg])
            edge_int[leg] = np.einsum("q,elqv->elv", LEGENDRE5.weights, fn_q)

        if self.boundary == "dirichlet" and len(self.boundary_sides):
            self._dirichlet_edges(edge_int, t)
        return edge_int

    def _dirichlet_edges(self, edge_int, t):
        """Replace boundary-edge integrals with exact-state quadrature."""
        e = self.boundary_sides[:, 0]
        l = self.boundary_sides[:, 1]
        normals = self.edge_normals[e, l]  # (nb, 2)

        lobm = self.bside_lobatto
        if lobm.any():
            x = self.bside_trio_coords[lobm]
            u_ex = self.exact(x[..., 0], x[..., 1], t)
            fn = np.einsum(
                "bkvd,bd->bkv", model.flux(u_ex, self.g, check=False), normals[lobm]
            )
            edge_int[e[lobm], l[lobm]] = np.einsum("k,bkv->bv", LOBATTO3.weights, fn)
        if (~lobm).any():
            x = self.bside_leg_coords[~lobm]
            u_ex = self.exact(x[..., 0], x[..., 1], t)
            fn = np.einsum(
                "bqvd,bd->bqv", model.flux(u_ex, self.g, check=False), normals[~lobm]
            )
            edge_int[e[~lobm], l[~lobm]] = np.einsum(
                "q,bqv->bv", LEGENDRE5.weights, fn
            )

    def _area_source(self, field, pts_cons):
        """Integral of (0, -g (htheta)_h grad Z_h, 0) over each element."""
        mesh = self.mesh
        coeff = np.concatenate(
            [
                pts_cons[mesh.elem_dofs][..., 3],
                field.cell_averages[:, None, 3],
            ],
            axis=1,
        )  # (ne, 7) htheta coefficients
        hth_q = coeff @ self.phi_area.T  # (ne, 7q)
        integrand = hth_q[..., None] * self.bathy.grad_z_area  # (ne, 7q, 2)
        mom = -self.g * np.einsum("q,eqd->ed", AREA7.weights, integrand)
        src = np.zeros((mesh.n_elements, 4))
        src[:, 1:3] = mom * mesh.areas[:, None]
        return src

    # -- non-conservative point-value update -------------------------------

    def point_value_rhs(self, field, t=0.0):
        """dv_sigma/dt for every boundary DoF, shape (n_dofs, 4)."""
        mesh = self.mesh
        g = self.g
        vs = self.variable_set
        v = field.point_values
        with np.errstate(invalid="ignore", divide="ignore"):
            u_pts = model.from_variables(v, vs, check=False)
            u_elem = u_pts[mesh.elem_dofs]
            u_c = (
                basis.CENTROID_AVG_W * field.cell_averages
                + basis.CENTROID_VERT_W * u_elem[:, :3].sum(axis=1)
                + basis.CENTROID_MID_W * u_elem[:, 3:6].sum(axis=1)
            )
            v_c = model.to_variables(u_c, vs, check=False)
            v_elem = v[mesh.elem_dofs]  # (ne, 6, 4)
            nodes = np.concatenate([v_elem, v_c[:, None, :]], axis=1)

            grads = np.einsum("ejid,eiv->ejvd", self.interp_grads6, nodes)
            jg = model.jdot_grad(v_elem, grads, g, vs)
            src = model.point_source(
                v_elem,
                self.bathy.z_nodes[:, :6],
                self.bathy.dz_nodes,
                self.bathy.dz2_nodes,
                g,
                vs,
            )
            resid = jg - src  # (ne, 6, 4)

            Kp = model.k_plus(v_elem, mesh.scaled_normals, g, vs)
            contrib = np.einsum("ejab,ejb->eja", Kp, resid)

        acc = mesh.reduce_at_dofs(contrib)
        Ksum = mesh.reduce_at_dofs(
            Kp.reshape(mesh.n_elements, 6, 16)
        ).reshape(mesh.n_dofs, 4, 4)
        return -pinv_apply(Ksum, acc, workers=self.pinv_workers)

    def rhs(self, field, t=0.0):
        """Assembled semi-discrete right-hand side."""
        return Rhs(
            d_avg=self.cell_average_rhs(field, t),
            d_points=self.point_value_rhs(field, t),
        )

    # -- boundary treatment -------------------------------------------------

    def apply_boundary(self, field, t):
        """Overwrite boundary-DoF point values for Dirichlet runs (in place)."""
        if self.boundary != "dirichlet":
            return
        mask = self.mesh.boundary_dof_mask
        x = self.mesh.dof_coords[mask]
        u_ex = self.exact(x[:, 0], x[:, 1], t)
        field.point_values[mask] = model.to_variables(
            u_ex, self.variable_set, check=False
        )
