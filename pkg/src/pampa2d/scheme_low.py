"""First-order fallback schemes used by the a-posteriori limiter.

Cell averages: local Lax-Friedrichs finite-volume update on the triangle
itself (no boundary DoFs) with a midpoint-rule source.  Point values: a
monotone residual scheme on the six sub-triangles obtained by joining
consecutive boundary DoFs to the centroid, with P1 data on each sub-triangle
and a Rusanov-type dissipation alpha_T (v_sigma - vbar_T).
"""

from __future__ import annotations

import numpy as np

from . import model

# counter-clockwise ring of local DoF slots along the element boundary
RING = np.array([0, 3, 1, 4, 2, 5])


def lf_flux(a1, a2, n, g):
    """Local Lax-Friedrichs numerical flux for a unit normal n.

    0.5 [f(a1).n + f(a2).n - alpha (a2 - a1)] with alpha the larger spectral
    radius of J.n over the two states.
    """
    f1 = model.normal_flux(a1, n, g, check=False)
    f2 = model.normal_flux(a2, n, g, check=False)
    with np.errstate(invalid="ignore", divide="ignore"):
        alpha = np.maximum(
            model.max_wave_speed(a1, n, g, check=False),
            model.max_wave_speed(a2, n, g, check=False),
        )
    a1 = np.asarray(a1, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    return 0.5 * (f1 + f2 - alpha[..., None] * (a2 - a1))


class LowOrderScheme:
    """First-order spatial operator sharing the mesh/bottom tables."""

    def __init__(
        self,
        mesh,
        bathy,
        g,
        variable_set="pmt",
        boundary="extrapolation",
        exact=None,
    ):
        self.mesh = mesh
        self.bathy = bathy
        self.g = float(g)
        self.variable_set = variable_set
        self.boundary = boundary
        self.exact = exact

        # per-edge data for the finite-volume part
        iL = mesh.edge_elems[:, 0]
        slot = np.argmax(mesh.elem_edges[iL] == np.arange(mesh.n_edges)[:, None], axis=1)
        scaled = mesh.scaled_normals[iL, 3 + slot]  # outward from the left element
        self.edge_unit = scaled / mesh.edge_lengths[:, None]
        self.edge_mid = mesh.dof_coords[mesh.n_vertices + np.arange(mesh.n_edges)]

        # sub-triangle geometry: ring pairs + centroid
        cen = mesh.centroids()
        dof_xy = mesh.dof_coords[mesh.elem_dofs]  # (ne, 6, 2)
        pa = dof_xy[:, RING]                       # (ne, 6, 2)
        pb = dof_xy[:, np.roll(RING, -1)]
        self.sub_area = mesh.areas / 6.0
        # inward scaled normals of (pa, pb, centroid), CCW ordering
        def rot(v):
            out = np.empty_like(v)
            out[..., 0] = -v[..., 1]
            out[..., 1] = v[..., 0]
            return out

        c = cen[:, None, :]
        self.sub_n_a = rot(c - pb)   # opposite vertex a
        self.sub_n_b = rot(pa - c)   # opposite vertex b
        self.sub_n_c = rot(pb - pa)  # opposite centroid
        self.sub_area_geom = 0.5 * np.abs(
            np.cross(pb - pa, c - pa)
        )  # for validation; equals |E|/6

        self.dual = mesh.dual_volumes()

    # -- cell averages ------------------------------------------------------

    def edge_lf_fluxes(self, field, t=0.0):
        """Per-edge Lax-Friedrichs fluxes times edge length, (ned, 4).

        Oriented outward from the first adjacent element of each edge.
        Boundary edges use the interior average as ghost (extrapolation) or
        the exact state at the edge midpoint (Dirichlet).
        """
        mesh = self.mesh
        avg = field.cell_averages
        iL = mesh.edge_elems[:, 0]
        iR = mesh.edge_elems[:, 1]
        uL = avg[iL]
        interior = iR >= 0
        uR = np.where(interior[:, None], avg[np.where(interior, iR, 0)], uL)
        if self.boundary == "dirichlet" and (~interior).any():
            xb = self.edge_mid[~interior]
            uR[~interior] = self.exact(xb[:, 0], xb[:, 1], t)
        with np.errstate(invalid="ignore", divide="ignore"):
            fhat = lf_flux(uL, uR, self.edge_unit, self.g)
        return fhat * mesh.edge_lengths[:, None]

    def source_integral(self, avg):
        """Midpoint-rule source integral g (htheta)bar [2/3 (Z4 n3 + Z5 n1 +
        Z6 n2) - 1/6 (Z1 n1 + Z2 n2 + Z3 n3)] in the momentum rows, (ne, 4)."""
        mesh = self.mesh
        z = self.bathy.z_nodes[:, :6]
        n = mesh.scaled_normals[:, :3]  # inward vertex normals
        vec = (2.0 / 3.0) * (
            z[:, 3, None] * n[:, 2]
            + z[:, 4, None] * n[:, 0]
            + z[:, 5, None] * n[:, 1]
        ) - (1.0 / 6.0) * (
            z[:, 0, None] * n[:, 0]
            + z[:, 1, None] * n[:, 1]
            + z[:, 2, None] * n[:, 2]
        )
        out = np.zeros((mesh.n_elements, 4))
        out[:, 1:3] = self.g * avg[:, 3, None] * vec
        return out

    def cell_average_rhs(self, field, t=0.0):
        """Local Lax-Friedrichs update of the averages, (ne, 4)."""
        mesh = self.mesh
        total = self.edge_lf_fluxes(field, t)
        iL = mesh.edge_elems[:, 0]
        iR = mesh.edge_elems[:, 1]
        interior = iR >= 0
        d_avg = np.zeros((mesh.n_elements, 4))
        np.add.at(d_avg, iL, -total)
        np.add.at(d_avg, iR[interior], total[interior])
        d_avg += self.source_integral(field.cell_averages)
        return d_avg / mesh.areas[:, None]

    # -- point values ---------------------------------------------------------

    def point_value_rhs(self, field, t=0.0):
        """Sub-element residual update of the point values, (n_dofs, 4)."""
        mesh = self.mesh
        g = self.g
        vs = self.variable_set
        v = field.point_values
        with np.errstate(invalid="ignore", divide="ignore"):
            u_pts = model.from_variables(v, vs, check=False)
            u_elem = u_pts[mesh.elem_dofs]
            u_c = (
                20.0 / 9.0 * field.cell_averages
                - u_elem[:, :3].sum(axis=1) / 9.0
                - 8.0 / 27.0 * u_elem[:, 3:6].sum(axis=1)
            )
            # the centroid value is an extrapolation and may leave the
            # invariant domain near discontinuities; this scheme is the
            # terminal fallback, so substitute the (admissible) average there
            bad_c = (
                ~np.isfinite(u_c).all(axis=1)
                | (u_c[:, 0] < model.H_FLOOR)
                | (u_c[:, 3] < model.THETA_FLOOR * np.maximum(u_c[:, 0], model.H_FLOOR))
            )
            u_c = np.where(bad_c[:, None], field.cell_averages, u_c)
            v_c = model.to_variables(u_c, vs, check=False)
            v_elem = v[mesh.elem_dofs]

            va = v_elem[:, RING]              # (ne, 6, 4)
            vb = v_elem[:, np.roll(RING, -1)]
            vc = v_c[:, None, :]
            vbar = (va + vb + vc) / 3.0

            inv2T = 1.0 / (2.0 * self.sub_area)[:, None, None, None]
            grad_v = (
                va[..., None] * self.sub_n_a[:, :, None, :]
                + vb[..., None] * self.sub_n_b[:, :, None, :]
                + vc[..., None] * self.sub_n_c[:, :, None, :]
            ) * inv2T  # (ne, 6, 4, 2)

            z_nodes = self.bathy.z_nodes
            za = z_nodes[:, RING]
            zb = z_nodes[:, np.roll(RING, -1)]
            zc = z_nodes[:, 6:7]
            inv2Ts = 1.0 / (2.0 * self.sub_area)[:, None, None]
            grad_z = (
                za[..., None] * self.sub_n_a
                + zb[..., None] * self.sub_n_b
                + zc[..., None] * self.sub_n_c
            ) * inv2Ts
            grad_z2 = (
                (za**2)[..., None] * self.sub_n_a
                + (zb**2)[..., None] * self.sub_n_b
                + (zc**2)[..., None] * self.sub_n_c
            ) * inv2Ts
            zbar = (za + zb + zc) / 3.0

            jg = model.jdot_grad(vbar, grad_v, g, vs)
            src = model.point_source(vbar, zbar, grad_z, grad_z2, g, vs)
            core = (self.sub_area[:, None] / 3.0)[..., None] * (jg - src)

            alpha = self._sub_alpha(va, vb, vc)
            phi_a = core + alpha[..., None] * (va - vbar)
            phi_b = core + alpha[..., None] * (vb - vbar)

        per_slot = np.zeros((mesh.n_elements, 6, 4))
        for i in range(6):
            per_slot[:, RING[i]] += phi_a[:, i]
            per_slot[:, RING[(i + 1) % 6]] += phi_b[:, i]
        acc = mesh.reduce_at_dofs(per_slot)
        return -acc / self.dual[:, None]

    def _sub_alpha(self, va, vb, vc):
        """alpha_T: max spectral radius of J(v_sigma).n over T's DoFs/normals."""
        g = self.g
        vs = self.variable_set
        alpha = np.zeros(va.shape[:2])
        for state in (va, vb, np.broadcast_to(vc, va.shape)):
            h, uu, vv, th = model.state_primitives(state, vs)
            with np.errstate(invalid="ignore"):
                c = np.sqrt(g * h * th)
            for n in (self.sub_n_a, self.sub_n_b, self.sub_n_c):
                nn = np.hypot(n[..., 0], n[..., 1])
                sp = np.abs(uu * n[..., 0] + vv * n[..., 1]) + c * nn
                alpha = np.maximum(alpha, sp)
        return alpha
