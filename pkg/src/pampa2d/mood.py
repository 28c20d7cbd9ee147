"""A-posteriori limiting: detect inadmissible entities, redo them first order.

One guarded step runs the full SSP-RK3 step with the third-order scheme,
checks the candidate against the admissibility criteria, and recomputes the
flagged cell averages / point values with the first-order schemes through the
same Runge-Kutta stages (unflagged entities keep their high-order stage
values).  Entities still inadmissible after the redo keep the first-order
result clipped to the positivity floors - the terminal rung.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import basis, model
from .fields import SolutionField

DMP_ABS = 1.0e-4
DMP_REL = 1.0e-3


@dataclass
class FlagState:
    element_flags: np.ndarray
    dof_flags: np.ndarray
    n_elements: int
    n_dofs: int

    @property
    def any(self):
        return self.n_elements > 0


class MoodLimiter:
    """Couples the high- and low-order schemes through detection flags."""

    def __init__(self, mesh, high, low, enabled=True, dmp=True):
        self.mesh = mesh
        self.high = high
        self.low = low
        self.enabled = enabled
        self.dmp = dmp
        # neighborhood indices padded with self for vectorized min/max
        nbr = mesh.neighbors.copy()
        own = np.arange(mesh.n_elements)[:, None]
        nbr = np.where(nbr >= 0, nbr, own)
        self.nbhd = np.concatenate([own, nbr], axis=1)  # (ne, 4)
        # orientation of the per-edge LF flux seen from each element side
        self._side_orient = np.where(
            mesh.edge_elems[mesh.elem_edges, 0] == own, 1.0, -1.0
        )

    # -- detection ----------------------------------------------------------

    def _bad_points(self, pts):
        """Per-DoF admissibility of the active-variable point values."""
        vs = self.high.variable_set
        bad = ~np.isfinite(pts).all(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            h, _, _, th = model.state_primitives(pts, vs)
        bad |= ~np.isfinite(h) | (h < model.H_FLOOR)
        bad |= ~np.isfinite(th) | (th < model.THETA_FLOOR)
        return bad

    def _bad_cons(self, u):
        """Admissibility of conservative 4-vectors (averages, centroids)."""
        bad = ~np.isfinite(u).all(axis=1)
        h = u[..., 0]
        hth = u[..., 3]
        bad |= h < model.H_FLOOR
        bad |= hth < model.THETA_FLOOR * np.maximum(h, model.H_FLOOR)
        return bad

    def detect(self, candidate, previous, use_dmp=None):
        """Flag inadmissible elements of a candidate field.

        Criteria: non-finite values, depth/temperature below the floors at
        averages, point values and centroid reconstructions, and (optional) a
        relaxed discrete maximum principle on the depth average against the
        step-start neighborhood range.
        """
        if use_dmp is None:
            use_dmp = self.dmp
        mesh = self.mesh
        bad_dof = self._bad_points(candidate.point_values)
        bad_elem = bad_dof[mesh.elem_dofs].any(axis=1)
        bad_elem |= self._bad_cons(candidate.cell_averages)
        with np.errstate(invalid="ignore", divide="ignore"):
            u_c = basis.centroid_values(
                SolutionField(
                    model.from_variables(
                        candidate.point_values, self.high.variable_set, check=False
                    ),
                    candidate.cell_averages,
                ),
                mesh,
            )
        bad_elem |= self._bad_cons(u_c)

        if use_dmp:
            h_prev = previous.cell_averages[:, 0]
            ring = h_prev[self.nbhd]
            mn = ring.min(axis=1)
            mx = ring.max(axis=1)
            relax = np.maximum(DMP_ABS, DMP_REL * (mx - mn))
            h_new = candidate.cell_averages[:, 0]
            with np.errstate(invalid="ignore"):
                bad_elem |= (h_new < mn - relax) | (h_new > mx + relax)

        flag_dof = np.zeros(mesh.n_dofs, dtype=bool)
        if bad_elem.any():
            flag_dof[mesh.elem_dofs[bad_elem].ravel()] = True
        return FlagState(
            element_flags=bad_elem,
            dof_flags=flag_dof,
            n_elements=int(bad_elem.sum()),
            n_dofs=int(flag_dof.sum()),
        )

    # -- guarded time step ----------------------------------------------------

    def _high_stages(self, field, t, dt):
        """SSP-RK3 with the high-order scheme; returns the stage fields."""
        high = self.high
        s0 = field
        r0 = high.rhs(s0, t)
        s1 = SolutionField(
            s0.point_values + dt * r0.d_points,
            s0.cell_averages + dt * r0.d_avg,
        )
        high.apply_boundary(s1, t + dt)
        r1 = high.rhs(s1, t + dt)
        s2 = SolutionField(
            0.75 * s0.point_values + 0.25 * (s1.point_values + dt * r1.d_points),
            0.75 * s0.cell_averages + 0.25 * (s1.cell_averages + dt * r1.d_avg),
        )
        high.apply_boundary(s2, t + 0.5 * dt)
        r2 = high.rhs(s2, t + 0.5 * dt)
        s3 = SolutionField(
            (s0.point_values + 2.0 * (s2.point_values + dt * r2.d_points)) / 3.0,
            (s0.cell_averages + 2.0 * (s2.cell_averages + dt * r2.d_avg)) / 3.0,
        )
        high.apply_boundary(s3, t + dt)
        return s1, s2, s3

    def _hybrid_avg_rhs(self, state, t, fe):
        """Average RHS with single-valued fluxes across mixed-order edges.

        Every edge touching a flagged element carries the first-order
        Lax-Friedrichs flux for both of its elements (local conservation);
        unflagged edges keep the high-order integral.  Flagged elements also
        swap the area source for the midpoint rule, which makes their update
        exactly the first-order scheme.
        """
        mesh = self.mesh
        edge_int, src = self.high.cell_average_parts(state, t)
        lf = self.low.edge_lf_fluxes(state, t)
        iL = mesh.edge_elems[:, 0]
        iR = mesh.edge_elems[:, 1]
        low_edge = fe[iL] | ((iR >= 0) & fe[np.maximum(iR, 0)])

        d = -edge_int.sum(axis=1) + src
        eid = mesh.elem_edges  # (ne, 3)
        is_low = low_edge[eid][..., None]
        lf_side = lf[eid] * self._side_orient[..., None]
        d += np.where(is_low, edge_int - lf_side, 0.0).sum(axis=1)
        if fe.any():
            src_mid = self.low.source_integral(state.cell_averages)
            d[fe] += src_mid[fe] - src[fe]
        return d / mesh.areas[:, None]

    def _low_redo(self, field, stages, flags, t, dt):
        """Recompute flagged entities first order through the same stages.

        Averages are re-advanced globally with the hybrid flux (bitwise
        unchanged away from flagged edges); unflagged point values keep
        their high-order stage values.
        """
        fe = flags.element_flags
        fd = flags.dof_flags
        s1_h, s2_h, cand = stages

        def parts(state, tt):
            return (
                self._hybrid_avg_rhs(state, tt, fe),
                self.low.point_value_rhs(state, tt),
            )

        da, dp = parts(field, t)
        s1 = s1_h.copy()
        s1.cell_averages[:] = field.cell_averages + dt * da
        s1.point_values[fd] = field.point_values[fd] + dt * dp[fd]
        self.high.apply_boundary(s1, t + dt)

        da, dp = parts(s1, t + dt)
        s2 = s2_h.copy()
        s2.cell_averages[:] = 0.75 * field.cell_averages + 0.25 * (
            s1.cell_averages + dt * da
        )
        s2.point_values[fd] = 0.75 * field.point_values[fd] + 0.25 * (
            s1.point_values[fd] + dt * dp[fd]
        )
        self.high.apply_boundary(s2, t + 0.5 * dt)

        da, dp = parts(s2, t + 0.5 * dt)
        out = cand.copy()
        out.cell_averages[:] = (
            field.cell_averages + 2.0 * (s2.cell_averages + dt * da)
        ) / 3.0
        out.point_values[fd] = (
            field.point_values[fd] + 2.0 * (s2.point_values[fd] + dt * dp[fd])
        ) / 3.0
        self.high.apply_boundary(out, t + dt)
        return out

    def _clip_terminal(self, field, fallback, flags):
        """Terminal rung: replace non-finite data and clip to the floors.

        Entries whose depth had to be floored also lose their momentum; a
        floored depth carrying the old momentum encodes an unbounded velocity
        and would collapse the time step.
        """
        fe = flags.element_flags
        fd = flags.dof_flags
        avg = field.cell_averages
        bad = ~np.isfinite(avg)
        avg[bad] = fallback.cell_averages[bad]
        dry = fe & (avg[:, 0] < model.H_FLOOR)
        avg[dry, 0] = model.H_FLOOR
        avg[dry, 1:3] = 0.0
        avg[fe, 3] = np.maximum(avg[fe, 3], model.THETA_FLOOR * avg[fe, 0])

        pts = field.point_values
        bad = ~np.isfinite(pts)
        pts[bad] = fallback.point_values[bad]
        if self.high.variable_set == "pmt":
            th = np.maximum(pts[:, 3], model.THETA_FLOOR)
            pts[fd, 3] = th[fd]
            p_floor = model.H_FLOOR**2 * th
            dry_d = fd & (pts[:, 0] < p_floor)
            pts[dry_d, 0] = p_floor[dry_d]
        else:
            dry_d = fd & (pts[:, 0] < model.H_FLOOR)
            pts[dry_d, 0] = model.H_FLOOR
            pts[fd, 3] = np.maximum(pts[fd, 3], model.THETA_FLOOR)
        pts[dry_d, 1:3] = 0.0

    def guarded_step(self, field, t, dt):
        """One full SSP-RK3 step with a-posteriori limiting.

        Returns the accepted field and the flag state of the candidate (the
        counts reported in the diagnostics).
        """
        s1, s2, candidate = self._high_stages(field, t, dt)
        if not self.enabled:
            empty = FlagState(
                np.zeros(self.mesh.n_elements, dtype=bool),
                np.zeros(self.mesh.n_dofs, dtype=bool),
                0,
                0,
            )
            return candidate, empty

        flags = self.detect(candidate, field)
        if not flags.any:
            return candidate, flags

        redone = self._low_redo(field, (s1, s2, candidate), flags, t, dt)
        # re-detect once on hard admissibility only; a first-order result
        # that merely strays outside the relaxed maximum principle is kept
        flags2 = self.detect(redone, field, use_dmp=False)
        still_e = flags2.element_flags & flags.element_flags
        still_d = flags2.dof_flags & flags.dof_flags
        if still_e.any() or still_d.any():
            still = FlagState(still_e, still_d, int(still_e.sum()), int(still_d.sum()))
            self._clip_terminal(redone, field, still)
        return redone, flags
