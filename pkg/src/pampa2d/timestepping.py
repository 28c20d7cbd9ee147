"""CFL-controlled SSP-RK3 time integration driving the guarded steps."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import basis, model
from .bathymetry import Bathymetry
from .mood import MoodLimiter
from .scheme_high import HighOrderScheme
from .scheme_low import LowOrderScheme

_TIME_ATOL = 1.0e-12


@dataclass
class RunOptions:
    """Solver options shared by the CLI and the study drivers."""

    wb_mode: str = "adaptive"
    variable_set: str = "pmt"
    cfl: float = 0.3
    mood: bool = True
    dmp: bool = True
    t_final: float | None = None
    max_steps: int = 10_000_000
    fixed_dt: float | None = None
    plateau_eps: float = 1.0e-6
    avg_init: str = "interpolation"
    checkpoint_times: tuple = ()
    pinv_workers: int = 2
    deterministic: bool = True


@dataclass
class SolveResult:
    field: object
    t: float
    n_steps: int
    diagnostics: list = dc_field(default_factory=list)
    checkpoints: dict = dc_field(default_factory=dict)
    rule_counts: dict = dc_field(default_factory=dict)

    def diagnostics_array(self):
        return np.array(self.diagnostics)


def compute_dt(field, mesh, g, cfl, variable_set="pmt", fixed_dt=None):
    """CFL time step: cfl * min over elements of inradius / max wave speed.

    The wave speed of an element is taken over its six boundary DoFs plus the
    centroid value, against each unit edge normal.
    """
    if fixed_dt is not None:
        return float(fixed_dt)
    with np.errstate(invalid="ignore", divide="ignore"):
        u_pts = model.from_variables(field.point_values, variable_set, check=False)
    u_elem = u_pts[mesh.elem_dofs]
    u_c = (
        basis.CENTROID_AVG_W * field.cell_averages
        + basis.CENTROID_VERT_W * u_elem[:, :3].sum(axis=1)
        + basis.CENTROID_MID_W * u_elem[:, 3:6].sum(axis=1)
    )
    # the centroid reconstruction can leave the invariant domain near
    # discontinuities; it must not control the step, so fall back to the
    # (admissible) average there
    bad_c = ~np.isfinite(u_c).all(axis=1) | (u_c[:, 0] < model.H_FLOOR)
    u_c = np.where(bad_c[:, None], field.cell_averages, u_c)
    states = np.concatenate([u_elem, u_c[:, None, :]], axis=1)  # (ne, 7, 4)
    h = states[..., 0]
    with np.errstate(invalid="ignore", divide="ignore"):
        uu = states[..., 1] / h
        vv = states[..., 2] / h
    c = np.sqrt(np.maximum(g * states[..., 3], 0.0))

    nhat = mesh.scaled_normals[:, 3:6] / mesh.edge_lengths[mesh.elem_edges][..., None]
    un = np.abs(
        uu[:, :, None] * nhat[:, None, :, 0] + vv[:, :, None] * nhat[:, None, :, 1]
    )
    lam = (un + c[:, :, None]).max(axis=(1, 2))
    r = mesh.inradii()
    with np.errstate(divide="ignore"):
        dts = np.where(lam > 0.0, r / np.maximum(lam, 1.0e-300), np.inf)
    dt = cfl * dts.min()
    return float(dt)


def advance(field, mesh, scenario, options=None):
    """Integrate a field to the scenario's final time with guarded RK3 steps.

    ``scenario`` provides g, the bathymetry closure, the boundary treatment
    and (optionally) the exact solution; ``options`` selects modes and
    tolerances.  Emits one diagnostics row per step: (t, dt,
    flagged_elements, flagged_points, mass_total, htheta_total).
    """
    options = options or RunOptions()
    t_final = options.t_final if options.t_final is not None else scenario.t_final

    bathy = Bathymetry.from_function(
        mesh, scenario.z, eps=options.plateau_eps, avg_mode=options.avg_init
    )
    exact = scenario.exact_cons if getattr(scenario, "exact", None) else None
    high = HighOrderScheme(
        mesh,
        bathy,
        scenario.g,
        wb_mode=options.wb_mode,
        variable_set=options.variable_set,
        boundary=scenario.boundary,
        exact=exact,
        pinv_workers=options.pinv_workers,
    )
    low = LowOrderScheme(
        mesh,
        bathy,
        scenario.g,
        variable_set=options.variable_set,
        boundary=scenario.boundary,
        exact=exact,
    )
    limiter = MoodLimiter(mesh, high, low, enabled=options.mood, dmp=options.dmp)

    targets = sorted(
        {float(tc) for tc in options.checkpoint_times if 0.0 < tc <= t_final}
        | {float(t_final)}
    )
    result = SolveResult(
        field=field, t=0.0, n_steps=0, rule_counts=dict(high.rule_counts)
    )

    t = 0.0
    step = 0
    scale = max(t_final, 1.0)
    while t < t_final - _TIME_ATOL * scale:
        if step >= options.max_steps:
            raise RuntimeError(f"step budget exceeded ({options.max_steps})")
        dt = compute_dt(
            field,
            mesh,
            scenario.g,
            options.cfl,
            variable_set=options.variable_set,
            fixed_dt=options.fixed_dt,
        )
        next_target = min(tc for tc in targets if tc > t + _TIME_ATOL * scale)
        if not np.isfinite(dt):
            dt = next_target - t
        dt = min(dt, next_target - t)

        field, flags = limiter.guarded_step(field, t, dt)
        t += dt
        step += 1

        mass = float(mesh.areas @ field.cell_averages[:, 0])
        hth = float(mesh.areas @ field.cell_averages[:, 3])
        result.diagnostics.append(
            (t, dt, flags.n_elements, flags.n_dofs, mass, hth)
        )

        if abs(t - next_target) <= _TIME_ATOL * scale:
            result.checkpoints[next_target] = field.copy()
            if not field.finite():
                raise RuntimeError("non-finite state after terminal MOOD rung")

    result.field = field
    result.t = t
    result.n_steps = step
    return result
