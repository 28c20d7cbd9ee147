"""Scenario library, discrete error norms, and the study drivers.

Scenarios transcribe the benchmark setups: a steady vortex over a bump
(accuracy), traveling vortices, lake-at-rest flows over three humps,
perturbed equilibria, circular/radial dam breaks, an isobaric state and two
connected lake-at-rest states with a temperature jump.  Gravity is 9.812 for
the first five and 1 for the rest.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import basis, model
from .fields import SolutionField
from .meshgen import rectangle_mesh
from .timestepping import RunOptions, advance


@dataclass
class Scenario:
    """Problem definition: domain, bottom, initial data, boundary treatment.

    ``init`` and ``exact`` return primitive tuples (h, u, v, theta); ``exact``
    additionally takes the time.  ``lake_level`` marks scenarios whose
    unperturbed state is a flat lake h + Z = const (used by perturbation
    diagnostics).
    """

    name: str
    bounds: tuple
    z: callable
    init: callable
    g: float
    t_final: float
    boundary: str = "extrapolation"
    exact: callable = None
    checkpoints: tuple = ()
    lake_level: float = None
    background: callable = None
    default_mesh_size: float = None

    def exact_cons(self, x, y, t):
        h, u, v, th = self.exact(x, y, t)
        h = np.asarray(h, dtype=float)
        return np.stack([h, h * u, h * v, h * th], axis=-1)

    def init_cons(self, x, y):
        h, u, v, th = self.init(x, y)
        h = np.asarray(h, dtype=float)
        b = np.broadcast(h, u, v, th)
        out = np.empty(b.shape + (4,))
        out[..., 0] = h
        out[..., 1] = h * u
        out[..., 2] = h * v
        out[..., 3] = h * th
        return out


def _vortex_primitives(x, y, g, advection=(0.0, 0.0)):
    r2 = x * x + y * y
    e = np.exp(1.0 - r2)
    h = 1.0 - np.exp(2.0 * (1.0 - r2)) / (4.0 * g)
    u = advection[0] + y * e
    v = advection[1] - x * e
    return h, u, v, np.ones_like(h)


def _ex1():
    g = 9.812

    def z(x, y):
        r2 = x * x + y * y
        return 0.2 * np.exp(0.5 * (1.0 - r2))

    def init(x, y):
        h, u, v, th = _vortex_primitives(x, y, g)
        return h - z(x, y), u, v, th

    return Scenario(
        name="ex1_steady_vortex",
        bounds=(-10.0, 10.0, -10.0, 10.0),
        z=z,
        init=init,
        g=g,
        t_final=1.0,
        boundary="dirichlet",
        exact=lambda x, y, t: init(x, y),
        default_mesh_size=1.0,
    )


def _ex2_flat():
    g = 9.812
    adv = (1.0, np.sqrt(2.0) / 2.0)

    def init(x, y):
        return _vortex_primitives(x, y, g, adv)

    def exact(x, y, t):
        return init(x - adv[0] * t, y - adv[1] * t)

    return Scenario(
        name="ex2_vortex_flat",
        bounds=(-10.0, 10.0, -10.0, 10.0),
        z=lambda x, y: np.zeros_like(np.asarray(x, dtype=float)),
        init=init,
        g=g,
        t_final=5.0,
        boundary="dirichlet",
        exact=exact,
        default_mesh_size=0.2,
    )


def _ex2_bump():
    base = _ex2_flat()

    def z(x, y):
        return 0.2 * np.exp(0.5 - 2.0 * ((x - 2.0) ** 2 + (y - 2.0) ** 2))

    # boundary data from the flat-bottom translate; the bump has no support
    # near the domain boundary
    return Scenario(
        name="ex2_vortex_bump",
        bounds=base.bounds,
        z=z,
        init=base.init,
        g=base.g,
        t_final=1.0,
        boundary="dirichlet",
        exact=base.exact,
        checkpoints=(0.39, 1.0),
        default_mesh_size=0.2,
    )


def _ex3():
    g = 9.812

    def z(x, y):
        r1 = np.hypot(x - 10.0, y - 11.0)
        r2 = np.hypot(x - 10.0, y - 31.0)
        r3 = np.hypot(x - 27.0, y - 20.0)
        zero = np.zeros_like(r1)
        return np.maximum.reduce(
            [zero, 1.0 - r1 / 8.0, 1.0 - 0.3 * r2, 1.0 - 0.4 * r3]
        )

    def init(x, y):
        h = 4.0 - z(x, y)
        zz = np.zeros_like(h)
        return h, zz, zz, np.ones_like(h)

    return Scenario(
        name="ex3_three_humps",
        bounds=(0.0, 40.0, 0.0, 40.0),
        z=z,
        init=init,
        g=g,
        t_final=20.0,
        lake_level=4.0,
        default_mesh_size=0.93,
    )


def _ex4():
    g = 9.812

    def z(x, y):
        return 0.8 * np.exp(-50.0 * ((x - 1.0) ** 2 + (y - 1.0) ** 2))

    def perturbation(x, y):
        return 1.0e-4 * np.exp(-20.0 * ((x - 0.8) ** 2 + (y - 0.8) ** 2))

    def init(x, y):
        h = 1.0 - z(x, y) + perturbation(x, y)
        zz = np.zeros_like(h)
        return h, zz, zz, np.ones_like(h)

    def background(x, y):
        h = 1.0 - z(x, y)
        zz = np.zeros_like(h)
        return h, zz, zz, np.ones_like(h)

    return Scenario(
        name="ex4_perturbation",
        bounds=(0.0, 2.0, 0.0, 2.0),
        z=z,
        init=init,
        g=g,
        t_final=0.1,
        lake_level=1.0,
        background=background,
        default_mesh_size=0.092,
    )


def _ex5():
    g = 9.812

    def init(x, y):
        r = np.hypot(x - 25.0, y - 25.0)
        h = np.where(r <= 11.0, 10.0, 1.0)
        zz = np.zeros_like(h)
        return h, zz, zz, np.ones_like(h)

    return Scenario(
        name="ex5_dam_break",
        bounds=(0.0, 50.0, 0.0, 50.0),
        z=lambda x, y: np.zeros_like(np.asarray(x, dtype=float)),
        init=init,
        g=g,
        t_final=0.69,
        checkpoints=(0.447, 0.69),
        default_mesh_size=0.46,
    )


def _ex6(perturbed=False):
    def init(x, y):
        r2 = (x - 30.0) ** 2 + (y - 30.0) ** 2
        inside = r2 <= 16.0
        h = np.where(inside, 2.0 * np.exp(-0.05 * r2), 2.0 * np.exp(-0.8))
        th = np.where(inside, np.exp(0.1 * r2), np.exp(1.6))
        if perturbed:
            h = h + 0.005 * np.exp(-0.2 * ((x - 20.0) ** 2 + (y - 20.0) ** 2))
        zz = np.zeros_like(h)
        return h, zz, zz, th

    return Scenario(
        name="ex6_isobaric_perturbed" if perturbed else "ex6_isobaric",
        bounds=(0.0, 40.0, 0.0, 40.0),
        z=lambda x, y: np.zeros_like(np.asarray(x, dtype=float)),
        init=init,
        g=1.0,
        t_final=6.0 if perturbed else 2.0,
        checkpoints=(4.3, 6.0) if perturbed else (),
        default_mesh_size=0.93,
    )


def _two_lakes_z(x, y):
    b1 = 0.5 * np.exp(-100.0 * ((x + 0.5) ** 2 + (y + 0.5) ** 2))
    b2 = 0.6 * np.exp(-100.0 * ((x - 0.5) ** 2 + (y - 0.5) ** 2))
    # the x = 0 line takes the left branch; both tails are ~1e-11 there
    return np.where(x <= 0.0, b1, b2)


def _ex7(perturbed=False):
    def init(x, y):
        r = np.hypot(x, y)
        zz = _two_lakes_z(x, y)
        h = np.where(r <= 0.5, 3.0 - zz, 2.0 - zz)
        if perturbed:
            h = np.where((r >= 0.1) & (r <= 0.3), 3.1 - zz, h)
        th = np.where(r <= 0.5, 4.0 / 3.0, 3.0)
        zero = np.zeros_like(h)
        return h, zero, zero, th

    return Scenario(
        name="ex8_two_lakes_perturbed" if perturbed else "ex7_two_lakes",
        bounds=(-1.0, 1.0, -1.0, 1.0),
        z=_two_lakes_z,
        init=init,
        g=1.0,
        t_final=0.05 if perturbed else 0.12,
        default_mesh_size=0.029,
    )


def _ex9():
    def init(x, y):
        r = np.hypot(x, y)
        h = np.where(r <= 0.5, 2.0, 1.0)
        th = np.where(r <= 0.5, 1.0, 1.5)
        zero = np.zeros_like(h)
        return h, zero, zero, th

    return Scenario(
        name="ex9_radial_dam_break",
        bounds=(-1.0, 1.0, -1.0, 1.0),
        z=lambda x, y: np.zeros_like(np.asarray(x, dtype=float)),
        init=init,
        g=1.0,
        t_final=0.15,
        default_mesh_size=0.029,
    )


_BUILDERS = {
    "ex1_steady_vortex": _ex1,
    "ex2_vortex_flat": _ex2_flat,
    "ex2_vortex_bump": _ex2_bump,
    "ex3_three_humps": _ex3,
    "ex4_perturbation": _ex4,
    "ex5_dam_break": _ex5,
    "ex6_isobaric": lambda: _ex6(False),
    "ex6_isobaric_perturbed": lambda: _ex6(True),
    "ex7_two_lakes": lambda: _ex7(False),
    "ex8_two_lakes_perturbed": lambda: _ex7(True),
    "ex9_radial_dam_break": _ex9,
}

SCENARIO_NAMES = tuple(sorted(_BUILDERS))


def builtin_scenario(name):
    """Look up a benchmark scenario by name."""
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise KeyError(
            f"unknown scenario {name!r}; known: {', '.join(SCENARIO_NAMES)}"
        ) from None


# -- field construction ---------------------------------------------------------

def sample_cons_field(fn_cons, mesh, avg_mode="interpolation"):
    """Build a conservative SolutionField from a pointwise state closure."""
    x, y = mesh.dof_coords[:, 0], mesh.dof_coords[:, 1]
    pts = fn_cons(x, y)
    if avg_mode == "interpolation":
        cen = mesh.centroids()
        u_c = fn_cons(cen[:, 0], cen[:, 1])
        avg = basis.averages_from_nodal(pts, u_c, mesh)
    elif avg_mode == "quadrature":
        from .quadrature import AREA7

        tri = mesh.vertices[mesh.triangles]
        xq = np.einsum("qk,ekd->eqd", AREA7.nodes, tri)
        vals = fn_cons(xq[..., 0], xq[..., 1])
        avg = np.einsum("q,eqv->ev", AREA7.weights, vals)
    else:
        raise ValueError(f"unknown avg_mode: {avg_mode!r}")
    return SolutionField(point_values=pts, cell_averages=avg)


def initialize_field(scenario, mesh, variable_set="pmt", avg_mode="interpolation"):
    """Initial SolutionField with active-set point values, cons averages."""
    cons = sample_cons_field(scenario.init_cons, mesh, avg_mode)
    pts = model.to_variables(cons.point_values, variable_set)
    return SolutionField(point_values=pts, cell_averages=cons.cell_averages)


def reference_field(scenario, mesh, t, avg_mode="interpolation"):
    """Exact solution at time t as a conservative SolutionField."""
    if scenario.exact is None:
        raise ValueError(f"scenario {scenario.name} has no exact solution")
    return sample_cons_field(
        lambda x, y: scenario.exact_cons(x, y, t), mesh, avg_mode
    )


# -- norms and studies -----------------------------------------------------------

@dataclass
class ErrorNorms:
    avg_l1: np.ndarray
    avg_linf: np.ndarray
    point_l1: np.ndarray
    point_linf: np.ndarray


def error_norms(field, reference, mesh, variable_set="pmt"):
    """Weighted discrete L1/Linf errors of averages and point values.

    ``field`` carries active-set point values; ``reference`` is conservative
    (a second field, e.g. from ``reference_field`` or the initial data).
    Averages are weighted by |E|, point values by the dual volumes |C_sigma|;
    both L1 norms are normalized by the total weight.
    """
    if field.cell_averages.shape != reference.cell_averages.shape:
        raise ValueError("mesh mismatch between field and reference")
    d_avg = np.abs(field.cell_averages - reference.cell_averages)
    w = mesh.areas
    avg_l1 = (w[:, None] * d_avg).sum(axis=0) / w.sum()
    avg_linf = d_avg.max(axis=0)

    pts_cons = model.from_variables(field.point_values, variable_set, check=False)
    ref_pts = reference.point_values
    d_pts = np.abs(pts_cons - ref_pts)
    cw = mesh.dual_volumes()
    pt_l1 = (cw[:, None] * d_pts).sum(axis=0) / cw.sum()
    pt_linf = d_pts.max(axis=0)
    return ErrorNorms(avg_l1, avg_linf, pt_l1, pt_linf)


@dataclass
class ConvergenceRow:
    size_metric_avg: float
    size_metric_point: float
    errors: ErrorNorms
    n_elements: int
    n_dofs: int


@dataclass
class ConvergenceResult:
    rows: list = dc_field(default_factory=list)

    def rates(self, which="avg_l1"):
        """Observed orders between consecutive meshes, shape (n-1, 4)."""
        out = []
        for prev, cur in zip(self.rows[:-1], self.rows[1:]):
            e0 = getattr(prev.errors, which)
            e1 = getattr(cur.errors, which)
            m0 = prev.size_metric_avg if which.startswith("avg") else prev.size_metric_point
            m1 = cur.size_metric_avg if which.startswith("avg") else cur.size_metric_point
            with np.errstate(divide="ignore", invalid="ignore"):
                r = np.log(e0 / e1) / np.log(m0 / m1)
            out.append(r)
        return np.array(out)


def convergence_study(scenario, sizes, options=None, mesh_kind="jittered", seed=0):
    """Run a scenario on a refinement sequence and collect error norms."""
    if isinstance(scenario, str):
        scenario = builtin_scenario(scenario)
    if len(sizes) < 2:
        raise ValueError("need at least two mesh sizes")
    if any(b >= a for a, b in zip(sizes[:-1], sizes[1:])):
        raise ValueError("mesh sizes must decrease monotonically")
    options = options or RunOptions()
    result = ConvergenceResult()
    for size in sizes:
        mesh = rectangle_mesh(scenario.bounds, size, kind=mesh_kind, seed=seed)
        field = initialize_field(
            scenario, mesh, options.variable_set, options.avg_init
        )
        res = advance(field, mesh, scenario, options)
        ref = reference_field(scenario, mesh, res.t, options.avg_init)
        err = error_norms(res.field, ref, mesh, options.variable_set)
        result.rows.append(
            ConvergenceRow(
                size_metric_avg=float(np.sqrt(mesh.areas.max())),
                size_metric_point=float(np.sqrt(mesh.dual_volumes().max())),
                errors=err,
                n_elements=mesh.n_elements,
                n_dofs=mesh.n_dofs,
            )
        )
    return result


@dataclass
class SteadyReport:
    norms: ErrorNorms
    result: object

    def max_drift(self, components=(0, 1)):
        vals = []
        for c in components:
            vals += [
                self.norms.avg_l1[c],
                self.norms.avg_linf[c],
                self.norms.point_l1[c],
                self.norms.point_linf[c],
            ]
        return max(vals)


def steady_state_check(scenario, mesh, options=None):
    """Run an equilibrium scenario to t_final; report drift vs initial data."""
    if isinstance(scenario, str):
        scenario = builtin_scenario(scenario)
    options = options or RunOptions()
    field0 = initialize_field(scenario, mesh, options.variable_set, options.avg_init)
    ref = SolutionField(
        point_values=model.from_variables(
            field0.point_values, options.variable_set
        ),
        cell_averages=field0.cell_averages.copy(),
    )
    res = advance(field0.copy(), mesh, scenario, options)
    norms = error_norms(res.field, ref, mesh, options.variable_set)
    return SteadyReport(norms=norms, result=res)
