"""Edge and area quadrature rules plus the adaptive edge-rule selection.

Two edge rules are used: the 3-point Gauss-Lobatto rule, whose nodes are
exactly the two endpoint DoFs and the midpoint DoF of an edge (collocation,
exact to degree 3), and the 5-point Gauss-Legendre rule (exact to degree 9).
Area integrals always use the 7-point degree-5 rule.  The Lobatto rule is
selected for an element when the bottom is locally flat over its extended
neighborhood; otherwise Gauss-Legendre is used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PLATEAU_EPS_DEFAULT = 1.0e-6


@dataclass(frozen=True)
class EdgeRule:
    kind: str
    nodes: np.ndarray   # positions in [0, 1]
    weights: np.ndarray  # sum to 1


@dataclass(frozen=True)
class AreaRule:
    nodes: np.ndarray    # (n, 3) barycentric coordinates
    weights: np.ndarray  # sum to 1


LOBATTO3 = EdgeRule(
    kind="lobatto3",
    nodes=np.array([0.0, 0.5, 1.0]),
    weights=np.array([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]),
)

_gl_x, _gl_w = np.polynomial.legendre.leggauss(5)
LEGENDRE5 = EdgeRule(
    kind="legendre5",
    nodes=0.5 * (_gl_x + 1.0),
    weights=0.5 * _gl_w,
)

# degree-5 rule: centroid plus two symmetric orbits
#   a = (6 - sqrt(15))/21   weight (155 - sqrt(15))/1200
#   b = (6 + sqrt(15))/21   weight (155 + sqrt(15))/1200
_s15 = np.sqrt(15.0)
_a = (6.0 - _s15) / 21.0
_b = (6.0 + _s15) / 21.0
_wa = (155.0 - _s15) / 1200.0
_wb = (155.0 + _s15) / 1200.0
AREA7 = AreaRule(
    nodes=np.array(
        [
            [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            [_a, _a, 1.0 - 2.0 * _a],
            [_a, 1.0 - 2.0 * _a, _a],
            [1.0 - 2.0 * _a, _a, _a],
            [_b, _b, 1.0 - 2.0 * _b],
            [_b, 1.0 - 2.0 * _b, _b],
            [1.0 - 2.0 * _b, _b, _b],
        ]
    ),
    weights=np.array([9.0 / 40.0, _wa, _wa, _wa, _wb, _wb, _wb]),
)


def plateau_flags(mesh, z_nodes, eps=PLATEAU_EPS_DEFAULT):
    """Per-element local plateau condition of the bottom.

    ``z_nodes`` holds the bottom values at all element DoFs and the centroid,
    shape (ne, 7).  An element passes when max - min of those values over its
    extended neighborhood is <= eps.
    """
    z_nodes = np.asarray(z_nodes)
    emax = z_nodes.max(axis=1)
    emin = z_nodes.min(axis=1)
    flags = np.empty(mesh.n_elements, dtype=bool)
    for e, ext in enumerate(mesh.extended_neighborhoods()):
        flags[e] = emax[ext].max() - emin[ext].min() <= eps
    return flags


def plateau_check(mesh, z_nodes, e, eps=PLATEAU_EPS_DEFAULT):
    """Plateau condition for a single element."""
    ext = mesh.extended_neighborhood(e)
    z = np.asarray(z_nodes)[ext]
    return bool(z.max() - z.min() <= eps)


def lobatto_selection(mesh, z_nodes, eps=PLATEAU_EPS_DEFAULT, wb_mode="adaptive"):
    """Boolean mask of elements integrating edges with the Lobatto rule.

    ``wb_mode``: "adaptive" follows the plateau condition, "lobatto_only" and
    "legendre_only" force one rule globally (the non-WB comparison schemes).
    """
    if wb_mode == "lobatto_only":
        return np.ones(mesh.n_elements, dtype=bool)
    if wb_mode == "legendre_only":
        return np.zeros(mesh.n_elements, dtype=bool)
    if wb_mode != "adaptive":
        raise ValueError(f"unknown wb_mode: {wb_mode!r}")
    return plateau_flags(mesh, z_nodes, eps)


def select_edge_rule(mesh, z_nodes, e, eps=PLATEAU_EPS_DEFAULT, wb_mode="adaptive"):
    """Edge rule for one element under the given mode."""
    if wb_mode == "lobatto_only":
        return LOBATTO3
    if wb_mode == "legendre_only":
        return LEGENDRE5
    return LOBATTO3 if plateau_check(mesh, z_nodes, e, eps) else LEGENDRE5


def integrate_edge(p0, p1, rule, integrand):
    """Integrate ``integrand(x)`` along the segment p0 -> p1.

    The integrand receives quadrature points of shape (nq, 2) and returns
    (nq,) or (nq, m); the result is scaled by the edge length.
    """
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    x = p0[None, :] + rule.nodes[:, None] * (p1 - p0)[None, :]
    vals = np.asarray(integrand(x))
    length = np.hypot(*(p1 - p0))
    return length * np.tensordot(rule.weights, vals, axes=(0, 0))


def integrate_area(tri_verts, rule, integrand):
    """Integrate ``integrand(x)`` over the triangle with the given vertices."""
    tri_verts = np.asarray(tri_verts, dtype=float)
    x = rule.nodes @ tri_verts
    vals = np.asarray(integrand(x))
    area = 0.5 * abs(
        np.cross(tri_verts[1] - tri_verts[0], tri_verts[2] - tri_verts[0])
    )
    return area * np.tensordot(rule.weights, vals, axes=(0, 0))
