"""Approximation space on quadratic triangles with an independent cell average.

Two bases live on each element, both indexed by the six boundary DoFs plus a
seventh "cell" function:

* the reconstruction basis ``phi``: phi_i are the P2 Lagrange functions
  shifted by a bubble so that their element integral vanishes, and phi_7 is a
  bubble carrying the whole average (integral |E|).  A field is then
  u_h = sum u_sigma_i phi_i + ubar phi_7 and its exact element average is
  ubar.
* the interpolation basis ``psi``: plain Lagrange functions on the six
  boundary DoFs plus the centroid (psi_7 the cubic bubble 27*l1*l2*l3), used
  to build the linear finite-difference gradient operator for point values.

Barycentric node order: vertices (1,0,0), (0,1,0), (0,0,1), then midpoints of
edges (v0,v1), (v1,v2), (v2,v0), then the centroid.
"""

from __future__ import annotations

import numpy as np

from .fields import SolutionField
from .quadrature import AREA7

NODE_BARY = np.array(
    [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.5, 0.5, 0.0],
        [0.0, 0.5, 0.5],
        [0.5, 0.0, 0.5],
        [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
    ]
)

# weights of the centroid-value formula u_c = 20/9 ubar - 1/9 sum(vertices)
# - 8/27 sum(midpoints)
CENTROID_AVG_W = 20.0 / 9.0
CENTROID_VERT_W = -1.0 / 9.0
CENTROID_MID_W = -8.0 / 27.0


def _check_bary(lam, tol=1.0e-12):
    lam = np.asarray(lam, dtype=float)
    s = lam.sum(axis=-1)
    if not np.allclose(s, 1.0, atol=1.0e-12, rtol=0.0):
        raise ValueError("barycentric coordinates must sum to 1")
    if (lam < -tol).any() or (lam > 1.0 + tol).any():
        raise ValueError("barycentric coordinates outside the element")
    return lam


def eval_basis(lam):
    """Reconstruction basis values, shape lam.shape[:-1] + (7,)."""
    lam = _check_bary(lam)
    l1, l2, l3 = lam[..., 0], lam[..., 1], lam[..., 2]
    bub = l1 * l2 * l3
    out = np.empty(lam.shape[:-1] + (7,))
    out[..., 0] = l1 * (2.0 * l1 - 1.0)
    out[..., 1] = l2 * (2.0 * l2 - 1.0)
    out[..., 2] = l3 * (2.0 * l3 - 1.0)
    out[..., 3] = 4.0 * l1 * l2 - 20.0 * bub
    out[..., 4] = 4.0 * l2 * l3 - 20.0 * bub
    out[..., 5] = 4.0 * l3 * l1 - 20.0 * bub
    out[..., 6] = 60.0 * bub
    return out


def eval_basis_bary_grad(lam):
    """d(phi_i)/d(lambda_k), shape lam.shape[:-1] + (7, 3)."""
    lam = _check_bary(lam)
    l1, l2, l3 = lam[..., 0], lam[..., 1], lam[..., 2]
    db = np.stack([l2 * l3, l1 * l3, l1 * l2], axis=-1)
    g = np.zeros(lam.shape[:-1] + (7, 3))
    g[..., 0, 0] = 4.0 * l1 - 1.0
    g[..., 1, 1] = 4.0 * l2 - 1.0
    g[..., 2, 2] = 4.0 * l3 - 1.0
    g[..., 3, 0] = 4.0 * l2
    g[..., 3, 1] = 4.0 * l1
    g[..., 3, :] -= 20.0 * db
    g[..., 4, 1] = 4.0 * l3
    g[..., 4, 2] = 4.0 * l2
    g[..., 4, :] -= 20.0 * db
    g[..., 5, 2] = 4.0 * l1
    g[..., 5, 0] = 4.0 * l3
    g[..., 5, :] -= 20.0 * db
    g[..., 6, :] = 60.0 * db
    return g


def eval_interp_basis(lam):
    """Interpolation basis values (psi_i(sigma_j) = delta_ij incl. centroid)."""
    lam = _check_bary(lam)
    l1, l2, l3 = lam[..., 0], lam[..., 1], lam[..., 2]
    bub = l1 * l2 * l3
    out = np.empty(lam.shape[:-1] + (7,))
    out[..., 0] = l1 * (2.0 * l1 - 1.0) + 3.0 * bub
    out[..., 1] = l2 * (2.0 * l2 - 1.0) + 3.0 * bub
    out[..., 2] = l3 * (2.0 * l3 - 1.0) + 3.0 * bub
    out[..., 3] = 4.0 * l1 * l2 - 12.0 * bub
    out[..., 4] = 4.0 * l2 * l3 - 12.0 * bub
    out[..., 5] = 4.0 * l3 * l1 - 12.0 * bub
    out[..., 6] = 27.0 * bub
    return out


def eval_interp_basis_bary_grad(lam):
    """d(psi_i)/d(lambda_k), shape lam.shape[:-1] + (7, 3)."""
    lam = _check_bary(lam)
    l1, l2, l3 = lam[..., 0], lam[..., 1], lam[..., 2]
    db = np.stack([l2 * l3, l1 * l3, l1 * l2], axis=-1)
    g = np.zeros(lam.shape[:-1] + (7, 3))
    g[..., 0, 0] = 4.0 * l1 - 1.0
    g[..., 0, :] += 3.0 * db
    g[..., 1, 1] = 4.0 * l2 - 1.0
    g[..., 1, :] += 3.0 * db
    g[..., 2, 2] = 4.0 * l3 - 1.0
    g[..., 2, :] += 3.0 * db
    g[..., 3, 0] = 4.0 * l2
    g[..., 3, 1] = 4.0 * l1
    g[..., 3, :] -= 12.0 * db
    g[..., 4, 1] = 4.0 * l3
    g[..., 4, 2] = 4.0 * l2
    g[..., 4, :] -= 12.0 * db
    g[..., 5, 2] = 4.0 * l1
    g[..., 5, 0] = 4.0 * l3
    g[..., 5, :] -= 12.0 * db
    g[..., 6, :] = 27.0 * db
    return g


def bary_gradients(mesh):
    """Constant physical gradients of the barycentric coordinates, (ne, 3, 2).

    grad lambda_k = n_k / (2|E|) with n_k the scaled inward vertex normal.
    """
    return mesh.scaled_normals[:, :3] / (2.0 * mesh.areas)[:, None, None]


def physical_grad(bary_grad_vals, mesh):
    """Map barycentric basis gradients (..., 7, 3) to physical (ne, ..., 7, 2)."""
    gl = bary_gradients(mesh)
    return np.einsum("...ik,ekd->e...id", bary_grad_vals, gl)


def eval_basis_grad(lam, mesh, e):
    """Physical gradients of the reconstruction basis on element e, (7, 2)."""
    gb = eval_basis_bary_grad(lam)
    gl = bary_gradients(mesh)[e]
    return np.einsum("...ik,kd->...id", gb, gl)


def interp_grad_table(mesh, nodes=None):
    """Physical interpolation-basis gradients at element nodes.

    Returns (ne, n_nodes, 7, 2); ``nodes`` defaults to all 7 DoF positions
    (six boundary DoFs plus the centroid).  Constant per element, so this is
    precomputed once and reused by every right-hand-side evaluation.
    """
    if nodes is None:
        nodes = NODE_BARY
    gb = eval_interp_basis_bary_grad(nodes)  # (n_nodes, 7, 3)
    gl = bary_gradients(mesh)
    return np.einsum("jik,ekd->ejid", gb, gl)


def fd_gradient(values, centroid_value_, mesh, e, node):
    """The linear FD gradient D(v) at one node of element e.

    ``values`` are the six boundary-DoF values, ``centroid_value_`` the value
    at the centroid; ``node`` indexes the evaluation DoF (0..5 boundary, 6
    centroid).  Exact for quadratics and the cubic bubble.
    """
    tab = interp_grad_table(mesh)[e, node]  # (7, 2)
    stacked = np.concatenate([np.asarray(values), [centroid_value_]])
    return stacked @ tab


def reconstruct(field, mesh, e, lam):
    """Evaluate the reconstruction of ``field`` on element e at ``lam``."""
    phi = eval_basis(lam)
    pts = field.point_values[mesh.elem_dofs[e]]
    return np.tensordot(phi[..., :6], pts, axes=(-1, 0)) + np.multiply.outer(
        phi[..., 6], field.cell_averages[e]
    )


def centroid_values(field, mesh):
    """Centroid values for all elements from the average-consistency formula."""
    pts = field.point_values[mesh.elem_dofs]
    return (
        CENTROID_AVG_W * field.cell_averages
        + CENTROID_VERT_W * pts[:, :3].sum(axis=1)
        + CENTROID_MID_W * pts[:, 3:6].sum(axis=1)
    )


def centroid_value(field, mesh, e):
    """Centroid value of ``field`` on element e."""
    pts = field.point_values[mesh.elem_dofs[e]]
    return (
        CENTROID_AVG_W * field.cell_averages[e]
        + CENTROID_VERT_W * pts[:3].sum(axis=0)
        + CENTROID_MID_W * pts[3:6].sum(axis=0)
    )


def averages_from_nodal(point_values, centroid_vals, mesh):
    """Cell averages making the centroid formula reproduce ``centroid_vals``."""
    pts = point_values[mesh.elem_dofs]
    return (
        centroid_vals
        - CENTROID_VERT_W * pts[:, :3].sum(axis=1)
        - CENTROID_MID_W * pts[:, 3:6].sum(axis=1)
    ) / CENTROID_AVG_W


def project_function(f, mesh, avg_mode="interpolation"):
    """Project a scalar function into the approximation space.

    Point values sample ``f`` at the DoF coordinates.  Averages either make
    the centroid formula exact at the element centroid ("interpolation", the
    equilibrium-compatible default) or take the 7-point degree-5 area
    quadrature of ``f`` ("quadrature").  Both are exact for quadratics.
    """
    pts = np.asarray(f(mesh.dof_coords[:, 0], mesh.dof_coords[:, 1]), dtype=float)
    pts = np.broadcast_to(pts, (mesh.n_dofs,)).copy()
    if avg_mode == "interpolation":
        cen = mesh.centroids()
        fc = np.asarray(f(cen[:, 0], cen[:, 1]), dtype=float)
        fc = np.broadcast_to(fc, (mesh.n_elements,)).copy()
        avg = averages_from_nodal(pts, fc, mesh)
    elif avg_mode == "quadrature":
        tri = mesh.vertices[mesh.triangles]  # (ne, 3, 2)
        xq = np.einsum("qk,ekd->eqd", AREA7.nodes, tri)
        vals = np.asarray(f(xq[..., 0], xq[..., 1]), dtype=float)
        vals = np.broadcast_to(vals, xq.shape[:2])
        avg = vals @ AREA7.weights
    else:
        raise ValueError(f"unknown avg_mode: {avg_mode!r}")
    return SolutionField(point_values=pts, cell_averages=avg)
