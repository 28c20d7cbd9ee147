"""Built-in triangulations of rectangles for tests and desk-scale studies.

Production meshes normally come from an external generator through
``gmsh_io.read_gmsh``; these helpers provide deterministic structured and
jittered-Delaunay meshes so studies can run without external files.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import Delaunay

from .mesh import Mesh


def _grid_points(bounds, nx, ny):
    xmin, xmax, ymin, ymax = bounds
    x = np.linspace(xmin, xmax, nx + 1)
    y = np.linspace(ymin, ymax, ny + 1)
    X, Y = np.meshgrid(x, y, indexing="ij")
    return np.column_stack([X.ravel(), Y.ravel()]), X.shape


def rectangle_structured(bounds, nx, ny=None):
    """Structured triangulation with alternating diagonals.

    Args:
        bounds: (xmin, xmax, ymin, ymax).
        nx, ny: cell counts per direction (ny defaults to nx).
    """
    if ny is None:
        ny = nx
    pts, shape = _grid_points(bounds, nx, ny)
    idx = np.arange(pts.shape[0]).reshape(shape)
    tris = []
    for i in range(nx):
        for j in range(ny):
            a = idx[i, j]
            b = idx[i + 1, j]
            c = idx[i + 1, j + 1]
            d = idx[i, j + 1]
            if (i + j) % 2 == 0:
                tris.append((a, b, c))
                tris.append((a, c, d))
            else:
                tris.append((a, b, d))
                tris.append((b, c, d))
    return Mesh(pts, np.asarray(tris, dtype=np.int64))


def rectangle_unstructured(bounds, target_h, seed=0, jitter=0.28):
    """Jittered-Delaunay triangulation with characteristic length ``target_h``.

    Interior grid nodes are perturbed by a seeded uniform jitter and
    re-triangulated with Delaunay; boundary nodes stay on the rectangle so
    the domain is meshed exactly.  Output is deterministic for fixed inputs.
    """
    xmin, xmax, ymin, ymax = bounds
    nx = max(2, int(round((xmax - xmin) / target_h)))
    ny = max(2, int(round((ymax - ymin) / target_h)))
    pts, shape = _grid_points(bounds, nx, ny)
    hx = (xmax - xmin) / nx
    hy = (ymax - ymin) / ny

    interior = np.ones(len(pts), dtype=bool)
    idx = np.arange(len(pts)).reshape(shape)
    interior[idx[0, :]] = False
    interior[idx[-1, :]] = False
    interior[idx[:, 0]] = False
    interior[idx[:, -1]] = False

    rng = np.random.default_rng(seed)
    shift = rng.uniform(-jitter, jitter, size=(len(pts), 2))
    shift[:, 0] *= hx
    shift[:, 1] *= hy
    pts = pts + np.where(interior[:, None], shift, 0.0)

    tri = Delaunay(pts)
    return Mesh(pts, tri.simplices.astype(np.int64))


def rectangle_mesh(bounds, target_h, kind="jittered", seed=0):
    """Dispatch helper used by the CLI and the scenario studies."""
    if kind == "structured":
        xmin, xmax, ymin, ymax = bounds
        nx = max(2, int(round((xmax - xmin) / target_h)))
        ny = max(2, int(round((ymax - ymin) / target_h)))
        return rectangle_structured(bounds, nx, ny)
    if kind == "jittered":
        return rectangle_unstructured(bounds, target_h, seed=seed)
    raise ValueError(f"unknown mesh kind: {kind!r}")
