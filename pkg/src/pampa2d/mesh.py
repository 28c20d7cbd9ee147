"""Unstructured triangular mesh: connectivity, DoF numbering, normals, neighborhoods.

Degrees of freedom follow the quadratic-triangle layout: per element the six
boundary DoFs are the three vertices (local slots 0..2) followed by the three
edge midpoints (slots 3..5, midpoint of edge (v0,v1) first, then (v1,v2),
then (v2,v0)).  Globally, vertex DoFs come first in input order, then one
midpoint DoF per unique edge in sorted-edge order, so the numbering is
deterministic and shared midpoints are single-valued across elements.
"""

from __future__ import annotations

import numpy as np


class MeshError(ValueError):
    """Raised for invalid input geometry (degenerate or non-manifold)."""


def _rot90ccw(vec):
    """Rotate 2-vectors by +90 degrees: (x, y) -> (-y, x)."""
    out = np.empty_like(vec)
    out[..., 0] = -vec[..., 1]
    out[..., 1] = vec[..., 0]
    return out


class Mesh:
    """Immutable conforming triangulation with quadratic-element DoF numbering.

    Attributes:
        vertices: (nv, 2) vertex coordinates.
        triangles: (ne, 3) vertex ids, counter-clockwise after normalization.
        areas: (ne,) strictly positive element areas.
        edges: (ned, 2) sorted vertex pairs, lexicographic order.
        edge_lengths: (ned,)
        edge_elems: (ned, 2) adjacent element ids, -1 for the missing side.
        edge_markers: (ned,) integer boundary markers (0 = unmarked).
        elem_edges: (ne, 3) edge ids; slot k is the edge (v_k, v_{k+1 mod 3}).
        elem_dofs: (ne, 6) global DoF ids [v0, v1, v2, m01, m12, m20].
        n_dofs: total boundary-DoF count (vertices + edge midpoints).
        dof_coords: (n_dofs, 2)
        scaled_normals: (ne, 6, 2) per-DoF scaled normals; vertex slots hold
            the inward normal to the opposite edge scaled by its length,
            midpoint slots the outward normal to their own edge.
        neighbors: (ne, 3) edge-sharing neighbor per local edge (-1 = none).
        boundary_dof_mask: (n_dofs,) True for DoFs lying on boundary edges.
    """

    def __init__(self, vertices, triangles, boundary_lines=None):
        vertices = np.asarray(vertices, dtype=np.float64)
        triangles = np.asarray(triangles, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise MeshError("vertices must have shape (nv, 2)")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise MeshError("triangles must have shape (ne, 3)")
        nv = vertices.shape[0]
        if triangles.size and (triangles.min() < 0 or triangles.max() >= nv):
            raise MeshError("triangle vertex id out of range")
        if triangles.shape[0] == 0:
            raise MeshError("empty triangle list")

        tri_sorted = np.sort(triangles, axis=1)
        if (tri_sorted[:, 0] == tri_sorted[:, 1]).any() or (
            tri_sorted[:, 1] == tri_sorted[:, 2]
        ).any():
            raise MeshError("degenerate triangle: repeated vertex")
        uniq = np.unique(tri_sorted, axis=0)
        if uniq.shape[0] != tri_sorted.shape[0]:
            raise MeshError("duplicate triangles in input")

        # normalize winding to counter-clockwise
        p0 = vertices[triangles[:, 0]]
        p1 = vertices[triangles[:, 1]]
        p2 = vertices[triangles[:, 2]]
        signed = 0.5 * np.cross(p1 - p0, p2 - p0)
        flip = signed < 0.0
        triangles = triangles.copy()
        triangles[flip] = triangles[flip][:, [0, 2, 1]]
        areas = np.abs(signed)
        if (areas <= 0.0).any():
            raise MeshError("degenerate triangle: zero area")

        self.vertices = vertices
        self.triangles = triangles
        self.areas = areas
        self.n_elements = triangles.shape[0]
        self.n_vertices = nv

        # unique edges in lexicographic order; elem_edges slot k = (v_k, v_{k+1})
        raw = np.stack(
            [
                triangles[:, [0, 1]],
                triangles[:, [1, 2]],
                triangles[:, [2, 0]],
            ],
            axis=1,
        ).reshape(-1, 2)
        raw_sorted = np.sort(raw, axis=1)
        edges, inverse = np.unique(raw_sorted, axis=0, return_inverse=True)
        self.edges = edges
        self.elem_edges = inverse.reshape(self.n_elements, 3)
        ned = edges.shape[0]
        self.n_edges = ned

        counts = np.bincount(inverse, minlength=ned)
        if (counts > 2).any():
            raise MeshError("non-manifold edge: more than 2 adjacent elements")

        # adjacency via the two incidence slots of each edge
        edge_elems = np.full((ned, 2), -1, dtype=np.int64)
        order = np.argsort(inverse, kind="stable")
        elem_of_entry = order // 3
        starts = np.searchsorted(inverse[order], np.arange(ned))
        edge_elems[:, 0] = elem_of_entry[starts]
        second = counts == 2
        edge_elems[second, 1] = elem_of_entry[starts[second] + 1]
        self.edge_elems = edge_elems
        self.boundary_edge_mask = counts == 1

        ev = vertices[edges[:, 1]] - vertices[edges[:, 0]]
        self.edge_lengths = np.hypot(ev[:, 0], ev[:, 1])

        self.edge_markers = np.zeros(ned, dtype=np.int64)
        if boundary_lines is not None and len(boundary_lines):
            lines = np.asarray(boundary_lines, dtype=np.int64)
            pairs = np.sort(lines[:, 1:3], axis=1)
            idx = self._find_edges(pairs)
            ok = idx >= 0
            self.edge_markers[idx[ok]] = lines[ok, 0]

        # DoF numbering: vertices, then edge midpoints
        self.n_dofs = nv + ned
        mids = 0.5 * (vertices[edges[:, 0]] + vertices[edges[:, 1]])
        self.dof_coords = np.vstack([vertices, mids])
        self.elem_dofs = np.concatenate(
            [triangles, nv + self.elem_edges], axis=1
        )

        # scaled normals: vertex slot k = inward normal to opposite edge
        q0 = vertices[triangles[:, 0]]
        q1 = vertices[triangles[:, 1]]
        q2 = vertices[triangles[:, 2]]
        n = np.empty((self.n_elements, 6, 2))
        n[:, 0] = _rot90ccw(q2 - q1)
        n[:, 1] = _rot90ccw(q0 - q2)
        n[:, 2] = _rot90ccw(q1 - q0)
        n[:, 3] = -n[:, 2]
        n[:, 4] = -n[:, 0]
        n[:, 5] = -n[:, 1]
        self.scaled_normals = n

        nbr = np.empty((self.n_elements, 3), dtype=np.int64)
        ee = self.elem_edges
        left = edge_elems[ee, 0]
        right = edge_elems[ee, 1]
        own = np.arange(self.n_elements)[:, None]
        nbr = np.where(left == own, right, left)
        self.neighbors = nbr

        bmask = np.zeros(self.n_dofs, dtype=bool)
        bedges = np.flatnonzero(self.boundary_edge_mask)
        bmask[edges[bedges].ravel()] = True
        bmask[nv + bedges] = True
        self.boundary_dof_mask = bmask

        # CSR-style (dof -> (element, local slot)) incidence, element-ordered,
        # used for deterministic per-DoF reductions
        flat = self.elem_dofs.ravel()
        self.incidence_order = np.argsort(flat, kind="stable")
        sorted_dofs = flat[self.incidence_order]
        self.incidence_ptr = np.searchsorted(
            sorted_dofs, np.arange(self.n_dofs + 1)
        )
        self.incidence_elem = self.incidence_order // 6

        self._dual_volumes = None
        self._extended_cache = None

    def _find_edges(self, pairs):
        """Locate sorted vertex pairs in the edge table (-1 if absent)."""
        keys = self.edges[:, 0] * (2 * self.n_vertices) + self.edges[:, 1]
        want = pairs[:, 0] * (2 * self.n_vertices) + pairs[:, 1]
        pos = np.searchsorted(keys, want)
        pos = np.clip(pos, 0, len(keys) - 1)
        out = np.where(keys[pos] == want, pos, -1)
        return out

    # -- queries ---------------------------------------------------------

    def neighborhood(self, e):
        """Element e plus all elements sharing an edge with it (sorted ids)."""
        nbrs = self.neighbors[e]
        out = np.concatenate(([e], nbrs[nbrs >= 0]))
        return np.unique(out)

    def extended_neighborhood(self, e):
        """Union of neighborhood(k) over all k in neighborhood(e)."""
        base = self.neighborhood(e)
        parts = [self.neighborhood(int(k)) for k in base]
        return np.unique(np.concatenate(parts))

    def extended_neighborhoods(self):
        """All extended neighborhoods as a list of index arrays (cached)."""
        if self._extended_cache is None:
            self._extended_cache = [
                self.extended_neighborhood(e) for e in range(self.n_elements)
            ]
        return self._extended_cache

    def dual_volumes(self):
        """|C_sigma| = sum of |E|/9 over elements containing each DoF."""
        if self._dual_volumes is None:
            dv = np.zeros(self.n_dofs)
            np.add.at(dv, self.elem_dofs, self.areas[:, None] / 9.0)
            self._dual_volumes = dv
        return self._dual_volumes

    def dual_volume(self, dof):
        return self.dual_volumes()[dof]

    def inradii(self):
        """Element inradius 2|E| / perimeter."""
        per = self.edge_lengths[self.elem_edges].sum(axis=1)
        return 2.0 * self.areas / per

    def centroids(self):
        return self.vertices[self.triangles].mean(axis=1)

    def reduce_at_dofs(self, per_incidence):
        """Sum per-(element, slot) values into per-DoF totals.

        ``per_incidence`` has shape (ne, 6, ...); the reduction follows a
        fixed element ordering so results are reproducible run to run.
        """
        flat = per_incidence.reshape(self.n_elements * 6, -1)
        gathered = flat[self.incidence_order]
        out = np.add.reduceat(gathered, self.incidence_ptr[:-1], axis=0)
        return out.reshape((self.n_dofs,) + per_incidence.shape[2:])


def build_mesh(vertices, triangles, boundary_lines=None):
    """Construct a Mesh from a vertex list and triangle list."""
    return Mesh(vertices, triangles, boundary_lines)
