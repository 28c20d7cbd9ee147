"""GMSH ASCII mesh ingestion (MSH 2.2 and 4.1, 2-D triangles only)."""

from __future__ import annotations

import numpy as np


class GmshError(ValueError):
    """Malformed or unsupported GMSH file."""


def _sections(lines):
    """Yield (name, payload_lines) for each $Name ... $EndName block."""
    it = iter(lines)
    for line in it:
        line = line.strip()
        if not line.startswith("$") or line.startswith("$End"):
            continue
        name = line[1:]
        payload = []
        for inner in it:
            if inner.strip() == f"$End{name}":
                break
            payload.append(inner.rstrip("\n"))
        else:
            raise GmshError(f"unterminated section ${name}")
        yield name, payload


def read_gmsh(path):
    """Parse a GMSH ASCII file into (vertices, triangles, boundary_lines).

    Only 3-node triangles (type 2) are accepted as surface elements; 2-node
    lines (type 1) are kept with their physical tag for boundary marking.
    Returns vertices (nv, 2), triangles (ne, 3) and boundary_lines (m, 3)
    rows [tag, v0, v1], all zero-based.
    """
    with open(path, "r") as fh:
        lines = fh.readlines()

    secs = dict(_sections(lines))
    if "MeshFormat" not in secs:
        raise GmshError("missing $MeshFormat section")
    fmt = secs["MeshFormat"][0].split()
    version = fmt[0]
    if fmt[1] != "0":
        raise GmshError("binary GMSH files are not supported")
    if version.startswith("2"):
        return _read_v2(secs)
    if version.startswith("4"):
        return _read_v4(secs)
    raise GmshError(f"unsupported MSH version {version}")


def _read_v2(secs):
    if "Nodes" not in secs or "Elements" not in secs:
        raise GmshError("missing $Nodes or $Elements section")
    node_lines = secs["Nodes"]
    n_nodes = int(node_lines[0].split()[0])
    if len(node_lines) - 1 != n_nodes:
        raise GmshError("node count mismatch")
    ids = np.empty(n_nodes, dtype=np.int64)
    coords = np.empty((n_nodes, 2))
    for i, ln in enumerate(node_lines[1:]):
        parts = ln.split()
        ids[i] = int(parts[0])
        coords[i] = float(parts[1]), float(parts[2])
    remap = {int(t): i for i, t in enumerate(ids)}

    tris = []
    blines = []
    elem_lines = secs["Elements"]
    n_elems = int(elem_lines[0].split()[0])
    if len(elem_lines) - 1 != n_elems:
        raise GmshError("element count mismatch")
    for ln in elem_lines[1:]:
        parts = [int(p) for p in ln.split()]
        etype = parts[1]
        ntags = parts[2]
        tags = parts[3 : 3 + ntags]
        conn = parts[3 + ntags :]
        phys = tags[0] if tags else 0
        if etype == 2:
            if len(conn) != 3:
                raise GmshError("malformed triangle connectivity")
            tris.append([remap[c] for c in conn])
        elif etype == 1:
            blines.append([phys] + [remap[c] for c in conn])
        elif etype == 15:
            continue  # point elements carry no mesh information here
        else:
            raise GmshError(f"unsupported element type {etype} (triangles only)")
    if not tris:
        raise GmshError("no triangles found")
    return (
        coords,
        np.asarray(tris, dtype=np.int64),
        np.asarray(blines, dtype=np.int64).reshape(-1, 3),
    )


def _read_v4(secs):
    if "Nodes" not in secs or "Elements" not in secs:
        raise GmshError("missing $Nodes or $Elements section")
    node_lines = secs["Nodes"]
    header = node_lines[0].split()
    n_blocks = int(header[0])
    pos = 1
    tags = []
    coords = []
    for _ in range(n_blocks):
        ent = node_lines[pos].split()
        n_in_block = int(ent[3])
        pos += 1
        block_tags = [int(node_lines[pos + i]) for i in range(n_in_block)]
        pos += n_in_block
        for i in range(n_in_block):
            parts = node_lines[pos + i].split()
            coords.append((float(parts[0]), float(parts[1])))
        pos += n_in_block
        tags.extend(block_tags)
    remap = {t: i for i, t in enumerate(tags)}
    coords = np.asarray(coords)

    # map curve entities to physical tags when available
    phys_of_curve = {}
    if "Entities" in secs:
        ent_lines = secs["Entities"]
        counts = [int(v) for v in ent_lines[0].split()]
        n_points, n_curves = counts[0], counts[1]
        for ln in ent_lines[1 + n_points : 1 + n_points + n_curves]:
            parts = ln.split()
            curve_tag = int(parts[0])
            n_phys = int(parts[7])
            if n_phys > 0:
                phys_of_curve[curve_tag] = int(parts[8])

    elem_lines = secs["Elements"]
    n_blocks = int(elem_lines[0].split()[0])
    pos = 1
    tris = []
    blines = []
    for _ in range(n_blocks):
        ent = elem_lines[pos].split()
        ent_tag, etype, n_in_block = int(ent[1]), int(ent[2]), int(ent[3])
        pos += 1
        for i in range(n_in_block):
            parts = [int(p) for p in elem_lines[pos + i].split()]
            conn = parts[1:]
            if etype == 2:
                tris.append([remap[c] for c in conn])
            elif etype == 1:
                phys = phys_of_curve.get(ent_tag, ent_tag)
                blines.append([phys, remap[conn[0]], remap[conn[1]]])
            elif etype == 15:
                continue
            else:
                raise GmshError(
                    f"unsupported element type {etype} (triangles only)"
                )
        pos += n_in_block
    if not tris:
        raise GmshError("no triangles found")
    return (
        coords,
        np.asarray(tris, dtype=np.int64),
        np.asarray(blines, dtype=np.int64).reshape(-1, 3),
    )


def write_gmsh22(path, vertices, triangles, boundary_lines=None):
    """Write a minimal MSH 2.2 ASCII file (fixtures and interchange)."""
    vertices = np.asarray(vertices, dtype=float)
    triangles = np.asarray(triangles, dtype=np.int64)
    blines = (
        np.asarray(boundary_lines, dtype=np.int64).reshape(-1, 3)
        if boundary_lines is not None
        else np.empty((0, 3), dtype=np.int64)
    )
    with open(path, "w") as fh:
        fh.write("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n")
        fh.write(f"$Nodes\n{len(vertices)}\n")
        for i, (x, y) in enumerate(vertices, start=1):
            fh.write(f"{i} {x:.16g} {y:.16g} 0\n")
        fh.write("$EndNodes\n")
        fh.write(f"$Elements\n{len(triangles) + len(blines)}\n")
        eid = 1
        for tag, v0, v1 in blines:
            fh.write(f"{eid} 1 2 {tag} {tag} {v0 + 1} {v1 + 1}\n")
            eid += 1
        for tri in triangles:
            fh.write(f"{eid} 2 2 0 0 {tri[0] + 1} {tri[1] + 1} {tri[2] + 1}\n")
            eid += 1
        fh.write("$EndElements\n")
