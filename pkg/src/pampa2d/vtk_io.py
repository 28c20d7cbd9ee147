"""Result output: VTK legacy unstructured grids, CSV tables, diagnostics."""

from __future__ import annotations

import csv

import numpy as np

from . import model

VTK_QUADRATIC_TRIANGLE = 22


def write_vtk(path, mesh, field, z_dof, variable_set="pmt", flags=None):
    """Write the field as quadratic-triangle cells in VTK legacy ASCII.

    Point data: h, hu, hv, htheta, theta, p, Z at every DoF.  Cell data: the
    four conservative averages plus theta_E = (htheta)bar/hbar, p_E =
    hbar*(htheta)bar and the MOOD flag.  VTK's quadratic triangle expects the
    three corners followed by the midpoints of edges (0,1), (1,2), (2,0),
    which matches the element DoF layout directly.
    """
    pts_cons = model.from_variables(field.point_values, variable_set, check=False)
    h, hu, hv, hth = (pts_cons[:, i] for i in range(4))
    with np.errstate(invalid="ignore", divide="ignore"):
        theta = hth / h
        p = h * hth
    avg = field.cell_averages
    with np.errstate(invalid="ignore", divide="ignore"):
        theta_e = avg[:, 3] / avg[:, 0]
        p_e = avg[:, 0] * avg[:, 3]
    if flags is None:
        flags = np.zeros(mesh.n_elements, dtype=int)

    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write("pampa2d solution\n")
        fh.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {mesh.n_dofs} double\n")
        for x, y in mesh.dof_coords:
            fh.write(f"{x:.16e} {y:.16e} 0\n")
        fh.write(f"CELLS {mesh.n_elements} {mesh.n_elements * 7}\n")
        for row in mesh.elem_dofs:
            fh.write("6 " + " ".join(str(int(d)) for d in row) + "\n")
        fh.write(f"CELL_TYPES {mesh.n_elements}\n")
        fh.write("\n".join([str(VTK_QUADRATIC_TRIANGLE)] * mesh.n_elements) + "\n")

        fh.write(f"POINT_DATA {mesh.n_dofs}\n")
        for name, arr in (
            ("h", h),
            ("hu", hu),
            ("hv", hv),
            ("htheta", hth),
            ("theta", theta),
            ("p", p),
            ("Z", np.asarray(z_dof)),
        ):
            fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            fh.write("\n".join(f"{v:.16e}" for v in arr) + "\n")

        fh.write(f"CELL_DATA {mesh.n_elements}\n")
        for name, arr in (
            ("h_avg", avg[:, 0]),
            ("hu_avg", avg[:, 1]),
            ("hv_avg", avg[:, 2]),
            ("htheta_avg", avg[:, 3]),
            ("theta_E", theta_e),
            ("p_E", p_e),
        ):
            fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            fh.write("\n".join(f"{v:.16e}" for v in arr) + "\n")
        fh.write("SCALARS mood_flag int 1\nLOOKUP_TABLE default\n")
        fh.write("\n".join(str(int(v)) for v in flags) + "\n")


def read_vtk_points(path):
    """Point coordinates from a legacy VTK file (round-trip checks)."""
    pts = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("POINTS"):
                n = int(line.split()[1])
                for _ in range(n):
                    vals = fh.readline().split()
                    pts.append((float(vals[0]), float(vals[1])))
                break
    return np.asarray(pts)


def write_csv(path, header, rows):
    """RFC-4180-style CSV with a header row."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(list(row))


def write_diagnostics(path, rows):
    """Per-step diagnostics: t, dt, flag counts, conserved totals."""
    write_csv(
        path,
        ["t", "dt", "flagged_elements", "flagged_points", "mass_total", "htheta_total"],
        [
            (f"{r[0]:.12g}", f"{r[1]:.12g}", int(r[2]), int(r[3]),
             f"{r[4]:.16e}", f"{r[5]:.16e}")
            for r in rows
        ],
    )


def write_convergence_tables(prefix, study):
    """Two CSVs (averages / point values) in the error-and-rate layout."""
    var_names = ("h", "hu", "hv", "htheta")

    def table(which_l1, size_attr):
        rows = []
        prev = None
        for row in study.rows:
            errs = getattr(row.errors, which_l1)
            size = getattr(row, size_attr)
            rates = [""] * 4
            if prev is not None:
                p_errs, p_size = prev
                with np.errstate(divide="ignore", invalid="ignore"):
                    r = np.log(p_errs / errs) / np.log(p_size / size)
                rates = [f"{v:.2f}" for v in r]
            out = [f"{size:.4f}", row.n_elements, row.n_dofs]
            for k in range(4):
                out += [f"{errs[k]:.6e}", rates[k]]
            rows.append(out)
            prev = (errs, size)
        return rows

    header = ["size_metric", "n_elements", "n_dofs"]
    for v in var_names:
        header += [f"{v}_L1", f"{v}_rate"]
    write_csv(f"{prefix}_averages.csv", header, table("avg_l1", "size_metric_avg"))
    write_csv(f"{prefix}_points.csv", header, table("point_l1", "size_metric_point"))


def write_steady_table(path, reports):
    """Drift table: one row per (scheme label, norms) pair."""
    header = ["scheme"]
    for v in ("h", "hu", "hv", "htheta"):
        for norm in ("L1_avg", "Linf_avg", "L1_point", "Linf_point"):
            header.append(f"{v}_{norm}")
    rows = []
    for label, norms in reports:
        row = [label]
        for k in range(4):
            row += [
                f"{norms.avg_l1[k]:.6e}",
                f"{norms.avg_linf[k]:.6e}",
                f"{norms.point_l1[k]:.6e}",
                f"{norms.point_linf[k]:.6e}",
            ]
        rows.append(row)
    write_csv(path, header, rows)
