"""Mesh and table file formats: legacy VTK, OFF and CSV.

All floats are written with 17 significant digits so ASCII round trips are
lossless and identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


def _fmt(x):
    return f"{float(x):.17g}"


def write_vtk(path, mesh, point_fields=None, cell_fields=None, title="surfem"):
    """Write a legacy ASCII VTK polydata file.

    ``point_fields`` and ``cell_fields`` map names to arrays with one scalar
    (or 3-vector) per vertex or triangle.
    """
    point_fields = point_fields or {}
    cell_fields = cell_fields or {}
    nv, nt = mesh.n_vertices, mesh.n_triangles
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET POLYDATA", f"POINTS {nv} double"]
    lines += [" ".join(map(_fmt, v)) for v in mesh.vertices]
    lines.append(f"POLYGONS {nt} {4 * nt}")
    lines += [f"3 {a} {b} {c}" for a, b, c in mesh.triangles]
    for header, count, fields in (("CELL_DATA", nt, cell_fields), ("POINT_DATA", nv, point_fields)):
        if not fields:
            continue
        lines.append(f"{header} {count}")
        for name, values in fields.items():
            values = np.asarray(values, dtype=float)
            if values.shape[0] != count:
                raise ValueError(f"field {name!r} has {values.shape[0]} entries, expected {count}")
            if values.ndim == 2 and values.shape[1] == 3:
                lines.append(f"VECTORS {name} double")
                lines += [" ".join(map(_fmt, v)) for v in values]
            else:
                lines.append(f"SCALARS {name} double 1")
                lines.append("LOOKUP_TABLE default")
                lines += [_fmt(v) for v in values.ravel()]
    Path(path).write_text("\n".join(lines) + "\n")


def write_off(path, vertices, triangles):
    lines = ["OFF", f"{len(vertices)} {len(triangles)} 0"]
    lines += [" ".join(map(_fmt, v)) for v in vertices]
    lines += [f"3 {a} {b} {c}" for a, b, c in triangles]
    Path(path).write_text("\n".join(lines) + "\n")


def read_off(path):
    """Return ``(vertices, triangles)`` from an OFF file."""
    tokens = [ln.split("#")[0].split() for ln in Path(path).read_text().splitlines()]
    tokens = [t for t in tokens if t]
    if tokens[0][0] != "OFF":
        raise ValueError("not an OFF file")
    head = tokens[0][1:] if len(tokens[0]) > 1 else tokens[1]
    body = tokens[1:] if len(tokens[0]) > 1 else tokens[2:]
    nv, nf = int(head[0]), int(head[1])
    vertices = np.array([[float(x) for x in row[:3]] for row in body[:nv]])
    faces = []
    for row in body[nv : nv + nf]:
        if int(row[0]) != 3:
            raise ValueError("only triangles are supported")
        faces.append([int(x) for x in row[1:4]])
    return vertices, np.array(faces, dtype=np.int64).reshape(-1, 3)


def write_csv(path, header, rows):
    """Write rows under a fixed header; floats use 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def read_csv(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [row for row in r]
