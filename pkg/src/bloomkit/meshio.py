"""Reading and writing polyhedral meshes (Wavefront OBJ and a small JSON format)."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DegenerateInput
from .geometry import Polyhedron, build_convex_polyhedron

SCHEMA = "bloomkit/1"


def parse_obj(text: str):
    """Vertices and polygon index loops from OBJ text; texture/normal indices are ignored."""
    verts, faces = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tag, *rest = line.split()
        try:
            if tag == "v":
                if len(rest) < 3:
                    raise ValueError("vertex needs three coordinates")
                verts.append([float(x) for x in rest[:3]])
            elif tag == "f":
                if len(rest) < 3:
                    raise ValueError("face needs at least three vertices")
                idx = []
                for tok in rest:
                    i = int(tok.split("/")[0])
                    idx.append(i - 1 if i > 0 else len(verts) + i)
                faces.append(idx)
        except ValueError as exc:
            raise DegenerateInput(f"line {lineno}: {exc}") from None
    if not verts or not faces:
        raise DegenerateInput("mesh has no vertices or no faces")
    n = len(verts)
    for f in faces:
        if min(f) < 0 or max(f) >= n:
            raise DegenerateInput(f"face {f} refers to a missing vertex")
    return np.array(verts, dtype=float), faces


def polyhedron_from_arrays(vertices, facets, artificial=None, hull: bool = False) -> Polyhedron:
    if hull:
        return build_convex_polyhedron(np.asarray(vertices, dtype=float))
    Q = Polyhedron(vertices, facets, artificial)
    if not Q.is_convex():
        raise DegenerateInput("mesh is not convex (use hull=True to take its convex hull)")
    return Q


def load_mesh(path, hull: bool = False) -> Polyhedron:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text)
            return polyhedron_from_arrays(data["vertices"], data["facets"], data.get("artificial"), hull)
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DegenerateInput(f"bad mesh JSON: {exc}") from None
    v, f = parse_obj(text)
    return polyhedron_from_arrays(v, f, hull=hull)


def mesh_to_dict(Q: Polyhedron) -> dict:
    return {"vertices": Q.vertices.tolist(), "facets": [list(f) for f in Q.facets],
            "artificial": list(Q.artificial)}


def obj_text(polygons, comment: str | None = None) -> str:
    """OBJ text for a list of 3D polygons, each written with its own vertices."""
    out = [f"# {comment}"] if comment else []
    faces = []
    k = 1
    for poly in polygons:
        for x in poly:
            out.append("v " + " ".join(repr(float(c)) for c in x))
        faces.append("f " + " ".join(str(k + i) for i in range(len(poly))))
        k += len(poly)
    return "\n".join(out + faces) + "\n"


def save_obj(path, polygons, comment: str | None = None) -> None:
    Path(path).write_text(obj_text(polygons, comment))
