"""Versioned JSON encodings of unfoldings, schedules and reports.

Floats go through ``json`` which writes the shortest decimal that reads back
to the same double, so every document round-trips bit-exactly.
"""
from __future__ import annotations

import json
from pathlib import Path

import networkx as nx
import numpy as np

from .blooming import Move, Schedule
from .errors import DegenerateInput
from .geodesics import SourceUnfoldingTree
from .meshio import SCHEMA, mesh_to_dict, polyhedron_from_arrays
from .unfolding import Unfolding, faces_from_cuts


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def _check(doc: dict, kind: str) -> None:
    if doc.get("schema") != SCHEMA:
        raise DegenerateInput(f"unsupported schema {doc.get('schema')!r}")
    if doc.get("kind") != kind:
        raise DegenerateInput(f"expected a {kind} document, got {doc.get('kind')!r}")


def unfolding_to_dict(U: Unfolding, source=None) -> dict:
    doc = {
        "schema": SCHEMA,
        "kind": "unfolding",
        "mesh": mesh_to_dict(U.base),
        "cuts": [np.asarray(c, dtype=float).tolist() for c in U.cuts],
        "root": int(U.root),
        "added_cuts": int(U.added_cuts),
        "source": None if source is None else [float(x) for x in source],
        "n_faces": U.n_faces,
        "serpentine": bool(U.is_serpentine()),
    }
    return doc


def unfolding_from_dict(doc: dict):
    """Rebuild ``(unfolding, source)``; ``source`` is None for unfoldings not made from a source point."""
    _check(doc, "unfolding")
    m = doc["mesh"]
    Q = polyhedron_from_arrays(m["vertices"], m["facets"], m.get("artificial"))
    U = faces_from_cuts(Q, doc["cuts"], root=int(doc["root"]), added_cuts=int(doc.get("added_cuts", 0)))
    if U.n_faces != doc.get("n_faces", U.n_faces):
        raise DegenerateInput("cut set does not reproduce the recorded face count")
    src = doc.get("source")
    return U, None if src is None else np.array(src, dtype=float)


def source_tree(U: Unfolding) -> SourceUnfoldingTree:
    """Face tree of a source unfolding rooted at its root face (labels are not stored)."""
    parent = dict(nx.bfs_predecessors(U.dual, U.root))
    return SourceUnfoldingTree(U, U.root, parent, {})


def schedule_to_dict(sched: Schedule) -> dict:
    return {
        "schema": SCHEMA,
        "kind": "schedule",
        "algorithm": sched.algorithm,
        "root": int(sched.root),
        "epsilon": sched.epsilon,
        "delta": sched.delta,
        "moves": [{"hinge": m.hinge, "from": m.start, "to": m.end, "t0": m.t0, "t1": m.t1} for m in sched.moves],
    }


def schedule_from_dict(doc: dict) -> Schedule:
    _check(doc, "schedule")
    try:
        moves = tuple(Move(int(m["hinge"]), float(m["from"]), float(m["to"]), float(m["t0"]), float(m["t1"]))
                      for m in doc["moves"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DegenerateInput(f"bad move entry: {exc}") from None
    return Schedule(doc["algorithm"], moves, int(doc["root"]), doc.get("epsilon"), doc.get("delta"))


def report_to_dict(report) -> dict:
    return {"schema": SCHEMA, "kind": "verification", **report.to_dict()}


def lemma_report_to_dict(report) -> dict:
    return {"schema": SCHEMA, "kind": "lemmas", **report.to_dict()}


def load(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DegenerateInput(f"{path}: {exc}") from None


def save(path, doc: dict) -> None:
    Path(path).write_text(dumps(doc))
