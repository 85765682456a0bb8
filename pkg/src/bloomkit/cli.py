"""Command-line interface: ``bloomkit {unfold,refine,bloom,verify,frames,lemmas}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import fixtures
from .blooming import (HingeStructure, epsilon_bound, pick_epsilon_delta, pose_at, schedule_path_two_step,
                       schedule_path_unroll, schedule_path_waltz, schedule_tree_unroll)
from .errors import BloomkitError, NotSerpentine, OverlapDetected
from .geodesics import source_unfolding
from .meshio import load_mesh, save_obj
from .serialize import (dumps, lemma_report_to_dict, load, report_to_dict, schedule_from_dict, schedule_to_dict,
                        source_tree, unfolding_from_dict, unfolding_to_dict)
from .unfolding import develop, dual_path, faces_from_cuts, refine_to_serpentine

EXIT_OK, EXIT_INPUT, EXIT_FAIL = 0, 1, 2
EXIT_LEMMA = 5

BUILTIN_MESHES = {"cube": fixtures.unit_cube, "tetrahedron": fixtures.regular_tetrahedron,
                  "octahedron": fixtures.octahedron}
ALGORITHMS = ("path-unroll", "two-step", "waltz", "tree-unroll")


class UsageError(Exception):
    pass


# ----------------------------------------------------------------------
# argument parsing helpers
def _mesh(arg: str, hull: bool = False):
    if arg in BUILTIN_MESHES and not Path(arg).exists():
        return BUILTIN_MESHES[arg]()
    return load_mesh(arg, hull=hull)


def parse_source(Q, text: str) -> np.ndarray:
    """``x,y,z``, ``x,y,z,facet``, ``<side>-center`` (cube side names) or ``facet:<i>``."""
    text = text.strip()
    if text.endswith("-center") and text[:-7] in fixtures.CUBE_SIDES:
        return Q.facet_centroid(fixtures.facet_with_normal(Q, fixtures.CUBE_SIDES[text[:-7]]))
    if text.startswith("facet:"):
        f = int(text[6:])
        if not 0 <= f < Q.n_facets:
            raise UsageError(f"facet {f} out of range")
        return Q.facet_centroid(f)
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse source point {text!r}") from None
    if len(vals) not in (3, 4):
        raise UsageError("source must be x,y,z or x,y,z,facet")
    x = np.array(vals[:3])
    if len(vals) == 4:
        f = int(vals[3])
        if not 0 <= f < Q.n_facets or not Q.contains(f, x):
            raise UsageError(f"source {x.tolist()} is not on facet {f}")
    elif not Q.locate(x):
        raise UsageError(f"source {x.tolist()} is not on the surface")
    return x


def parse_cuts(Q, arg: str):
    if arg == "latin-cross":
        return fixtures.latin_cross_cuts(Q)
    doc = load(arg)
    if isinstance(doc, dict) and "edges" in doc:
        return fixtures.edge_cuts(Q, [int(e) for e in doc["edges"]])
    cuts = doc["cuts"] if isinstance(doc, dict) else doc
    return [np.asarray(c, dtype=float) for c in cuts]


def _emit(doc: dict, out: str | None) -> None:
    text = dumps(doc)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def development_svg(dev, margin: float = 0.05) -> str:
    polys = [dev.outline(f) for f in range(dev.unfolding.n_faces)]
    pts = np.vstack(polys)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = max(hi - lo)
    pad = margin * span
    w, h = hi - lo + 2 * pad
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{lo[0] - pad:.6g} {-hi[1] - pad:.6g} {w:.6g} {h:.6g}">']
    sw = span / 400
    for f, poly in enumerate(polys):
        d = " ".join(f"{x:.9g},{-y:.9g}" for x, y in poly)
        out.append(f'<polygon points="{d}" fill="#f4e3b5" stroke="#333" stroke-width="{sw:.3g}"><title>face {f}</title></polygon>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ----------------------------------------------------------------------
# commands
def cmd_unfold(args) -> int:
    if (args.source is None) == (args.cuts is None):
        raise UsageError("give exactly one of --source or --cuts")
    Q = _mesh(args.mesh, args.hull)
    source = None
    if args.source is not None:
        source = parse_source(Q, args.source)
        U, _ = source_unfolding(Q, source)
    else:
        U = faces_from_cuts(Q, parse_cuts(Q, args.cuts))
    doc = unfolding_to_dict(U, source)
    try:
        dev = develop(U)
    except OverlapDetected as exc:
        print(f"overlap: {exc}", file=sys.stderr)
        _emit(doc, args.out)
        return EXIT_FAIL
    _emit(doc, args.out)
    if args.svg:
        Path(args.svg).write_text(development_svg(dev))
    print(f"{U.n_faces} faces, development area {dev.union_area():.12g}", file=sys.stderr)
    return EXIT_OK


def cmd_refine(args) -> int:
    U, source = unfolding_from_dict(load(args.unfolding))
    R, cert = refine_to_serpentine(U, force=args.force_refine)
    print(f"added {R.added_cuts - U.added_cuts} cuts")
    _emit(unfolding_to_dict(R, source), args.out)
    return EXIT_OK


def make_schedule(U, source, algo: str, eps=None, delta=None, samples: int = 64):
    if algo == "tree-unroll":
        if source is None:
            raise NotSerpentine("tree-unroll needs a source unfolding")
        return schedule_tree_unroll(source_tree(U))
    cert = dual_path(U)
    if algo == "path-unroll":
        return schedule_path_unroll(cert)
    if algo == "two-step":
        return schedule_path_two_step(cert, epsilon_bound(cert) if eps is None else eps)
    if eps is None or delta is None:
        e0, d0 = pick_epsilon_delta(cert, samples=samples)
        eps = e0 if eps is None else eps
        delta = min(d0, eps / 4) if delta is None else delta
    return schedule_path_waltz(cert, eps, delta)


def cmd_bloom(args) -> int:
    U, source = unfolding_from_dict(load(args.unfolding))
    try:
        sched = make_schedule(U, source, args.algo, args.eps, args.delta, args.samples)
    except NotSerpentine as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(f"{args.algo}: {len(sched.moves)} moves, end time {sched.end:.12g}", file=sys.stderr)
    _emit(schedule_to_dict(sched), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import verify_schedule

    U, _ = unfolding_from_dict(load(args.unfolding))
    sched = schedule_from_dict(load(args.schedule))
    hs = HingeStructure.build(U, sched.root)
    rep = verify_schedule(hs, sched, args.samples, raise_on_crossing=False)
    print(rep.summary(), file=sys.stderr)
    _emit(report_to_dict(rep), args.out)
    return rep.exit_code


def frame_polygons(hs, sched, t):
    U = hs.unfolding
    Q = U.base
    pose = pose_at(hs, sched, t)
    return [pose.apply(f.index, Q.to_3d(f.facet, f.outline2d)) for f in U.faces]


def cmd_frames(args) -> int:
    U, _ = unfolding_from_dict(load(args.unfolding))
    sched = schedule_from_dict(load(args.schedule))
    hs = HingeStructure.build(U, sched.root)
    n = max(2, int(round(args.fps * args.duration)))
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        width = len(str(n - 1))
        for k, t in enumerate(np.linspace(0.0, sched.end, n)):
            save_obj(out / f"frame_{k:0{width}d}.obj", frame_polygons(hs, sched, t), f"t={t!r}")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(f"wrote {n} frames to {out}", file=sys.stderr)
    return EXIT_OK


def cmd_lemmas(args) -> int:
    from .verify import run_lemma_suite

    rep = run_lemma_suite(args.seed, args.instances, args.trapezoid, args.subtree)
    for line in rep.lines():
        print(line, file=sys.stderr)
    _emit(lemma_report_to_dict(rep), args.out)
    return EXIT_OK if rep.ok else EXIT_LEMMA


# ----------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bloomkit", description="Continuous blooming of convex polyhedron unfoldings.")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized suites (default 0)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("unfold", help="unfold a mesh from a source point or a cut set")
    s.add_argument("mesh", help="OBJ or JSON mesh, or one of: " + ", ".join(BUILTIN_MESHES))
    s.add_argument("--source", help="x,y,z[,facet], <side>-center or facet:<i>")
    s.add_argument("--cuts", help="JSON cut set (polylines or {'edges': [...]}) or 'latin-cross'")
    s.add_argument("--hull", action="store_true", help="replace the mesh by its convex hull")
    s.add_argument("--svg", help="write the development outline here")
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_unfold)

    s = sub.add_parser("refine", help="add cuts until the dual tree is a path")
    s.add_argument("unfolding")
    s.add_argument("--force-refine", action="store_true", help="refine even if already serpentine")
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_refine)

    s = sub.add_parser("bloom", help="build an opening schedule")
    s.add_argument("unfolding")
    s.add_argument("--algo", choices=ALGORITHMS, default="waltz")
    s.add_argument("--eps", type=float)
    s.add_argument("--delta", type=float)
    s.add_argument("--samples", type=int, default=64, help="samples per move when picking eps/delta")
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_bloom)

    s = sub.add_parser("verify", help="check a schedule for crossings")
    s.add_argument("unfolding")
    s.add_argument("schedule")
    s.add_argument("--samples", type=int, default=64)
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("frames", help="export one OBJ per animation frame")
    s.add_argument("unfolding")
    s.add_argument("schedule")
    s.add_argument("--fps", type=float, default=30.0)
    s.add_argument("--duration", type=float, default=10.0, help="animation length in seconds")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_frames)

    s = sub.add_parser("lemmas", help="run the randomized lemma property suite")
    s.add_argument("--instances", type=int, default=100)
    s.add_argument("--trapezoid", type=int, default=1000)
    s.add_argument("--subtree", type=int, default=None)
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_lemmas)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (UsageError, BloomkitError, OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
