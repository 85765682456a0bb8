"""Randomized property checks for the geodesic and unrolling lemmas."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .blooming import HingeStructure, pose_at, schedule_tree_unroll
from .contact import TAU_TOUCH
from .fixtures import random_hull, random_surface_point
from .geodesics import grown_polyhedron, shortest_path, source_unfolding
from .geometry import RigidTransform, halfspace_intersection, scaled_box, unit

LENGTH_TOL = 1e-9
TRAPEZOID_TOL = 1e-12
FLAT_TOL = 1e-8


@dataclass
class LemmaResult:
    name: str
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    worst: float = np.inf  # smallest margin seen (negative means violated)
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failed == 0 and self.passed > 0

    def record(self, margin: float, detail=None):
        self.worst = min(self.worst, float(margin))
        if margin >= 0:
            self.passed += 1
        else:
            self.failed += 1
            if len(self.failures) < 10:
                self.failures.append(detail)


@dataclass
class LemmaSuiteReport:
    seed: int
    results: dict

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results.values())

    def lines(self) -> list[str]:
        out = []
        for r in self.results.values():
            tag = "PASS" if r.ok else "FAIL"
            out.append(f"{tag} {r.name}: {r.passed} passed, {r.failed} failed, {r.skipped} skipped, "
                       f"worst margin {r.worst:.3g}")
        return out

    def to_dict(self) -> dict:
        return {"seed": self.seed, "ok": self.ok,
                "lemmas": {k: {"passed": r.passed, "failed": r.failed, "skipped": r.skipped,
                               "worst_margin": None if not np.isfinite(r.worst) else r.worst}
                           for k, r in self.results.items()}}


def _hull_and_pair(rng, max_facets=20):
    Q = random_hull(rng, int(rng.integers(5, 21)), max_facets=max_facets)
    return Q, random_surface_point(Q, rng), random_surface_point(Q, rng)


def check_growing(rng, n: int, degenerate: bool = True) -> LemmaResult:
    """Shortest paths on an enclosing polyhedron sharing both endpoints are no shorter."""
    res = LemmaResult("growing")
    for i in range(n):
        Q, p, q = _hull_and_pair(rng)
        need = {int(f) for x in (p, q) for f in Q.locate(x)}
        if degenerate and i == 0:
            keep = list(range(Q.n_facets))
        else:
            keep = sorted(need | {f for f in range(Q.n_facets) if rng.random() < 0.5})
        Qp = halfspace_intersection([Q.planes[f] for f in keep], scaled_box(*Q.bbox(), factor=10.0))
        d = shortest_path(Q, p, q).length
        dp = shortest_path(Qp, p, q).length
        res.record(dp - d + LENGTH_TOL, (i, d, dp))
    return res


def check_still_shortest(rng, n: int) -> LemmaResult:
    """A shortest path stays shortest on the polyhedron grown from its own facets."""
    res = LemmaResult("still-shortest")
    for i in range(n):
        Q, p, q = _hull_and_pair(rng)
        P = shortest_path(Q, p, q)
        G = grown_polyhedron(Q, P)
        dg = shortest_path(G, p, q).length
        res.record(LENGTH_TOL - abs(dg - P.length), (i, P.length, dg))
    return res


def check_trapezoid(rng, n: int) -> LemmaResult:
    """Rotating p0 out of its plane about a line through p1 never brings it closer to a point on its side."""
    res = LemmaResult("trapezoid")
    for i in range(n):
        p1 = rng.normal(size=2)
        d = unit(rng.normal(size=2))
        side = np.array([-d[1], d[0]])
        p0 = p1 + rng.normal() * d + abs(rng.normal()) * side
        pt = p1 + rng.normal() * d + abs(rng.normal()) * side
        theta = rng.uniform(0.0, np.pi)
        lift = lambda x: np.array([x[0], x[1], 0.0])
        rot = RigidTransform.about_axis(lift(p1), lift(d), theta)
        p0r = rot.apply(lift(p0))
        margin = np.linalg.norm(p0r - lift(pt)) - np.linalg.norm(p0 - pt) + TRAPEZOID_TOL
        res.record(margin, (i, theta))
    return res


def _strip_unroll_margins(Q, P, samples: int):
    """Signed clearances from the last facet plane while Path-Unroll flattens the facets of ``P``."""
    faces, pts = list(P.faces), np.array(P.points, dtype=float)
    k = len(faces)
    plane = Q.planes[faces[-1]]
    # vertex p_j rides on facet faces[j]; p_{k-1} already lies on the last facet
    moving = pts[: k - 1].copy()
    owner = np.arange(k - 1)
    before_end, at_end = np.inf, 0.0
    for i in range(k - 1):
        e = P.edges[i]
        a, b = Q.vertices[Q.edges[e]]
        n0, n1 = Q.planes[faces[i]].normal, Q.planes[faces[i + 1]].normal
        u = unit(b - a)
        if u @ np.cross(n0, n1) < 0:
            u = -u
        psi = np.pi - Q.dihedral(e)
        sel = owner <= i
        base = moving[sel]
        last = i == k - 2
        for s in np.arange(1, samples + 1) / samples:
            x = RigidTransform.about_axis(a, u, s * psi).apply(base)
            gap = plane.offset - x @ plane.normal
            if last and s == 1.0:
                at_end = float(np.abs(gap).max())
            else:
                before_end = min(before_end, float(gap.min()))
        moving[sel] = RigidTransform.about_axis(a, u, psi).apply(base)
    return before_end, at_end


def check_path_unroll_plane(rng, n: int, samples: int = 64) -> LemmaResult:
    """Unrolling a shortest path's facets keeps it off the last facet plane until the final move ends."""
    res = LemmaResult("path-unroll-plane")
    for i in range(n):
        Q, p, q = _hull_and_pair(rng)
        P = shortest_path(Q, p, q)
        if len(P.faces) < 2 or len(P.edges) != len(P.faces) - 1:
            res.skipped += 1
            continue
        before, end = _strip_unroll_margins(Q, P, samples)
        res.record(min(before - TAU_TOUCH, FLAT_TOL - end), (i, before, end))
    return res


def check_subtree(rng, n: int, samples: int = 32) -> LemmaResult:
    """During Tree-Unroll a subtree stays off its parent's plane until its own move ends, then lies on it."""
    res = LemmaResult("subtree")
    for i in range(n):
        Q = random_hull(rng, int(rng.integers(6, 30)), max_facets=30)
        U, T = source_unfolding(Q, random_surface_point(Q, rng))
        sched = schedule_tree_unroll(T)
        hs = HingeStructure.build(U, T.root)
        grid = np.unique(np.concatenate([np.linspace(m.t0, m.t1, samples + 1) for m in sched.moves]))
        poses = [pose_at(hs, sched, t) for t in grid]
        R = np.stack([p.rotations for p in poses])  # (G, F, 3, 3)
        tr = np.stack([p.translations for p in poses])  # (G, F, 3)
        first = {}
        for j, m in enumerate(sched.moves):
            for f in hs.subtree[m.hinge]:
                first.setdefault(f, j)
        worst = np.inf
        for m in sched.moves:
            f = int(hs.child[m.hinge])
            parent = hs.parent[f][0]
            sub = sorted(hs.subtree[m.hinge])
            start = sched.moves[min(first[g] for g in sub)].t0
            sel = (grid > start) & (grid <= m.t1)
            end = np.isclose(grid[sel], m.t1, rtol=0, atol=1e-12)
            a, b = U.hinges[m.hinge].endpoints
            pl = Q.planes[U.faces[parent].facet]
            nrm = R[sel, parent] @ pl.normal  # (G', 3)
            off = pl.offset + np.einsum("gi,gi->g", nrm, tr[sel, parent])
            v = np.vstack([U.faces[g].loop for g in sub])
            owner = np.concatenate([[g] * len(U.faces[g].loop) for g in sub])
            d = b - a
            w = v - a
            # vertices on the hinge line sit on the parent plane throughout
            free = np.linalg.norm(w - np.outer(w @ d / (d @ d), d), axis=1) > TAU_TOUCH
            x = np.einsum("gvij,vj->gvi", R[sel][:, owner], v) + tr[sel][:, owner]
            gap = off[:, None] - np.einsum("gvi,gi->gv", x, nrm)
            if (~end).any() and free.any():
                worst = min(worst, float(gap[~end][:, free].min()) - TAU_TOUCH)
            if end.any():
                worst = min(worst, FLAT_TOL - float(np.abs(gap[end]).max()))
        res.record(worst, (i, worst))
    return res


def run_lemma_suite(seed: int = 0, n_instances: int = 100, trapezoid_instances: int = 1000,
                    subtree_instances: int | None = None) -> LemmaSuiteReport:
    """Run every lemma check on fresh random instances drawn from ``seed``."""
    rng = np.random.default_rng(seed)
    results = {}
    results["growing"] = check_growing(rng, n_instances)
    results["still-shortest"] = check_still_shortest(rng, n_instances)
    results["trapezoid"] = check_trapezoid(rng, trapezoid_instances)
    results["path-unroll-plane"] = check_path_unroll_plane(rng, n_instances)
    m = subtree_instances if subtree_instances is not None else max(1, n_instances // 10)
    results["subtree"] = check_subtree(rng, m)
    return LemmaSuiteReport(seed, results)
