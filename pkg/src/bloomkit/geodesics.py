"""Shortest paths and the cut locus on convex polyhedral surfaces.

Distances from a source are propagated as *windows*: an interval of a facet
edge together with the planar image of the source, unfolded into the frame of
the facet the window enters. Shortest paths on a convex surface never pass
through a vertex, so no pseudo-sources are needed. Windows on the same edge
are trimmed against each other (the difference of two squared distance
functions along an edge is linear, so trimming is exact) and expanded in
order of their minimum distance.

After a full propagation every facet carries a set of labelled cones; the
label of a window is the facet sequence its rays cross. The cut locus is the
set of points where two different labels attain the minimum distance.
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
from scipy.spatial import cKDTree

from .errors import CutsNotSpanningTree, SourceIsVertex
from .geometry import Polyhedron, clip_polygon, halfspace_intersection, scaled_box

ARC_COLLAPSE = 1e-7
SNAP_LADDER = (1e-8, 1e-7, 1e-6, 1e-5)


# ----------------------------------------------------------------------
# surface points
@dataclass(frozen=True)
class SurfacePoint:
    """Point on the surface with its location class (``vertex``, ``edge`` or ``facet``)."""

    position: np.ndarray
    kind: str
    index: int
    facets: tuple[int, ...]


def locate(Q: Polyhedron, x, tol: float | None = None) -> SurfacePoint:
    x = np.asarray(x, dtype=float).reshape(3)
    tol = Q.tol if tol is None else tol
    v = Q.vertex_at(x, tol)
    if v is not None:
        return SurfacePoint(Q.vertices[v].copy(), "vertex", v, tuple(Q.vertex_facets(v)))
    e = Q.edge_at(x, tol)
    if e is not None:
        return SurfacePoint(x, "edge", e, tuple(int(f) for f in Q.edge_facets[e]))
    fs = Q.locate(x, tol)
    if not fs:
        fs = Q.locate(x, 100 * tol)
    if not fs:
        raise ValueError(f"point {x} is not on the surface")
    return SurfacePoint(x, "facet", fs[0], (fs[0],))


def _as_point(Q, p) -> SurfacePoint:
    return p if isinstance(p, SurfacePoint) else locate(Q, p)


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class GeodesicPath:
    """Polygonal surface path ``points[0] .. points[k]``; segment ``i`` lies on ``faces[i]``."""

    points: np.ndarray
    faces: tuple[int, ...]
    length: float
    edges: tuple[int, ...] = ()  # edge crossed between faces[i] and faces[i+1]

    @property
    def face_sequence(self) -> tuple[int, ...]:
        return self.faces

    def development(self, Q: Polyhedron) -> np.ndarray:
        """Planar images of the path points after unfolding the face sequence into the first face's frame."""
        R, t = np.eye(2), np.zeros(2)
        out = [Q.to_2d(self.faces[0], self.points[0])]
        for i, f in enumerate(self.faces):
            if i > 0:
                T = _frame_map(Q, f, self.faces[i - 1], self.edges[i - 1])
                R, t = R @ T[0], R @ T[1] + t
            out.append(R @ Q.to_2d(f, self.points[i + 1]) + t)
        return np.array(out)


def _frame_map(Q: Polyhedron, src: int, dst: int, e: int):
    """2D rigid map from the frame of facet ``src`` to the frame of ``dst`` across their common edge ``e``."""
    a, b = Q.edges[e]
    pa, pb = Q.vertices[a], Q.vertices[b]
    A1, B1 = Q.to_2d(src, pa), Q.to_2d(src, pb)
    A2, B2 = Q.to_2d(dst, pa), Q.to_2d(dst, pb)
    d1, d2 = B1 - A1, B2 - A2
    ang = np.arctan2(d2[1], d2[0]) - np.arctan2(d1[1], d1[0])
    c, s = np.cos(ang), np.sin(ang)
    R = np.array([[c, -s], [s, c]])
    return R, A2 - R @ A1


def _cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


def _halfline(g0, g1, lo, hi):
    """Restrict ``[lo, hi]`` to where ``g0 + g1 u >= 0``."""
    if abs(g1) < 1e-300:
        return (lo, hi) if g0 >= 0 else (1.0, 0.0)
    r = -g0 / g1
    return (max(lo, r), hi) if g1 > 0 else (lo, min(hi, r))


def _subtract(ivals, a, b, tiny):
    out = []
    for x0, x1 in ivals:
        if b <= x0 or a >= x1:
            out.append((x0, x1))
            continue
        if a - x0 > tiny:
            out.append((x0, a))
        if x1 - b > tiny:
            out.append((b, x1))
    return out


class _Window:
    __slots__ = ("facet", "edge", "src", "ivals", "seq", "parent", "c", "h", "uid")

    def __init__(self, facet, edge, src, ivals, seq, parent, c, h, uid):
        self.facet = facet
        self.edge = edge
        self.src = src
        self.ivals = ivals
        self.seq = seq
        self.parent = parent
        self.c = c
        self.h = h
        self.uid = uid

    def min_dist(self):
        best = np.inf
        for x0, x1 in self.ivals:
            x = min(max(self.c, x0), x1)
            best = min(best, np.hypot(x - self.c, self.h))
        return best


class _Surface:
    """Per-polyhedron tables shared by all propagations."""

    def __init__(self, Q: Polyhedron):
        self.Q = Q
        self.scale = max(1.0, Q.diameter)
        self.tiny = 1e-12 * self.scale
        self.edge_2d = {}  # (facet, edge) -> (A, unit dir, length)
        self.maps = {}  # (facet, edge) -> (R, t) into the neighbour across edge
        for f in range(Q.n_facets):
            for e in Q.facet_edges(f):
                a, b = Q.edges[e]
                A = Q.to_2d(f, Q.vertices[a])
                B = Q.to_2d(f, Q.vertices[b])
                L = float(np.linalg.norm(B - A))
                self.edge_2d[(f, e)] = (A, (B - A) / L, L)
                self.maps[(f, e)] = _frame_map(Q, f, Q.other_facet(e, f), e)
        self.facet_edges = [Q.facet_edges(f) for f in range(Q.n_facets)]


_SURFACES: dict[int, _Surface] = {}


def _surface(Q: Polyhedron) -> _Surface:
    s = _SURFACES.get(id(Q))
    if s is None or s.Q is not Q:
        s = _Surface(Q)
        _SURFACES[id(Q)] = s
        if len(_SURFACES) > 64:
            _SURFACES.pop(next(iter(_SURFACES)))
    return s


class Propagation:
    """Window propagation from a single source point."""

    def __init__(self, Q: Polyhedron, source, allow_vertex: bool = True):
        self.Q = Q
        self.S = _surface(Q)
        self.source = _as_point(Q, source)
        if self.source.kind == "vertex" and not allow_vertex:
            raise SourceIsVertex("source point coincides with a polyhedron vertex")
        self.registry: dict[int, list[_Window]] = {}
        self.windows: list[_Window] = []
        self._heap = []
        self._uid = itertools.count()
        self.roots = self._roots()
        self.done = False

    # -- setup ---------------------------------------------------------
    def _roots(self):
        Q, sp = self.Q, self.source
        x = sp.position
        if sp.kind == "facet":
            return [(sp.index, Q.to_2d(sp.index, x), (sp.index,))]
        if sp.kind == "edge":
            f1, f2 = sp.facets
            return [(f1, Q.to_2d(f1, x), (f1,)), (f2, Q.to_2d(f2, x), (f1, f2))]
        return [(f, Q.to_2d(f, x), (f,)) for f in sp.facets]

    def _source_on_edge(self, e):
        sp = self.source
        if sp.kind == "edge":
            return e == sp.index
        if sp.kind == "vertex":
            return sp.index in self.Q.edges[e]
        return False

    def _make(self, facet, edge, src, ivals, seq, parent):
        A, d, _ = self.S.edge_2d[(facet, edge)]
        r = src - A
        c = float(r @ d)
        h = abs(float(_cross(d, r)))
        return _Window(facet, edge, src, ivals, seq, parent, c, h, next(self._uid))

    def _insert(self, w):
        tiny = self.S.tiny
        lst = self.registry.setdefault(w.edge, [])
        for v in lst:
            if not v.ivals or not w.ivals:
                continue
            alpha = 2.0 * (v.c - w.c)
            beta = w.c * w.c - v.c * v.c + w.h * w.h - v.h * v.h
            lose_v, lose_w = [], []
            for a0, a1 in w.ivals:
                for b0, b1 in v.ivals:
                    lo, hi = max(a0, b0), min(a1, b1)
                    if hi - lo <= tiny:
                        continue
                    if abs(alpha) < 1e-14 * self.S.scale:
                        better = (lo, hi) if beta < 0 else None
                    else:
                        r = -beta / alpha
                        better = (lo, min(hi, r)) if alpha > 0 else (max(lo, r), hi)
                        if better[1] - better[0] <= 0:
                            better = None
                    if better is None:
                        lose_w.append((lo, hi))
                    else:
                        lose_v.append(better)
                        if better[0] > lo:
                            lose_w.append((lo, better[0]))
                        if better[1] < hi:
                            lose_w.append((better[1], hi))
            for a, b in lose_v:
                v.ivals = _subtract(v.ivals, a, b, tiny)
            for a, b in lose_w:
                w.ivals = _subtract(w.ivals, a, b, tiny)
        w.ivals = [(a, b) for a, b in w.ivals if b - a > tiny]
        if w.ivals:
            lst.append(w)
            self.windows.append(w)
            heapq.heappush(self._heap, (w.min_dist(), w.uid, w))
            return True
        return False

    def _seed(self):
        Q = self.Q
        for f, s2, seq in self.roots:
            for e in self.S.facet_edges[f]:
                if self._source_on_edge(e):
                    continue
                n = Q.other_facet(e, f)
                if n in seq:
                    continue
                R, t = self.S.maps[(f, e)]
                L = self.S.edge_2d[(f, e)][2]
                w = self._make(n, e, R @ s2 + t, [(0.0, L)], seq + (n,), None)
                self._insert(w)
                if self._targets is not None:
                    self._check_targets(w)

    # -- propagation ---------------------------------------------------
    def _children(self, w):
        S = self.S
        A, d, _ = S.edge_2d[(w.facet, w.edge)]
        s = w.src
        out = []
        for e2 in S.facet_edges[w.facet]:
            if e2 == w.edge:
                continue
            n = self.Q.other_facet(e2, w.facet)
            if n in w.seq:
                continue
            P, d2, L2 = S.edge_2d[(w.facet, e2)]
            seg = d2 * L2
            R, t = S.maps[(w.facet, e2)]
            src_n = R @ s + t
            for x0, x1 in w.ivals:
                d0 = A + x0 * d - s
                d1 = A + x1 * d - s
                if _cross(d0, d1) < 0:
                    d0, d1 = d1, d0
                lo, hi = 0.0, 1.0
                lo, hi = _halfline(_cross(d0, P - s), _cross(d0, seg), lo, hi)
                lo, hi = _halfline(_cross(P - s, d1), _cross(seg, d1), lo, hi)
                if (hi - lo) * L2 <= S.tiny:
                    continue
                out.append(self._make(n, e2, src_n, [(lo * L2, hi * L2)], w.seq + (n,), w))
        return out

    _targets = None

    def _check_targets(self, w):
        for k, (f, q2) in enumerate(self._targets):
            if f != w.facet:
                continue
            if self._covers(w, q2):
                dist = float(np.linalg.norm(q2 - w.src))
                if dist < self._best[0]:
                    self._best = (dist, w, k)

    def _covers(self, w, y, tol=None):
        A, d, _ = self.S.edge_2d[(w.facet, w.edge)]
        s = w.src
        tol = 1e-10 * self.S.scale if tol is None else tol
        r = y - s
        for x0, x1 in w.ivals:
            d0 = A + x0 * d - s
            d1 = A + x1 * d - s
            if _cross(d0, d1) < 0:
                d0, d1 = d1, d0
            if _cross(d0, r) >= -tol * np.linalg.norm(d0) and _cross(r, d1) >= -tol * np.linalg.norm(d1):
                return True
        return False

    def run(self, target=None):
        """Propagate; with ``target`` stop as soon as its distance is settled."""
        Q = self.Q
        if target is not None:
            tp = _as_point(Q, target)
            self._targets = [(f, Q.to_2d(f, tp.position)) for f in tp.facets]
            self._best = (np.inf, None, -1)
            for f, s2, seq in self.roots:
                for k, (g, q2) in enumerate(self._targets):
                    if g == f:
                        dist = float(np.linalg.norm(q2 - s2))
                        if dist < self._best[0]:
                            self._best = (dist, ("root", f, s2, seq), k)
        self._seed()
        tiny = self.S.tiny
        while self._heap:
            key, _, w = self._heap[0]
            if target is not None and key >= self._best[0] - tiny:
                break
            heapq.heappop(self._heap)
            if not w.ivals:
                continue
            cur = w.min_dist()
            if cur > key + tiny:
                heapq.heappush(self._heap, (cur, w.uid, w))
                continue
            for ch in self._children(w):
                if self._insert(ch) and target is not None:
                    self._check_targets(ch)
        if target is None:
            self.done = True
        return self

    # -- path reconstruction ------------------------------------------
    def _path_from(self, best, q) -> GeodesicPath:
        Q = self.Q
        dist, w, _ = best
        p = self.source.position
        if isinstance(w, tuple):
            _, f, _, seq = w
            if len(seq) == 2:
                return GeodesicPath(np.array([p, p, q]), seq, dist, (self.source.index,))
            return GeodesicPath(np.array([p, q]), (f,), dist, ())
        chain = []
        while w is not None:
            chain.append(w)
            w = w.parent
        chain.reverse()
        pts = [q]
        cur = q
        for win in reversed(chain):
            f = win.facet
            a, b = Q.edges[win.edge]
            s2 = win.src
            y2 = Q.to_2d(f, cur)
            A, B = Q.to_2d(f, Q.vertices[a]), Q.to_2d(f, Q.vertices[b])
            r, e = y2 - s2, B - A
            den = _cross(r, e)
            mu = 0.0 if abs(den) < 1e-300 else _cross(A - s2, r) / den
            mu = min(max(mu, 0.0), 1.0)
            cur = Q.vertices[a] + mu * (Q.vertices[b] - Q.vertices[a])
            pts.append(cur)
        seq = chain[-1].seq
        edges = [win.edge for win in chain]
        if len(seq) == len(chain) + 2:
            # edge source reached through its second facet
            pts.append(p)
            edges.insert(0, self.source.index)
        pts.append(p)
        pts.reverse()
        return GeodesicPath(np.array(pts), seq, dist, tuple(edges))


def shortest_path(Q: Polyhedron, p, q) -> GeodesicPath:
    """Globally shortest surface path from ``p`` to ``q``."""
    sp, tq = _as_point(Q, p), _as_point(Q, q)
    if np.linalg.norm(sp.position - tq.position) <= Q.tol:
        f = sp.facets[0]
        return GeodesicPath(np.array([sp.position, sp.position]), (f,), 0.0, ())
    common = set(sp.facets) & set(tq.facets)
    if common:
        f = min(common)
        d = float(np.linalg.norm(tq.position - sp.position))
        return GeodesicPath(np.array([sp.position, tq.position]), (f,), d, ())
    prop = Propagation(Q, sp).run(target=tq)
    return prop._path_from(prop._best, tq.position)


def geodesic_distance(Q: Polyhedron, p, q) -> float:
    return shortest_path(Q, p, q).length


# ----------------------------------------------------------------------
# distance map and cut locus
@dataclass
class _Label:
    seq: tuple[int, ...]
    src: np.ndarray
    pieces: list = field(default_factory=list)  # convex polygons (facet frame)


def _cone_piece(poly, A, d, s, x0, x1):
    d0 = A + x0 * d - s
    d1 = A + x1 * d - s
    if _cross(d0, d1) < 0:
        d0, d1 = d1, d0
    # cross(d0, y - s) >= 0 and cross(y - s, d1) >= 0
    out = clip_polygon(poly, np.array([d0[1], -d0[0]]), float(np.array([d0[1], -d0[0]]) @ s))
    out = clip_polygon(out, np.array([-d1[1], d1[0]]), float(np.array([-d1[1], d1[0]]) @ s))
    return _dedupe(out, 1e-12 * max(1.0, float(np.abs(poly).max())))


def _dedupe(poly, tiny):
    keep = []
    for p in poly:
        if not keep or np.linalg.norm(p - keep[-1]) > tiny:
            keep.append(p)
    while len(keep) > 1 and np.linalg.norm(keep[0] - keep[-1]) <= tiny:
        keep.pop()
    return np.array(keep).reshape(-1, 2)


def _in_convex(poly, y, tol):
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        e = b - a
        L = np.hypot(e[0], e[1])
        if L <= 1e-12:
            continue
        if _cross(e, y - a) / L < -tol:
            return False
    return True


def _clip_line(poly, p0, dirn):
    """Parameter range of the line ``p0 + lam dirn`` inside a convex CCW polygon."""
    lo, hi = -np.inf, np.inf
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        e = b - a
        g0 = _cross(e, p0 - a)
        g1 = _cross(e, dirn)
        if abs(g1) < 1e-300:
            if g0 < 0:
                return 1.0, 0.0
            continue
        r = -g0 / g1
        if g1 > 0:
            lo = max(lo, r)
        else:
            hi = min(hi, r)
    return lo, hi


class DistanceMap:
    """Shortest-path labels and distances on every facet from one source."""

    def __init__(self, Q: Polyhedron, source):
        self.Q = Q
        self.prop = Propagation(Q, source, allow_vertex=False).run()
        self.source = self.prop.source
        self.scale = max(1.0, Q.diameter)
        self.labels: list[dict[tuple, _Label]] = [dict() for _ in range(Q.n_facets)]
        S = self.prop.S
        for f, s2, seq in self.prop.roots:
            self.labels[f][seq] = _Label(seq, s2, [Q.polygon_2d(f)])
        for w in self.prop.windows:
            if not w.ivals:
                continue
            A, d, _ = S.edge_2d[(w.facet, w.edge)]
            lab = self.labels[w.facet].get(w.seq)
            if lab is None:
                lab = self.labels[w.facet][w.seq] = _Label(w.seq, w.src)
            for x0, x1 in w.ivals:
                piece = _cone_piece(Q.polygon_2d(w.facet), A, d, w.src, x0, x1)
                if len(piece) >= 3:
                    lab.pieces.append(piece)

    def _candidates(self, f, y, tol):
        out = []
        for lab in self.labels[f].values():
            if any(_in_convex(pc, y, tol) for pc in lab.pieces):
                out.append((float(np.linalg.norm(y - lab.src)), lab.seq))
        return out

    def label_at(self, f, y2, tol=None):
        """``(distance, label)`` at the facet-frame point ``y2``; ties go to the smallest sequence."""
        tol = 1e-9 * self.scale if tol is None else tol
        cands = self._candidates(f, y2, tol)
        if not cands:
            return np.inf, None
        dmin = min(c[0] for c in cands)
        best = min(seq for d, seq in cands if d <= dmin + 1e-12 * self.scale)
        return dmin, best

    def distance(self, x) -> float:
        sp = locate(self.Q, x)
        return min(self.label_at(f, self.Q.to_2d(f, sp.position))[0] for f in sp.facets)

    def label(self, x):
        sp = locate(self.Q, x)
        best = None
        for f in sp.facets:
            d, seq = self.label_at(f, self.Q.to_2d(f, sp.position))
            if seq is not None and (best is None or d < best[0] - 1e-12 * self.scale):
                best = (d, seq)
        return None if best is None else best[1]

    # -- cut arcs --------------------------------------------------------
    def facet_arcs(self, f):
        """Equal-distance segments between differently labelled regions inside facet ``f`` (2D)."""
        Q = self.Q
        poly = Q.polygon_2d(f)
        labs = list(self.labels[f].values())
        tol = 1e-9 * self.scale
        out = []
        for i, j in itertools.combinations(range(len(labs)), 2):
            Li, Lj = labs[i], labs[j]
            a = 2.0 * (Li.src - Lj.src)
            na = np.linalg.norm(a)
            if na < 1e-12:
                continue
            b = float(Li.src @ Li.src - Lj.src @ Lj.src)
            p0 = a * b / (na * na)
            dirn = np.array([-a[1], a[0]]) / na
            lo, hi = _clip_line(poly, p0, dirn)
            if hi - lo <= ARC_COLLAPSE * self.scale:
                continue
            ts = [lo, hi]
            for k, Lk in enumerate(labs):
                if k in (i, j):
                    continue
                ak = 2.0 * (Li.src - Lk.src)
                den = ak @ dirn
                if abs(den) > 1e-300:
                    bk = float(Li.src @ Li.src - Lk.src @ Lk.src)
                    ts.append((bk - ak @ p0) / den)
            for Lk in labs:
                for pc in Lk.pieces:
                    n = len(pc)
                    for m in range(n):
                        u, v = pc[m], pc[(m + 1) % n]
                        e = v - u
                        den = _cross(dirn, e)
                        if abs(den) < 1e-300:
                            continue
                        lam = _cross(u - p0, e) / den
                        ts.append(lam)
            ts = np.unique(np.clip(np.array(ts), lo, hi))
            run = None
            for t0, t1 in zip(ts[:-1], ts[1:]):
                if t1 - t0 <= 1e-13 * self.scale:
                    continue
                m = p0 + 0.5 * (t0 + t1) * dirn
                ok = self._is_arc_point(f, m, Li, Lj, tol)
                if ok:
                    run = (run[0], t1) if run is not None and abs(run[1] - t0) <= 1e-12 * self.scale else (
                        self._flush(out, run, p0, dirn) or (t0, t1))
                else:
                    self._flush(out, run, p0, dirn)
                    run = None
            self._flush(out, run, p0, dirn)
        return out

    @staticmethod
    def _flush(out, run, p0, dirn):
        if run is not None:
            out.append(np.array([p0 + run[0] * dirn, p0 + run[1] * dirn]))
        return None

    def _is_arc_point(self, f, m, Li, Lj, tol):
        if not any(_in_convex(pc, m, tol) for pc in Li.pieces):
            return False
        if not any(_in_convex(pc, m, tol) for pc in Lj.pieces):
            return False
        d = float(np.linalg.norm(m - Li.src))
        for Lk in self.labels[f].values():
            if Lk is Li or Lk is Lj:
                continue
            if np.linalg.norm(m - Lk.src) < d - 1e-12 * self.scale and any(_in_convex(pc, m, tol) for pc in Lk.pieces):
                return False
        return True

    def edge_cut_pieces(self, e):
        """Parameter intervals (fractions of the edge) along which edge ``e`` is part of the cut locus."""
        Q = self.Q
        a, b = Q.edges[e]
        f, g = (int(x) for x in Q.edge_facets[e])
        ts = {0.0, 1.0}
        for h in (f, g):
            A, B = Q.to_2d(h, Q.vertices[a]), Q.to_2d(h, Q.vertices[b])
            seg = B - A
            labs = list(self.labels[h].values())
            for lab in labs:
                for pc in lab.pieces:
                    n = len(pc)
                    for m in range(n):
                        u, v = pc[m], pc[(m + 1) % n]
                        den = _cross(seg, v - u)
                        if abs(den) > 1e-300:
                            lam = _cross(u - A, v - u) / den
                            if 0 < lam < 1:
                                ts.add(float(lam))
            for Li, Lj in itertools.combinations(labs, 2):
                aa = 2.0 * (Li.src - Lj.src)
                den = aa @ seg
                if abs(den) > 1e-300:
                    lam = (float(Li.src @ Li.src - Lj.src @ Lj.src) - aa @ A) / den
                    if 0 < lam < 1:
                        ts.add(float(lam))
        ts = sorted(ts)
        L = float(np.linalg.norm(Q.vertices[b] - Q.vertices[a]))
        eta = min(1e-7 * self.scale, 1e-3 * L)
        cut = []
        for t0, t1 in zip(ts[:-1], ts[1:]):
            if (t1 - t0) * L <= 1e-13 * self.scale:
                continue
            tm = 0.5 * (t0 + t1)
            x = Q.vertices[a] + tm * (Q.vertices[b] - Q.vertices[a])
            labs = []
            for h in (f, g):
                y = Q.to_2d(h, x)
                A, B = Q.to_2d(h, Q.vertices[a]), Q.to_2d(h, Q.vertices[b])
                dirn = (B - A) / np.linalg.norm(B - A)
                inward = np.array([-dirn[1], dirn[0]])
                # h is on the left of a->b when it traverses the edge that way
                if h != f:
                    inward = -inward
                labs.append(self.label_at(h, y + eta * inward)[1])
            lf, lg = labs
            if lf is None or lg is None:
                continue
            if lg == lf + (g,) or lf == lg + (f,):
                continue
            if cut and abs(cut[-1][1] - t0) < 1e-12:
                cut[-1] = (cut[-1][0], t1)
            else:
                cut.append((t0, t1))
        return cut


@dataclass(frozen=True)
class CutLocus:
    """Cut locus as a tree of polylines; ``graph`` nodes carry 3D ``pos``."""

    arcs: tuple
    graph: nx.Graph
    source: SurfacePoint

    @property
    def segments(self):
        for arc in self.arcs:
            for i in range(len(arc) - 1):
                yield arc[i], arc[i + 1]

    def nodes(self) -> np.ndarray:
        return np.array([self.graph.nodes[n]["pos"] for n in self.graph.nodes])

    def total_length(self) -> float:
        return float(sum(np.linalg.norm(b - a) for a, b in self.segments))

    def distance_to(self, x) -> float:
        x = np.asarray(x, dtype=float)
        best = np.inf
        for a, b in self.segments:
            ab = b - a
            t = np.clip((x - a) @ ab / max(ab @ ab, 1e-300), 0.0, 1.0)
            best = min(best, float(np.linalg.norm(x - a - t * ab)))
        return best


def stitch_segments(Q: Polyhedron, segments, snap: float | None = None, collapse: float | None = None) -> nx.Graph:
    """Merge segment endpoints into a graph; vertices of ``Q`` are always nodes."""
    scale = max(1.0, Q.diameter)
    snap = 1e-8 * scale if snap is None else snap
    collapse = ARC_COLLAPSE * scale if collapse is None else collapse
    segments = [np.asarray(s, dtype=float) for s in segments]
    pts = [Q.vertices[i] for i in range(Q.n_vertices)]
    for s in segments:
        pts.extend([s[0], s[1]])
    pts = np.array(pts)
    nv = Q.n_vertices
    parent = list(range(len(pts)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri == rj:
            return
        # keep polyhedron vertices as representatives
        if rj < nv and ri >= nv:
            ri, rj = rj, ri
        parent[rj] = ri

    for i, j in cKDTree(pts).query_pairs(max(snap, collapse)):
        if np.linalg.norm(pts[i] - pts[j]) <= snap:
            union(i, j)
    for k in range(len(segments)):
        i, j = nv + 2 * k, nv + 2 * k + 1
        if np.linalg.norm(pts[i] - pts[j]) <= collapse:
            union(i, j)
    groups: dict[int, list[int]] = {}
    for i in range(len(pts)):
        groups.setdefault(find(i), []).append(i)
    G = nx.Graph()
    for r, members in groups.items():
        vs = [m for m in members if m < nv]
        pos = pts[vs[0]] if vs else pts[members].mean(axis=0)
        G.add_node(r, pos=pos, vertex=vs[0] if vs else None)
    for k in range(len(segments)):
        i, j = find(nv + 2 * k), find(nv + 2 * k + 1)
        if i != j:
            G.add_edge(i, j)
    G.remove_nodes_from([n for n in list(G.nodes) if G.degree(n) == 0 and G.nodes[n]["vertex"] is None])
    return G


def graph_to_arcs(G: nx.Graph):
    """Split a graph into maximal polylines whose interior nodes have degree 2 and are not polyhedron vertices."""

    def breaks(n):
        return G.degree(n) != 2 or G.nodes[n]["vertex"] is not None

    arcs = []
    seen = set()
    for n in sorted(G.nodes):
        if not breaks(n):
            continue
        for m in sorted(G.neighbors(n)):
            if frozenset((n, m)) in seen:
                continue
            path = [n, m]
            seen.add(frozenset((n, m)))
            while not breaks(path[-1]):
                nxt = [k for k in G.neighbors(path[-1]) if k != path[-2]][0]
                seen.add(frozenset((path[-1], nxt)))
                path.append(nxt)
            arcs.append(np.array([G.nodes[k]["pos"] for k in path]))
    return arcs


def cut_locus(Q: Polyhedron, s, dmap: DistanceMap | None = None) -> CutLocus:
    """Cut locus of the source point ``s``: a tree of arcs spanning every vertex of ``Q``."""
    dmap = DistanceMap(Q, s) if dmap is None else dmap
    segs = []
    for f in range(Q.n_facets):
        for seg in dmap.facet_arcs(f):
            segs.append(Q.to_3d(f, seg))
    for e in range(Q.n_edges):
        a, b = Q.edges[e]
        pa, pb = Q.vertices[a], Q.vertices[b]
        for t0, t1 in dmap.edge_cut_pieces(e):
            segs.append(np.array([pa + t0 * (pb - pa), pa + t1 * (pb - pa)]))
    # near-flat vertices make some junctions ill-conditioned; coarsen the snap
    # resolution until the arcs close up into a tree
    scale = max(1.0, Q.diameter)
    problem = "empty"
    for snap in SNAP_LADDER:
        G = stitch_segments(Q, segs, snap=snap * scale, collapse=max(ARC_COLLAPSE, snap) * scale)
        missing = [v for v in range(Q.n_vertices) if not any(G.nodes[n]["vertex"] == v for n in G.nodes)]
        if missing:
            problem = f"cut locus misses vertices {missing}"
        elif not nx.is_tree(G):
            problem = f"extracted cut graph is not a tree ({G.number_of_nodes()} nodes, {G.number_of_edges()} edges)"
        else:
            break
    else:
        raise CutsNotSpanningTree(problem)
    return CutLocus(tuple(graph_to_arcs(G)), G, dmap.source)


@dataclass(frozen=True)
class SourceUnfoldingTree:
    """Faces of a source unfolding rooted at the face containing the source."""

    unfolding: object
    root: int
    parent: dict
    labels: dict  # face -> facet sequence of the geodesics reaching it

    def children(self, f):
        return sorted(c for c, p in self.parent.items() if p == f)

    def path_to(self, f):
        out = [f]
        while out[-1] != self.root:
            out.append(self.parent[out[-1]])
        return out[::-1]


def source_unfolding(Q: Polyhedron, s):
    """Source unfolding of ``s`` together with its rooted face tree."""
    from .unfolding import faces_from_cuts

    dmap = DistanceMap(Q, s)
    loc = cut_locus(Q, s, dmap)
    sp = dmap.source
    U = faces_from_cuts(Q, loc.arcs, root_point=sp.position)
    parent = {}
    for f, p in nx.bfs_predecessors(U.dual, U.root):
        parent[f] = p
    labels = {}
    for face in U.faces:
        y = face.interior_point_2d()
        labels[face.index] = dmap.label_at(face.facet, y)[1]
    return U, SourceUnfoldingTree(U, U.root, parent, labels)


def grown_polyhedron(Q: Polyhedron, P: GeodesicPath, box_factor: float = 10.0) -> Polyhedron:
    """Intersection of the supporting halfspaces of the facets visited by ``P``."""
    facets = sorted(set(P.faces))
    planes = [Q.planes[f] for f in facets]
    return halfspace_intersection(planes, scaled_box(*Q.bbox(), factor=box_factor))
