"""Polyhedra, planes, rigid transforms and halfspace intersection."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection

from .errors import BoundaryEdge, DegenerateInput, EmptyIntersection

EPS_GEOM = 1e-9


def unit(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("zero vector")
    return v / n


@dataclass(frozen=True)
class Plane:
    """Oriented plane ``normal . x = offset``; the halfspace ``normal . x <= offset`` is "inside"."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        length = np.linalg.norm(n)
        if length == 0.0:
            raise ValueError("plane normal must be nonzero")
        object.__setattr__(self, "normal", n / length)
        object.__setattr__(self, "offset", float(self.offset) / length)

    @classmethod
    def through(cls, point, normal) -> "Plane":
        n = unit(normal)
        return cls(n, float(n @ np.asarray(point, dtype=float)))

    def signed_distance(self, x):
        return np.asarray(x, dtype=float) @ self.normal - self.offset

    def flipped(self) -> "Plane":
        return Plane(-self.normal, -self.offset)


@dataclass(frozen=True)
class RigidTransform:
    """Proper rigid motion ``x -> R x + t``."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float).reshape(3, 3))
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float).reshape(3))

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls()

    @classmethod
    def about_axis(cls, point, direction, angle: float) -> "RigidTransform":
        """Rotation by ``angle`` (right-handed) about the line through ``point`` along ``direction``."""
        k = unit(direction)
        K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
        R = np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)
        p = np.asarray(point, dtype=float)
        return cls(R, p - R @ p)

    def apply(self, points):
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + self.translation

    def apply_vector(self, vectors):
        return np.asarray(vectors, dtype=float) @ self.rotation.T

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """``self o other``: apply ``other`` first."""
        return RigidTransform(self.rotation @ other.rotation, self.rotation @ other.translation + self.translation)

    def inverse(self) -> "RigidTransform":
        Rt = self.rotation.T
        return RigidTransform(Rt, -Rt @ self.translation)

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def is_proper(self, tol: float = 1e-9) -> bool:
        R = self.rotation
        return bool(np.allclose(R.T @ R, np.eye(3), atol=tol) and abs(np.linalg.det(R) - 1.0) < tol)


class Polyhedron:
    """Closed convex polyhedral surface with polygonal facets.

    Facets are vertex-index loops, counterclockwise when seen from outside.
    Edges are stored once as ``(a, b)`` with ``a < b``; ``edge_facets[e]``
    holds the facet traversing the edge as ``a -> b`` followed by the facet
    traversing it as ``b -> a``.
    """

    def __init__(self, vertices, facets: Sequence[Sequence[int]], artificial=None, tol: float = EPS_GEOM,
                 check: bool = True):
        self.vertices = np.array(vertices, dtype=float)
        self.vertices.setflags(write=False)
        self.facets = tuple(tuple(int(i) for i in f) for f in facets)
        nf = len(self.facets)
        self.artificial = tuple(bool(a) for a in artificial) if artificial is not None else (False,) * nf
        lo, hi = self.vertices.min(axis=0), self.vertices.max(axis=0)
        self.diameter = float(np.linalg.norm(hi - lo))
        self.tol = tol * max(1.0, self.diameter)

        halfedges = {}
        for fi, loop in enumerate(self.facets):
            if len(loop) < 3:
                raise DegenerateInput(f"facet {fi} has fewer than 3 vertices")
            for j, a in enumerate(loop):
                b = loop[(j + 1) % len(loop)]
                if (a, b) in halfedges:
                    raise DegenerateInput(f"directed edge {(a, b)} used twice; surface is not an oriented manifold")
                halfedges[(a, b)] = fi
        self._halfedges = halfedges
        edges = sorted({(min(a, b), max(a, b)) for a, b in halfedges})
        self.edges = np.array(edges, dtype=int).reshape(-1, 2)
        self._edge_index = {e: i for i, e in enumerate(edges)}
        ef = np.full((len(edges), 2), -1, dtype=int)
        for i, (a, b) in enumerate(edges):
            ef[i, 0] = halfedges.get((a, b), -1)
            ef[i, 1] = halfedges.get((b, a), -1)
        self.edge_facets = ef

        self.planes = []
        self._frames = []
        self._poly2d = []
        for loop in self.facets:
            pts = self.vertices[list(loop)]
            # Newell normal is robust for slightly non-planar input
            nrm = np.zeros(3)
            for j in range(len(pts)):
                p, q = pts[j], pts[(j + 1) % len(pts)]
                nrm += np.cross(p, q)
            n = unit(nrm)
            centroid = pts.mean(axis=0)
            self.planes.append(Plane(n, float(n @ centroid)))
            u = unit(pts[1] - pts[0])
            u = unit(u - (u @ n) * n)
            v = np.cross(n, u)
            origin = pts[0]
            self._frames.append((origin, u, v, n))
            self._poly2d.append(np.column_stack([(pts - origin) @ u, (pts - origin) @ v]))
        if check:
            self.validate()

    # -- combinatorics -------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_facets(self) -> int:
        return len(self.facets)

    def edge_id(self, a: int, b: int) -> int:
        return self._edge_index[(min(a, b), max(a, b))]

    def facet_edges(self, f: int) -> list[int]:
        loop = self.facets[f]
        return [self.edge_id(loop[j], loop[(j + 1) % len(loop)]) for j in range(len(loop))]

    def other_facet(self, e: int, f: int) -> int:
        a, b = self.edge_facets[e]
        if a == f:
            return int(b)
        if b == f:
            return int(a)
        raise ValueError(f"facet {f} is not incident to edge {e}")

    def facet_polygon(self, f: int) -> np.ndarray:
        return self.vertices[list(self.facets[f])]

    def edge_segment(self, e: int) -> np.ndarray:
        return self.vertices[self.edges[e]]

    def vertex_facets(self, v: int) -> list[int]:
        return [f for f, loop in enumerate(self.facets) if v in loop]

    # -- frames --------------------------------------------------------
    def frame(self, f: int):
        """``(origin, u, v, normal)`` of facet ``f``; ``(u, v, normal)`` is right-handed."""
        return self._frames[f]

    def polygon_2d(self, f: int) -> np.ndarray:
        return self._poly2d[f]

    def to_2d(self, f: int, points) -> np.ndarray:
        o, u, v, _ = self._frames[f]
        d = np.asarray(points, dtype=float) - o
        return np.stack([d @ u, d @ v], axis=-1)

    def to_3d(self, f: int, uv) -> np.ndarray:
        o, u, v, _ = self._frames[f]
        uv = np.asarray(uv, dtype=float)
        return o + uv[..., :1] * u + uv[..., 1:2] * v

    # -- geometry ------------------------------------------------------
    def facet_area(self, f: int) -> float:
        return polygon_area(self._poly2d[f])

    def facet_centroid(self, f: int) -> np.ndarray:
        return self.to_3d(f, polygon_centroid(self._poly2d[f]))

    def dihedral(self, e: int) -> float:
        return dihedral_angle(self, e)

    def contains(self, f: int, x, tol: float | None = None) -> bool:
        """Whether point ``x`` lies on facet ``f`` (closed), within ``tol``."""
        tol = self.tol if tol is None else tol
        x = np.asarray(x, dtype=float)
        if abs(self.planes[f].signed_distance(x)) > tol:
            return False
        return point_in_convex_polygon(self.to_2d(f, x), self._poly2d[f], tol)

    def locate(self, x, tol: float | None = None) -> list[int]:
        """All facets containing ``x``."""
        return [f for f in range(self.n_facets) if self.contains(f, x, tol)]

    def vertex_at(self, x, tol: float | None = None) -> int | None:
        tol = self.tol if tol is None else tol
        d = np.linalg.norm(self.vertices - np.asarray(x, dtype=float), axis=1)
        i = int(np.argmin(d))
        return i if d[i] <= tol else None

    def edge_at(self, x, tol: float | None = None) -> int | None:
        """Edge whose relative interior contains ``x`` (vertices excluded)."""
        tol = self.tol if tol is None else tol
        if self.vertex_at(x, tol) is not None:
            return None
        x = np.asarray(x, dtype=float)
        for e, (a, b) in enumerate(self.edges):
            if point_segment_distance(x, self.vertices[a], self.vertices[b]) <= tol:
                return e
        return None

    # -- validation ----------------------------------------------------
    def validate(self) -> None:
        if np.any(self.edge_facets < 0):
            raise DegenerateInput("surface is not closed")
        V, E, F = self.n_vertices, self.n_edges, self.n_facets
        if V - E + F != 2:
            raise DegenerateInput(f"Euler characteristic {V - E + F} != 2")
        used = {i for loop in self.facets for i in loop}
        if len(used) != V:
            raise DegenerateInput("unused vertices")
        for f, plane in enumerate(self.planes):
            d = plane.signed_distance(self.facet_polygon(f))
            if np.max(np.abs(d)) > 10 * self.tol:
                raise DegenerateInput(f"facet {f} is not planar")
            if np.max(plane.signed_distance(self.vertices)) > 10 * self.tol:
                raise DegenerateInput(f"polyhedron is not convex at facet {f}")

    def is_convex(self, tol: float | None = None) -> bool:
        tol = self.tol if tol is None else tol
        return all(np.max(p.signed_distance(self.vertices)) <= tol for p in self.planes)

    def bbox(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def __repr__(self):
        return f"Polyhedron(V={self.n_vertices}, E={self.n_edges}, F={self.n_facets})"


# ----------------------------------------------------------------------
# 2D helpers
def cross2(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def polygon_area(poly) -> float:
    p = np.asarray(poly, dtype=float)
    q = np.roll(p, -1, axis=0)
    return 0.5 * float(np.sum(p[:, 0] * q[:, 1] - p[:, 1] * q[:, 0]))


def polygon_centroid(poly) -> np.ndarray:
    p = np.asarray(poly, dtype=float)
    q = np.roll(p, -1, axis=0)
    c = p[:, 0] * q[:, 1] - p[:, 1] * q[:, 0]
    a = c.sum() / 2.0
    if abs(a) < 1e-300:
        return p.mean(axis=0)
    return np.array([np.sum((p[:, 0] + q[:, 0]) * c), np.sum((p[:, 1] + q[:, 1]) * c)]) / (6.0 * a)


def point_in_convex_polygon(x, poly, tol: float = 0.0) -> bool:
    p = np.asarray(poly, dtype=float)
    q = np.roll(p, -1, axis=0)
    edge = q - p
    lengths = np.linalg.norm(edge, axis=1)
    side = cross2(edge, np.asarray(x, dtype=float) - p) / lengths
    return bool(np.all(side >= -tol))


def point_segment_distance(x, a, b) -> float:
    x, a, b = (np.asarray(v, dtype=float) for v in (x, a, b))
    ab = b - a
    denom = ab @ ab
    t = 0.0 if denom == 0 else float(np.clip((x - a) @ ab / denom, 0.0, 1.0))
    return float(np.linalg.norm(x - (a + t * ab)))


def clip_polygon(poly, a, b):
    """Clip a convex polygon by the halfplane ``a . x <= b`` (Sutherland-Hodgman)."""
    poly = np.asarray(poly, dtype=float)
    if len(poly) == 0:
        return poly
    d = poly @ a - b
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        dp, dq = d[i], d[(i + 1) % n]
        if dp <= 0:
            out.append(p)
        if (dp < 0 < dq) or (dq < 0 < dp):
            t = dp / (dp - dq)
            out.append(p + t * (q - p))
    return np.array(out).reshape(-1, 2)


# ----------------------------------------------------------------------
# construction
def _affine_rank(points, tol):
    c = points - points.mean(axis=0)
    s = np.linalg.svd(c, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0] if len(s) else 1.0)))


def build_convex_polyhedron(points, tol: float = EPS_GEOM) -> Polyhedron:
    """Convex hull of ``points`` with coplanar triangles merged into polygonal facets.

    Points interior to the hull, interior to a facet, or in the middle of a
    hull edge are discarded.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 4:
        raise DegenerateInput("need at least 4 points in 3D")
    if _affine_rank(pts, 1e-9) < 3:
        raise DegenerateInput("points are coplanar or collinear")
    hull = ConvexHull(pts)
    scale = max(1.0, float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0))))
    tris = []
    for simplex, eq in zip(hull.simplices, hull.equations):
        a, b, c = (int(i) for i in simplex)
        if np.cross(pts[b] - pts[a], pts[c] - pts[a]) @ eq[:3] < 0:
            b, c = c, b
        tris.append((a, b, c))
    eqs = hull.equations
    parent = list(range(len(tris)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, nbrs in enumerate(hull.neighbors):
        for j in nbrs:
            if np.linalg.norm(eqs[i, :3] - eqs[j, :3]) < tol and abs(eqs[i, 3] - eqs[j, 3]) < tol * scale:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(len(tris)):
        groups.setdefault(find(i), []).append(i)

    loops = []
    for members in groups.values():
        directed = set()
        for i in members:
            a, b, c = tris[i]
            directed.update([(a, b), (b, c), (c, a)])
        boundary = {(a, b) for (a, b) in directed if (b, a) not in directed}
        nxt = {a: b for a, b in boundary}
        if len(nxt) != len(boundary):
            raise DegenerateInput("merged facet boundary is not a simple loop")
        start = min(nxt)
        loop = [start]
        while True:
            v = nxt[loop[-1]]
            if v == start:
                break
            loop.append(v)
            if len(loop) > len(boundary):
                raise DegenerateInput("merged facet boundary is not a simple loop")
        loops.append(loop)

    # drop vertices lying in the middle of a hull edge
    def collinear(loop, j):
        p, v, q = pts[loop[j - 1]], pts[loop[j]], pts[loop[(j + 1) % len(loop)]]
        return np.linalg.norm(np.cross(v - p, q - v)) <= tol * np.linalg.norm(v - p) * np.linalg.norm(q - v) * 10 + 1e-300

    drop = set()
    for loop in loops:
        for j in range(len(loop)):
            if collinear(loop, j):
                drop.add(loop[j])
    loops = [[i for i in loop if i not in drop] for loop in loops]
    used = sorted({i for loop in loops for i in loop})
    remap = {old: new for new, old in enumerate(used)}
    facets = [[remap[i] for i in loop] for loop in loops]
    # canonical facet order: by smallest vertex index, rotated to start there
    facets = [loop[loop.index(min(loop)):] + loop[:loop.index(min(loop))] for loop in facets]
    facets.sort()
    return Polyhedron(pts[used], facets, tol=tol)


def dihedral_angle(P: Polyhedron, e: int) -> float:
    """Interior dihedral angle at edge ``e`` in ``(0, pi]``."""
    f, g = P.edge_facets[e]
    if f < 0 or g < 0:
        raise BoundaryEdge(f"edge {e} has a single incident facet")
    c = float(np.clip(P.planes[f].normal @ P.planes[g].normal, -1.0, 1.0))
    return float(np.pi - np.arccos(c))


def box_planes(lo, hi) -> list[Plane]:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    out = []
    for k in range(3):
        e = np.zeros(3)
        e[k] = 1.0
        out.append(Plane(e, hi[k]))
        out.append(Plane(-e, -lo[k]))
    return out


def scaled_box(lo, hi, factor: float = 10.0):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    c = 0.5 * (lo + hi)
    half = 0.5 * factor * np.maximum(hi - lo, 1e-12)
    return c - half, c + half


def halfspace_intersection(planes: Sequence[Plane], clip_box, tol: float = EPS_GEOM) -> Polyhedron:
    """Intersection of the halfspaces ``n . x <= d`` clipped to the axis-aligned ``clip_box``.

    Facets lying on a clipping plane (and on no input plane) are flagged
    ``artificial`` in the returned polyhedron.
    """
    planes = list(planes)
    if not planes:
        raise ValueError("need at least one plane")
    lo, hi = clip_box
    box = box_planes(lo, hi)
    allp = planes + box
    A = np.array([p.normal for p in allp])
    b = np.array([p.offset for p in allp])
    # Chebyshev center: maximise r subject to A x + r |A_i| <= b
    res = linprog(c=[0, 0, 0, -1.0], A_ub=np.column_stack([A, np.ones(len(A))]), b_ub=b,
                  bounds=[(None, None)] * 3 + [(0, None)], method="highs")
    if res.status != 0 or res.x[3] <= tol:
        raise EmptyIntersection("halfspaces have empty interior")
    interior = res.x[:3]
    hs = HalfspaceIntersection(np.column_stack([A, -b]), interior)
    poly = build_convex_polyhedron(hs.intersections, tol=tol)
    artificial = []
    for pl in poly.planes:
        def matches(q):
            return np.linalg.norm(pl.normal - q.normal) < 1e-7 and abs(pl.offset - q.offset) < 1e-7 * max(1.0, poly.diameter)
        artificial.append(not any(matches(q) for q in planes) and any(matches(q) for q in box))
    return Polyhedron(poly.vertices, poly.facets, artificial=artificial, tol=tol)
