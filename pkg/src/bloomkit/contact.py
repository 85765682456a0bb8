"""Triangle-triangle contact classification (clear / touch / cross).

Classification runs a separating-axis test over the 17 candidate axes of a
triangle pair (two normals, nine edge-edge crosses, six in-plane edge
normals). The largest projected gap is a signed separation; when it is small
the exact Euclidean distance decides between touch and clear.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import shapely
from shapely.geometry import Polygon

from .errors import DegenerateTriangle
from .geometry import EPS_GEOM, Plane

TAU_TOUCH = 1e-7


class ContactKind(enum.IntEnum):
    CLEAR = 0
    TOUCH = 1
    CROSS = 2


@dataclass(frozen=True)
class ContactClass:
    kind: ContactKind
    plane: Plane | None = None  # separating plane for CLEAR/TOUCH; t1 on the negative side
    witness: np.ndarray | None = None  # common point (TOUCH) or interior point (CROSS)
    distance: float = 0.0
    penetration: float = 0.0

    @property
    def name(self) -> str:
        return self.kind.name.lower()


def _unit_rows(v):
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    ok = n[..., 0] > 1e-12
    return np.where(n > 1e-12, v / np.where(n > 0, n, 1.0), 0.0), ok


def sat_axes(A, B):
    """Candidate separating axes for triangle pairs ``A, B`` of shape (N, 3, 3) -> (N, 17, 3), valid mask."""
    eA = np.roll(A, -1, axis=1) - A
    eB = np.roll(B, -1, axis=1) - B
    nA = np.cross(eA[:, 0], eA[:, 1])
    nB = np.cross(eB[:, 0], eB[:, 1])
    cross_ee = np.cross(eA[:, :, None, :], eB[:, None, :, :]).reshape(-1, 9, 3)
    inA = np.cross(nA[:, None, :], eA)
    inB = np.cross(nB[:, None, :], eB)
    axes = np.concatenate([nA[:, None], nB[:, None], cross_ee, inA, inB], axis=1)
    return _unit_rows(axes)


def project_axes(axes, P):
    """Dot products of axes (N, K, 3) with points (N, V, 3) -> (N, K, V)."""
    return (axes[:, :, None, 0] * P[:, None, :, 0] + axes[:, :, None, 1] * P[:, None, :, 1]
            + axes[:, :, None, 2] * P[:, None, :, 2])


def sat_gaps(A, B):
    """Signed separation of triangle pairs along the best of the 17 axes.

    Returns ``gap`` (N,), ``axis`` (N, 3) and ``offset`` (N,) such that the
    plane ``axis . x = offset`` has A on its negative side and B on its
    positive side when ``gap >= 0``. A negative gap is minus the penetration
    depth over the axis set.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    axes, ok = sat_axes(A, B)
    pa = project_axes(axes, A)
    pb = project_axes(axes, B)
    amin, amax = pa.min(axis=2), pa.max(axis=2)
    bmin, bmax = pb.min(axis=2), pb.max(axis=2)
    g1 = bmin - amax  # A below B
    g2 = amin - bmax  # B below A
    flip = g2 > g1
    g = np.where(flip, g2, g1)
    g = np.where(ok, g, -np.inf)
    k = np.argmax(g, axis=1)
    idx = np.arange(len(A))
    gap = g[idx, k]
    sign = np.where(flip[idx, k], -1.0, 1.0)
    axis = axes[idx, k] * sign[:, None]
    lo = np.where(flip[idx, k], -amin[idx, k], amax[idx, k])
    offset = lo + 0.5 * gap
    return gap, axis, offset


def _seg_seg(p1, q1, p2, q2):
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = np.einsum("...d,...d->...", d1, d1)
    e = np.einsum("...d,...d->...", d2, d2)
    f = np.einsum("...d,...d->...", d2, r)
    c = np.einsum("...d,...d->...", d1, r)
    b = np.einsum("...d,...d->...", d1, d2)
    denom = a * e - b * b
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(denom > 1e-30 * a * e, np.clip((b * f - c * e) / denom, 0.0, 1.0), 0.0)
        t = (b * s + f) / e
        s = np.where(t < 0, np.clip(-c / a, 0.0, 1.0), np.where(t > 1, np.clip((b - c) / a, 0.0, 1.0), s))
    t = np.clip(t, 0.0, 1.0)
    x1 = p1 + d1 * s[..., None]
    x2 = p2 + d2 * t[..., None]
    return np.linalg.norm(x1 - x2, axis=-1), x1, x2


def _point_tri(P, T):
    """Distance from points P (N, k, 3) to the interiors of triangles T (N, 3, 3); inf when the projection falls outside."""
    a, b, c = T[:, 0:1], T[:, 1:2], T[:, 2:3]
    n = np.cross(b - a, c - a)
    nn = np.einsum("...d,...d->...", n, n)
    h = np.einsum("...d,...d->...", P - a, n) / nn
    proj = P - h[..., None] * n
    w0 = np.einsum("...d,...d->...", np.cross(b - proj, c - proj), n)
    w1 = np.einsum("...d,...d->...", np.cross(c - proj, a - proj), n)
    w2 = np.einsum("...d,...d->...", np.cross(a - proj, b - proj), n)
    inside = (w0 >= 0) & (w1 >= 0) & (w2 >= 0)
    d = np.abs(h) * np.sqrt(nn)
    return np.where(inside, d, np.inf), proj


def triangle_distance(A, B):
    """Euclidean distance between non-intersecting triangle pairs, with closest points.

    For intersecting pairs the value is an upper bound on zero and should
    not be trusted; callers use :func:`sat_gaps` first.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    N = len(A)
    i = np.repeat(np.arange(3), 3)
    j = np.tile(np.arange(3), 3)
    d_ss, xa, xb = _seg_seg(A[:, i], A[:, (i + 1) % 3], B[:, j], B[:, (j + 1) % 3])
    d_ab, proj_ab = _point_tri(A, B)
    d_ba, proj_ba = _point_tri(B, A)
    cand = np.concatenate([d_ss, d_ab, d_ba], axis=1)
    pa = np.concatenate([xa, A, proj_ba], axis=1)
    pb = np.concatenate([xb, proj_ab, B], axis=1)
    k = np.argmin(cand, axis=1)
    idx = np.arange(N)
    return cand[idx, k], pa[idx, k], pb[idx, k]


def segment_triangle_points(p, q, T):
    """Intersection points of segment pq with the closed triangle T (0, 1 or a clipped run of 2)."""
    a, b, c = T
    n = np.cross(b - a, c - a)
    dp, dq = (p - a) @ n, (q - a) @ n
    if abs(dp - dq) < 1e-300 or dp * dq > 0:
        return []
    s = dp / (dp - dq)
    x = p + s * (q - p)
    w = [np.cross(b - x, c - x) @ n, np.cross(c - x, a - x) @ n, np.cross(a - x, b - x) @ n]
    return [x] if min(w) >= 0 else []


def _cross_witness(t1, t2):
    pts = []
    for T, S in ((t1, t2), (t2, t1)):
        for k in range(3):
            pts += segment_triangle_points(S[k], S[(k + 1) % 3], T)
    if pts:
        return np.mean(pts, axis=0)
    return 0.5 * (t1.mean(axis=0) + t2.mean(axis=0))


def triangle_contact(t1, t2, tau_touch: float = TAU_TOUCH) -> ContactClass:
    """Classify the contact between two triangles given as (3, 3) arrays."""
    t1 = np.asarray(t1, dtype=float).reshape(3, 3)
    t2 = np.asarray(t2, dtype=float).reshape(3, 3)
    for t in (t1, t2):
        if 0.5 * np.linalg.norm(np.cross(t[1] - t[0], t[2] - t[0])) <= EPS_GEOM ** 2:
            raise DegenerateTriangle("triangle area below tolerance")
    gap, axis, offset = (v[0] for v in sat_gaps(t1[None], t2[None]))
    if gap > tau_touch:
        return ContactClass(ContactKind.CLEAR, Plane(axis, offset), None, float(gap), 0.0)
    if gap < -tau_touch:
        return ContactClass(ContactKind.CROSS, None, _cross_witness(t1, t2), 0.0, float(-gap))
    d, xa, xb = (v[0] for v in triangle_distance(t1[None], t2[None]))
    if gap >= 0 and d > tau_touch:
        n = xb - xa
        plane = Plane(n, float(n @ (0.5 * (xa + xb))))
        return ContactClass(ContactKind.CLEAR, plane, None, float(d), 0.0)
    witness = 0.5 * (xa + xb) if gap >= 0 else _cross_witness(t1, t2)
    return ContactClass(ContactKind.TOUCH, Plane(axis, offset), witness, float(max(gap, 0.0)), float(max(-gap, 0.0)))


def triangulate_polygon(poly2d) -> np.ndarray:
    """Triangle index triples covering a simple (possibly nonconvex) polygon.

    Uses a constrained Delaunay triangulation; returned indices refer to the
    input vertex order.
    """
    poly2d = np.asarray(poly2d, dtype=float)
    n = len(poly2d)
    if n == 3:
        return np.array([[0, 1, 2]])
    pg = Polygon(poly2d)
    if pg.is_valid and pg.area > 0 and _is_convex(poly2d):
        return np.array([[0, k, k + 1] for k in range(1, n - 1)])
    tris = shapely.constrained_delaunay_triangles(pg)
    out = []
    for g in shapely.get_parts(tris):
        xy = np.asarray(g.exterior.coords)[:3]
        d = np.linalg.norm(poly2d[None, :, :] - xy[:, None, :], axis=2)
        idx = np.argmin(d, axis=1)
        if len(set(idx.tolist())) == 3:
            out.append(idx)
    return np.array(out, dtype=int).reshape(-1, 3)


def _is_convex(poly2d) -> bool:
    p = poly2d
    e = np.roll(p, -1, axis=0) - p
    c = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
    return bool(np.all(c > -1e-15) or np.all(c < 1e-15))
