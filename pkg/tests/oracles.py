"""Brute-force reference implementations used to cross-check the library.

Nothing here imports bloomkit's geodesic or contact code; only the mesh
container (vertices, facets, adjacency) is shared.
"""
from __future__ import annotations

import numpy as np


def _rodrigues(axis_point, axis_dir, angle):
    k = axis_dir / np.linalg.norm(axis_dir)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    R = np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * K @ K
    return R, axis_point - R @ axis_point


def _facet_normal(V, loop):
    P = V[list(loop)]
    n = np.cross(P[1] - P[0], P[2] - P[0])
    return n / np.linalg.norm(n)


def _flatten(Rt, V, a, b, n_cur, n_next):
    """Transform of the next facet: rotate it about the shared edge into the current facet's plane, then follow the current facet."""
    R, t = Rt
    pa, pb = V[a], V[b]
    ang = np.arccos(np.clip(n_next @ n_cur, -1, 1))
    for sgn in (1.0, -1.0):
        Rs, ts = _rodrigues(pa, pb - pa, sgn * ang)
        if np.linalg.norm(Rs @ n_next - n_cur) < 1e-9:
            return R @ Rs, R @ ts + t
    raise RuntimeError("could not flatten facet")


def _facet_of(V, facets, x, tol=1e-9):
    out = []
    for f, loop in enumerate(facets):
        P = V[list(loop)]
        n = _facet_normal(V, loop)
        if abs(n @ (x - P[0])) > tol:
            continue
        ok = all(np.cross(P[(i + 1) % len(P)] - P[i], x - P[i]) @ n >= -tol for i in range(len(P)))
        if ok:
            out.append(f)
    return out


def geodesic_candidates(V, facets, p, q, slack=0.0, max_len=None):
    """Every unfolded straight segment from ``p`` to ``q`` over a simple facet sequence.

    Returns ``[(length, facet_sequence)]`` for all sequences whose unfolded
    segment stays inside the edge windows, pruned to lengths at most the
    best found plus ``slack``. Exhaustive apart from that pruning, so it is
    exponential in the worst case; fine for hulls of a few dozen facets.
    """
    V = np.asarray(V, dtype=float)
    p, q = np.asarray(p, float), np.asarray(q, float)
    adj = {}
    for f, loop in enumerate(facets):
        for i, a in enumerate(loop):
            b = loop[(i + 1) % len(loop)]
            adj[(a, b)] = f
    normals = [_facet_normal(V, l) for l in facets]
    fp, fq = _facet_of(V, facets, p), set(_facet_of(V, facets, q))
    if not fp or not fq:
        raise ValueError("endpoint not on the surface")
    f0 = fp[0]
    n0 = normals[f0]
    u = np.cross(n0, [1.0, 0, 0])
    if np.linalg.norm(u) < 0.5:
        u = np.cross(n0, [0, 1.0, 0])
    u /= np.linalg.norm(u)
    w = np.cross(n0, u)

    def to2(x):
        return np.array([(x - p) @ u, (x - p) @ w])

    best = [np.inf if max_len is None else max_len]
    found = []
    if set(fp) & fq:
        d = float(np.linalg.norm(q - p))
        found.append((d, (f0,)))
        best[0] = min(best[0], d)

    def in_cone(d, lo, hi):
        return np.cross(lo, d) >= -1e-12 * np.linalg.norm(d) and np.cross(d, hi) >= -1e-12 * np.linalg.norm(d)

    def visit(seq, Rt, lo, hi, came):
        f = seq[-1]
        loop = facets[f]
        for i, a in enumerate(loop):
            b = loop[(i + 1) % len(loop)]
            if {a, b} == came:
                continue
            g = adj.get((b, a))
            if g is None or g in seq:
                continue
            R, t = Rt
            A2, B2 = to2(R @ V[a] + t), to2(R @ V[b] + t)
            # cone of directions from p through this edge, clipped by the incoming cone
            l, h = (A2, B2) if np.cross(A2, B2) > 0 else (B2, A2)
            if lo is not None:
                if np.cross(lo, l) < 0:
                    l = lo
                if np.cross(h, hi) < 0:
                    h = hi
                if np.cross(l, h) <= 0:
                    continue
            # nearest point of the edge window bounds every continuation
            seg = B2 - A2
            s = np.clip(-(A2 @ seg) / (seg @ seg), 0, 1)
            if np.linalg.norm(A2 + s * seg) > best[0] + slack + 1e-12:
                continue
            Rn = _flatten(Rt, V, a, b, normals[f], normals[g])
            seq2 = seq + (g,)
            if g in fq:
                q2 = to2(Rn[0] @ q + Rn[1])
                if in_cone(q2, l, h):
                    d = float(np.linalg.norm(q2))
                    found.append((d, seq2))
                    best[0] = min(best[0], d)
            visit(seq2, Rn, l, h, {a, b})

    visit((f0,), (np.eye(3), np.zeros(3)), None, None, set())
    return sorted(c for c in found if c[0] <= best[0] + slack)


def geodesic_length(V, facets, p, q) -> float:
    c = geodesic_candidates(V, facets, p, q)
    return c[0][0] if c else np.inf


def geodesic_multiplicity(V, facets, p, q, tol=1e-7) -> int:
    """Number of distinct facet sequences realising the shortest length within ``tol``."""
    c = geodesic_candidates(V, facets, p, q, slack=tol)
    return len(c)


def triangle_distance_sampled(A, B, n=40) -> float:
    """Distance between two triangles from dense barycentric sampling (an upper bound)."""
    s = np.linspace(0, 1, n)
    u, v = np.meshgrid(s, s)
    m = u + v <= 1
    bary = np.column_stack([1 - u[m] - v[m], u[m], v[m]])
    PA, PB = bary @ A, bary @ B
    d = np.linalg.norm(PA[:, None] - PB[None], axis=2)
    return float(d.min())
