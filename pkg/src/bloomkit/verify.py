"""Contact classification of poses and crossing verification of opening schedules.

A schedule moves one hinge at a time, so during a move only pairs with one
face in the moving subtree and one outside it can change their contact
state. Each move is swept with bounding spheres first; the surviving
triangle pairs are classified at every sample and every sample gap is
certified either by a displacement bound or by a plane that provably
keeps separating the pair over the rotation arc.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
from scipy.spatial import cKDTree

from .blooming import HingeStructure, Pose, Schedule, pose_at
from .contact import TAU_TOUCH, ContactClass, ContactKind, _cross_witness, project_axes, sat_axes, sat_gaps, \
    triangle_distance, triangulate_polygon
from .errors import CrossingFound, UnexpectedTouch
from .geometry import Plane, RigidTransform

HINGE_ADJACENT = "hinge-adjacent"
ORIGINAL = "original"
FINAL = "final"
PREDICTED = "predicted-by-lemma"
UNEXPECTED = "unexpected"
TOUCH_CLASSES = (HINGE_ADJACENT, ORIGINAL, FINAL, PREDICTED, UNEXPECTED)

EXIT_PASS, EXIT_CROSSING, EXIT_UNEXPECTED, EXIT_UNCERTIFIED = 0, 2, 3, 4

N_CHUNKS = 16
BATCH = 100_000


def thread_count() -> int:
    n = os.cpu_count() or 1
    env = os.environ.get("BLOOMKIT_THREADS")
    if env:
        try:
            n = max(1, min(n, int(env)))
        except ValueError:
            pass
    return n


# ----------------------------------------------------------------------
# triangulated plates
@dataclass(frozen=True)
class Plates:
    """Triangles of every face in rest coordinates."""

    tris: np.ndarray  # (T, 3, 3)
    face: np.ndarray  # (T,)

    @classmethod
    def from_unfolding(cls, U) -> "Plates":
        Q = U.base
        tris, owner = [], []
        eps = 1e-9 * max(1.0, Q.diameter)
        for face in U.faces:
            P2 = face.outline2d
            for t in triangulate_polygon(P2):
                tri = Q.to_3d(face.facet, P2[t])
                # collinear runs along an outline give zero-height triangles
                longest = np.linalg.norm(tri - np.roll(tri, 1, axis=0), axis=1).max()
                if np.linalg.norm(np.cross(tri[1] - tri[0], tri[2] - tri[0])) > eps * longest:
                    tris.append(tri)
                    owner.append(face.index)
        return cls(np.array(tris), np.array(owner, dtype=int))

    def posed(self, R, t, idx=None) -> np.ndarray:
        idx = np.arange(len(self.tris)) if idx is None else idx
        f = self.face[idx]
        return np.einsum("nij,nvj->nvi", R[f], self.tris[idx]) + t[f][:, None, :]


def _rotations(u, angles) -> np.ndarray:
    K = np.array([[0.0, -u[2], u[1]], [u[2], 0.0, -u[0]], [-u[1], u[0], 0.0]])
    s = np.sin(angles)[:, None, None]
    c = np.cos(angles)[:, None, None]
    return np.eye(3) + s * K + (1.0 - c) * (K @ K)


def _point_line_distance(x, a, u):
    d = x - a
    return np.linalg.norm(d - np.outer(d @ u, u) if d.ndim == 2 else d - (d @ u) * u, axis=-1)


def _point_segment_distance(x, p, q):
    d = q - p
    L2 = d @ d
    s = np.clip(((x - p) @ d) / L2 if L2 > 0 else 0.0, 0.0, 1.0)
    s = np.atleast_1d(s)
    closest = p + np.outer(s, d)
    return np.linalg.norm(np.atleast_2d(x) - closest, axis=-1)


def _classify_pairs(A, B, tau):
    """SAT gap and, for pairs inside the touch band, exact distance and witnesses."""
    gap, axis, offset = sat_gaps(A, B)
    kind = np.zeros(len(gap), dtype=int)
    sep = gap.copy()
    wit = np.full((len(gap), 3), np.nan)
    band = np.abs(gap) <= tau
    if np.any(band):
        d, xa, xb = triangle_distance(A[band], B[band])
        g = gap[band]
        touch = (g < 0) | (d <= tau)
        k = np.where(touch, int(ContactKind.TOUCH), int(ContactKind.CLEAR))
        kind[band] = k
        sep[band] = np.where(g >= 0, np.maximum(g, d), g)
        wit[band] = 0.5 * (xa + xb)
    kind[gap < -tau] = int(ContactKind.CROSS)
    return kind, sep, wit, axis, offset


# ----------------------------------------------------------------------
# single poses
@dataclass
class ContactReport:
    pairs: dict  # (a, b) -> ContactClass, worst over their triangles
    min_separation: float  # over pairs that do not share a hinge
    touches: list  # (faces, witness, hinge_adjacent)
    crosses: list  # (faces, witness, penetration)

    @property
    def n_crossings(self) -> int:
        return len(self.crosses)


def _hinge_of_pair(U):
    out = {}
    for a, b, d in U.dual.edges(data=True):
        out[(min(a, b), max(a, b))] = d["hinge"]
    return out


def classify_pose(hs: HingeStructure, pose: Pose, tau_touch: float = TAU_TOUCH, plates: Plates | None = None) -> ContactReport:
    """Classify every pair of faces in a pose; touches along a shared hinge are flagged."""
    U = hs.unfolding
    plates = Plates.from_unfolding(U) if plates is None else plates
    X = plates.posed(pose.rotations, pose.translations)
    c = X.mean(axis=1)
    r = np.linalg.norm(X - c[:, None, :], axis=2).max(axis=1)
    tree = cKDTree(c)
    cand = np.array(sorted(tree.query_pairs(2 * r.max() + tau_touch)), dtype=int).reshape(-1, 2)
    fa, fb = plates.face[cand[:, 0]], plates.face[cand[:, 1]]
    keep = fa != fb
    cand = cand[keep]
    keep2 = np.linalg.norm(c[cand[:, 0]] - c[cand[:, 1]], axis=1) <= r[cand[:, 0]] + r[cand[:, 1]] + tau_touch
    cand = cand[keep2]
    hinge_of = _hinge_of_pair(U)
    pairs: dict = {}
    touches, crosses = [], []
    min_sep = np.inf
    if len(cand):
        A, B = X[cand[:, 0]], X[cand[:, 1]]
        kind, sep, wit, axis, offset = _classify_pairs(A, B, tau_touch)
        for n, (i, j) in enumerate(cand):
            a, b = int(plates.face[i]), int(plates.face[j])
            key = (min(a, b), max(a, b))
            k = ContactKind(kind[n])
            h = hinge_of.get(key)
            if h is None:
                min_sep = min(min_sep, sep[n])
            if k == ContactKind.CROSS:
                w = _cross_witness(A[n], B[n])
                crosses.append((key, w, float(-sep[n])))
                cc = ContactClass(k, None, w, 0.0, float(-sep[n]))
            else:
                cc = ContactClass(k, Plane(axis[n], offset[n]), wit[n] if k == ContactKind.TOUCH else None,
                                  float(max(sep[n], 0.0)), float(max(-sep[n], 0.0)))
                if k == ContactKind.TOUCH:
                    adj = False
                    if h is not None:
                        p = hs.parent[int(hs.child[h])][0]
                        seg = pose.apply(p, U.hinges[h].endpoints)
                        adj = _point_segment_distance(wit[n], seg[0], seg[1])[0] <= tau_touch
                    touches.append((key, wit[n], adj))
            old = pairs.get(key)
            if old is None or cc.kind > old.kind:
                pairs[key] = cc
    return ContactReport(pairs, float(min_sep), touches, crosses)


# ----------------------------------------------------------------------
# schedules
@dataclass
class TouchEvent:
    time: float
    move: int
    faces: tuple
    witness: np.ndarray
    kind: str
    lemma: bool = False  # whether the active algorithm's touching lemma accounts for this contact


@dataclass
class CrossingEvent:
    time: float
    move: int
    faces: tuple
    witness: np.ndarray
    penetration: float


@dataclass
class VerificationReport:
    algorithm: str
    samples_per_move: int
    tau_touch: float
    samples_checked: int = 0
    crossings: int = 0
    crossing_events: list = field(default_factory=list)
    touch_counts: dict = field(default_factory=lambda: {k: 0 for k in TOUCH_CLASSES})
    touch_events: list = field(default_factory=list)  # everything except hinge-adjacent contacts
    uncertified_gaps: int = 0
    uncertified_examples: list = field(default_factory=list)
    min_separation: float = np.inf

    @property
    def unexpected(self) -> int:
        return self.touch_counts[UNEXPECTED]

    @property
    def certified(self) -> bool:
        return self.uncertified_gaps == 0

    @property
    def status(self) -> str:
        return "certified" if self.certified else "sampled-only"

    @property
    def passed(self) -> bool:
        return self.crossings == 0 and self.unexpected == 0

    @property
    def exit_code(self) -> int:
        if self.crossings:
            return EXIT_CROSSING
        if self.unexpected:
            return EXIT_UNEXPECTED
        return EXIT_PASS if self.certified else EXIT_UNCERTIFIED

    def summary(self) -> str:
        return (f"{self.algorithm}: {self.samples_checked} samples, {self.crossings} crossings, "
                f"{self.unexpected} unexpected touches, {self.status}")

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "samples_per_move": self.samples_per_move,
            "tau_touch": self.tau_touch,
            "samples_checked": self.samples_checked,
            "crossings": self.crossings,
            "unexpected_touches": self.unexpected,
            "touch_counts": {k: int(v) for k, v in self.touch_counts.items()},
            "status": self.status,
            "uncertified_gaps": self.uncertified_gaps,
            "min_separation": None if not np.isfinite(self.min_separation) else float(self.min_separation),
            "exit_code": self.exit_code,
            "crossing_events": [
                {"time": float(e.time), "move": int(e.move), "faces": [int(f) for f in e.faces],
                 "witness": [float(x) for x in e.witness], "penetration": float(e.penetration)} for e in self.crossing_events],
            "touch_events": [
                {"time": float(e.time), "move": int(e.move), "faces": [int(f) for f in e.faces], "kind": e.kind,
                 "lemma": bool(e.lemma),
                 "witness": [float(x) for x in e.witness]} for e in self.touch_events],
        }


@dataclass
class _MoveScan:
    index: int
    samples: int = 0
    hinge_touches: int = 0
    touches: list = field(default_factory=list)  # (j, t, fa, fb, witness)
    crosses: list = field(default_factory=list)  # (j, t, fa, fb, witness, penetration)
    uncertified: list = field(default_factory=list)  # (j, fa, fb)
    endpoint_hinge: set = field(default_factory=set)  # (j, fa, fb) hinge-adjacent touches at the first/last sample
    min_sep: float = np.inf


def _arc_min(C, A, B, span):
    """Minimum of C + A cos s + B sin s over s in [0, span] (span >= 0), elementwise."""
    vals = np.minimum(C + A, C + A * np.cos(span) + B * np.sin(span))
    s_star = np.mod(np.arctan2(B, A) + np.pi, 2 * np.pi)
    inside = s_star <= span
    return np.where(inside, np.minimum(vals, C - np.hypot(A, B)), vals)


def _plane_margin(Vj, S, a, u, span, rich: bool = False):
    """Best clearance over candidate planes that keep static triangles on one side for the whole arc.

    ``Vj`` (N, 3, 3) are moving triangles at the start of the arc, ``S`` the
    static triangles; the moving ones rotate by ``span`` about the line
    ``a + s u``. A positive value is a lower bound on their distance
    throughout the arc. Candidates are the separating axes at the start of
    the arc; ``rich`` adds those at its end and the rotation axis itself,
    whose planes the rotation leaves invariant.
    """
    axes, ok = sat_axes(Vj, S)
    if rich:
        Ve = np.einsum("nij,nvj->nvi", _rotations(u, span), Vj - a) + a
        ax2, ok2 = sat_axes(Ve, S)
        axes = np.concatenate([axes, ax2, np.broadcast_to(u, (len(Vj), 1, 3))], axis=1)
        ok = np.concatenate([ok, ok2, np.ones((len(Vj), 1), dtype=bool)], axis=1)
    axes = np.concatenate([axes, -axes], axis=1)  # (N, 34, 3)
    ok = np.concatenate([ok, ok], axis=1)
    off = project_axes(axes, S).max(axis=2)  # static on the negative side
    p = Vj - a
    par = (p @ u)[..., None] * u
    perp = p - par
    w = np.cross(u, perp)
    C = project_axes(axes, a + par)
    A = project_axes(axes, perp)
    B = project_axes(axes, w)
    lo = _arc_min(C, A, B, np.asarray(span)[:, None, None]).min(axis=2)
    return np.where(ok, lo - off, -np.inf).max(axis=1)


def _plane_certify(Vj, S, a, u, span, tau, depth: int = 16):
    """Whether moving and static triangles stay at most ``tau`` into each other's side over the arc.

    Arcs without a single certifying plane are bisected up to ``depth``
    times; every piece must then be certified on its own.
    """
    span = np.asarray(span, dtype=float)
    result = _plane_margin(Vj, S, a, u, span, rich=True) >= -tau
    idx = np.nonzero(~result)[0]
    V, St, sp, owner = Vj[idx], S[idx], span[idx], idx
    for _ in range(depth):
        if len(owner) == 0:
            break
        half = 0.5 * sp
        Vm = np.einsum("nij,nvj->nvi", _rotations(u, half), V - a) + a
        V = np.concatenate([V, Vm])
        St = np.concatenate([St, St])
        sp = np.concatenate([half, half])
        owner = np.concatenate([owner, owner])
        fail = _plane_margin(V, St, a, u, sp, rich=True) < -tau
        failed_owner, counts = np.unique(owner[fail], return_counts=True)
        result[owner] = True
        result[failed_owner] = False
        # failures spread along the arc are not a single contact being resolved
        spread = failed_owner[counts > 4]
        keep = fail & ~np.isin(owner, spread)
        V, St, sp, owner = V[keep], St[keep], sp[keep], owner[keep]
    if len(owner):
        result[np.unique(owner)] = False
    return result


class _Context:
    def __init__(self, hs: HingeStructure, sched: Schedule, n: int, tau: float, plates: Plates):
        self.hs = hs
        self.sched = sched
        self.n = n
        self.tau = tau
        self.plates = plates
        self.U = hs.unfolding

    def scan(self, idx: int) -> _MoveScan:
        hs, plates, tau, n = self.hs, self.plates, self.tau, self.n
        m = self.sched.moves[idx]
        out = _MoveScan(idx)
        if m.t1 <= m.t0 or m.end == m.start:
            return out
        h = m.hinge
        d0 = self.sched.dihedrals(hs.rest, m.t0)
        R, T = hs.transforms(d0)
        moving = np.array(sorted(hs.subtree[h]), dtype=int)
        mmask = np.isin(plates.face, moving)
        im_all, is_all = np.nonzero(mmask)[0], np.nonzero(~mmask)[0]
        Xm, Xs = plates.posed(R, T, im_all), plates.posed(R, T, is_all)
        a, u = hs.world_axis(h, R, T)
        u = u / np.linalg.norm(u)
        dphi = m.end - m.start
        thetas = dphi * np.arange(n + 1) / n
        times = m.t0 + (m.t1 - m.t0) * np.arange(n + 1) / n
        times[-1] = m.t1
        out.samples = n + 1
        if len(im_all) == 0 or len(is_all) == 0:
            return out
        child = int(hs.child[h])
        parent = hs.parent[child][0]
        rot = _rotations(u, thetas)
        # broad phase per chunk of samples
        bounds = np.unique(np.linspace(0, n, min(N_CHUNKS, n) + 1).round().astype(int))
        cm = Xm.mean(axis=1)
        rm = np.linalg.norm(Xm - cm[:, None], axis=2).max(axis=1)
        cs = Xs.mean(axis=1)
        rs = np.linalg.norm(Xs - cs[:, None], axis=2).max(axis=1)
        rho = _point_line_distance(cm, a, u)
        mids = 0.5 * (thetas[bounds[:-1]] + thetas[bounds[1:]])
        widths = np.abs(thetas[bounds[1:]] - thetas[bounds[:-1]])
        rot_mid = _rotations(u, mids)
        cmid = np.einsum("cij,nj->cni", rot_mid, cm - a) + a  # (C, nm, 3)
        near_chunk = np.zeros((len(mids), len(im_all), len(is_all)), dtype=bool)
        for ci in range(len(mids)):
            dist = np.linalg.norm(cmid[ci][:, None, :] - cs[None, :, :], axis=2)
            near_chunk[ci] = dist - (rho * widths[ci] / 2)[:, None] - rm[:, None] - rs[None, :] <= tau
        any_near = near_chunk.any(axis=0)
        pm, ps = np.nonzero(any_near)
        if len(pm) == 0:
            return out
        P = len(pm)
        nc = near_chunk[:, pm, ps].T  # (P, C)
        # whole chunks whose pairs stay apart by a plane need no sampling
        cp, cc = np.nonzero(nc)
        pre_ok = np.zeros_like(nc)
        for b0 in range(0, len(cp), BATCH):
            bp, bc = cp[b0:b0 + BATCH], cc[b0:b0 + BATCH]
            V0 = np.einsum("nij,nvj->nvi", rot[bounds[bc]], Xm[pm[bp]] - a) + a
            margin = _plane_margin(V0, Xs[ps[bp]], a, np.sign(dphi) * u, widths[bc])
            clear = margin > tau
            nc[bp[clear], bc[clear]] = False
            held = (margin >= -tau) & ~clear
            pre_ok[bp[held], bc[held]] = True
            if np.any(clear):
                out.min_sep = min(out.min_sep, float(margin[clear].min()))
        if not nc.any():
            return out
        smask = np.zeros((P, n + 1), dtype=bool)
        for ci in range(len(mids)):
            smask[nc[:, ci], bounds[ci]:bounds[ci + 1] + 1] = True
        fa_all = plates.face[im_all[pm]]
        fb_all = plates.face[is_all[ps]]
        adjacent = ((fa_all == child) & (fb_all == parent))
        r_tri = _point_line_distance(Xm.reshape(-1, 3), a, u).reshape(-1, 3).max(axis=1)
        # bounding spheres give a lower bound on the separation at every sample;
        # the exact test runs where that bound is inside the touch band or too
        # weak to certify a neighbouring gap
        pi, ji = np.nonzero(smask)
        SEP = np.full((P, n + 1), np.nan)
        for b0 in range(0, len(pi), BATCH):
            bp, bj = pi[b0:b0 + BATCH], ji[b0:b0 + BATCH]
            c = np.einsum("nij,nj->ni", rot[bj], cm[pm[bp]] - a) + a
            SEP[bp, bj] = np.linalg.norm(c - cs[ps[bp]], axis=1) - rm[pm[bp]] - rs[ps[bp]]
        need = smask & (SEP <= tau)
        gmask = np.zeros((P, n), dtype=bool)
        for ci in range(len(mids)):
            gmask[nc[:, ci], bounds[ci]:bounds[ci + 1]] = True
        step = np.abs(np.diff(thetas))
        weak = gmask & ~(np.minimum(SEP[:, :-1], SEP[:, 1:]) > step[None, :] * r_tri[pm][:, None])
        weak &= ~adjacent[:, None]
        need[:, :-1] |= weak
        need[:, 1:] |= weak
        pi, ji = np.nonzero(need)
        seg = hs.unfolding.hinges[h].endpoints @ R[parent].T + T[parent]
        for b0 in range(0, len(pi), BATCH):
            bp, bj = pi[b0:b0 + BATCH], ji[b0:b0 + BATCH]
            V = np.einsum("nij,nvj->nvi", rot[bj], Xm[pm[bp]] - a) + a
            S = Xs[ps[bp]]
            kind, sep, wit, _, _ = _classify_pairs(V, S, tau)
            SEP[bp, bj] = sep
            nonadj = ~adjacent[bp]
            if np.any(nonadj):
                out.min_sep = min(out.min_sep, float(np.min(sep[nonadj])))
            tmask = kind == int(ContactKind.TOUCH)
            if np.any(tmask):
                w = wit[tmask]
                on_axis = _point_line_distance(w, a, u) <= tau
                on_hinge = _point_segment_distance(w, seg[0], seg[1]) <= tau
                ha = on_axis | (adjacent[bp][tmask] & on_hinge)
                out.hinge_touches += int(ha.sum())
                tj = bj[tmask]
                for q in np.nonzero(ha & ((tj == 0) | (tj == n)))[0]:
                    k = np.nonzero(tmask)[0][q]
                    out.endpoint_hinge.add((int(tj[q]), int(fa_all[bp[k]]), int(fb_all[bp[k]])))
                for q in np.nonzero(~ha)[0]:
                    k = np.nonzero(tmask)[0][q]
                    j = int(bj[k])
                    out.touches.append((j, float(times[j]), int(fa_all[bp[k]]), int(fb_all[bp[k]]), w[q]))
            for k in np.nonzero(kind == int(ContactKind.CROSS))[0]:
                j = int(bj[k])
                out.crosses.append((j, float(times[j]), int(fa_all[bp[k]]), int(fb_all[bp[k]]),
                                    _cross_witness(V[k], S[k]), float(-sep[k])))
        # certification of sample gaps inside near chunks
        chunk_ok = np.zeros((P, n), dtype=bool)
        for ci in range(len(mids)):
            chunk_ok[pre_ok[:, ci], bounds[ci]:bounds[ci + 1]] = True
        gp, gj = np.nonzero(gmask)
        if len(gp):
            step = np.abs(thetas[gj + 1] - thetas[gj])
            disp = step * r_tri[pm[gp]]
            ok = np.minimum(SEP[gp, gj], SEP[gp, gj + 1]) > disp
            ok |= adjacent[gp]
            ok |= chunk_ok[gp, gj]
            bad = np.nonzero(~ok)[0]
            if len(bad):
                bp, bj = gp[bad], gj[bad]
                Vj = np.einsum("nij,nvj->nvi", rot[bj], Xm[pm[bp]] - a) + a
                span = np.abs(thetas[bj + 1] - thetas[bj])
                sgn = np.sign(dphi)
                cert = _plane_certify(Vj, Xs[ps[bp]], a, sgn * u, span, tau)
                for q in np.nonzero(~cert)[0]:
                    out.uncertified.append((int(bj[q]), int(fa_all[bp[q]]), int(fb_all[bp[q]])))
        return out


def _schedule_landmarks(hs: HingeStructure, sched: Schedule):
    """Path hinges in order of first appearance and the times Psi_i - eps."""
    order = []
    for m in sorted(sched.moves, key=lambda m: m.t0):
        if m.hinge not in order:
            order.append(m.hinge)
    psi = np.array([np.pi - hs.rest[h] for h in order])
    Psi = np.cumsum(psi)
    eps = sched.epsilon or 0.0
    return order, Psi - eps


class _Classifier:
    """Assigns touch classes; the state of a face pair is its relative rigid placement."""

    def __init__(self, hs: HingeStructure, sched: Schedule, tau: float):
        self.hs = hs
        self.sched = sched
        self.tau = tau
        self.U = hs.unfolding
        self.scale = max(1.0, self.U.base.diameter)
        self.flat_end = bool(np.allclose(sched.final_dihedrals(hs.rest), np.pi, atol=1e-9))
        self.cache: dict = {}
        self._poses: dict = {}
        dev_bad = set()
        if self.flat_end:
            from .unfolding import develop

            dev_bad = {(min(i, j), max(i, j)) for i, j, _ in develop(self.U, check=False).overlaps()}
        self.dev_bad = dev_bad
        self.order, self.landmarks = _schedule_landmarks(hs, sched)

    def pose(self, t):
        if t not in self._poses:
            self._poses[t] = pose_at(self.hs, self.sched, t)
        return self._poses[t]

    def relative(self, t, a, b) -> np.ndarray:
        P = self.pose(t)
        Rb = P.rotations[b]
        R = Rb.T @ P.rotations[a]
        tr = Rb.T @ (P.translations[a] - P.translations[b])
        return np.concatenate([R.ravel(), tr / self.scale])

    def _same(self, x, y) -> bool:
        return bool(np.max(np.abs(x - y)) <= 1e-9)

    def remember(self, t, a, b, cls):
        """Record the class of a touch state so later samples in the same relative configuration inherit it."""
        a, b = min(a, b), max(a, b)
        rel = self.relative(t, a, b)
        known = self.cache.setdefault((a, b), [])
        if not any(self._same(rel, r) for r, _ in known):
            known.append((rel, cls))

    def _material(self, t, f, w) -> np.ndarray:
        P = self.pose(t)
        return P.rotations[f].T @ (w - P.translations[f])

    def classify(self, move_idx, j, t, a, b, w, dt) -> str:
        a, b = min(a, b), max(a, b)
        rel = self.relative(t, a, b)
        ma, mb = self._material(t, a, w), self._material(t, b, w)
        # same pair placement as at the start, or contact at a point the two faces already shared there
        start = self.pose(0.0)
        if self._same(rel, self.relative(0.0, a, b)) or np.linalg.norm(
                start.apply(a, ma) - start.apply(b, mb)) <= self.tau:
            return ORIGINAL
        if self.flat_end and (a, b) not in self.dev_bad:
            if self._same(rel, self.relative(self.sched.end, a, b)):
                return FINAL
            end = self.pose(self.sched.end)
            if np.linalg.norm(end.apply(a, ma) - end.apply(b, mb)) <= self.tau:
                return FINAL
        known = self.cache.setdefault((a, b), [])
        for r, cls in known:
            if self._same(rel, r):
                return cls
        cls = PREDICTED if self.predicted(move_idx, j, t, w, dt) else UNEXPECTED
        known.append((rel, cls))
        return cls

    def predicted(self, move_idx, j, t, w, dt) -> bool:
        alg = self.sched.algorithm
        m = self.sched.moves[move_idx]
        hs, U = self.hs, self.U
        pose = self.pose(t)
        endpoint = j == 0 or abs(t - m.t1) <= 1e-12 or abs(t - m.t0) <= 1e-12
        child = int(hs.child[m.hinge])
        parent = hs.parent[child][0]
        Q = U.base
        if alg in ("path-unroll", "tree-unroll"):
            if not endpoint:
                return False
            ref = child if alg == "path-unroll" else parent
            n = pose.rotations[ref] @ Q.planes[U.faces[ref].facet].normal
            x0 = pose.apply(ref, U.faces[ref].loop[:1])[0]
            return abs(n @ (w - x0)) <= self.tau
        if alg == "two-step":
            for h, tl in zip(self.order, self.landmarks):
                if abs(t - tl) <= dt + 1e-12:
                    p = hs.parent[int(hs.child[h])][0]
                    seg = pose.apply(p, U.hinges[h].endpoints)
                    if _point_segment_distance(w, seg[0], seg[1])[0] <= self.tau:
                        return True
            return False
        return False


def verify_schedule(hs: HingeStructure, sched: Schedule, n_samples_per_move: int = 64,
                    tau_touch: float = TAU_TOUCH, strict: bool = False, raise_on_crossing: bool | None = None,
                    threads: int | None = None) -> VerificationReport:
    """Sample and certify a schedule; see the module docstring for the method.

    With ``strict`` the first crossing raises :class:`CrossingFound` and the
    first unexpected touch raises :class:`UnexpectedTouch`.
    """
    if n_samples_per_move < 8:
        raise ValueError("n_samples_per_move must be at least 8")
    if raise_on_crossing is not None:
        strict = raise_on_crossing
    plates = Plates.from_unfolding(hs.unfolding)
    rep = VerificationReport(sched.algorithm, n_samples_per_move, tau_touch)
    clf = _Classifier(hs, sched, tau_touch)
    p0 = pose_at(hs, sched, 0.0)
    c0 = classify_pose(hs, p0, tau_touch, plates)
    rep.samples_checked += 1
    rep.min_separation = c0.min_separation
    for key, w, adj in c0.touches:
        if adj:
            rep.touch_counts[HINGE_ADJACENT] += 1
        else:
            rep.touch_counts[ORIGINAL] += 1
    for key, w, pen in c0.crosses:
        rep.crossings += 1
        rep.crossing_events.append(CrossingEvent(0.0, -1, key, w, pen))
        if strict:
            raise CrossingFound(0.0, key, w)

    ctx = _Context(hs, sched, n_samples_per_move, tau_touch, plates)
    order = sorted(range(len(sched.moves)), key=lambda i: sched.moves[i].t0)
    nthreads = thread_count() if threads is None else threads
    if nthreads > 1 and len(order) > 1:
        with ThreadPoolExecutor(max_workers=nthreads) as ex:
            scans = list(ex.map(ctx.scan, order))
    else:
        scans = [ctx.scan(i) for i in order]

    for sc in scans:
        m = sched.moves[sc.index]
        dt = (m.t1 - m.t0) / n_samples_per_move
        rep.samples_checked += sc.samples
        rep.min_separation = min(rep.min_separation, sc.min_sep)
        rep.touch_counts[HINGE_ADJACENT] += sc.hinge_touches
        seen_cross = set()
        for j, t, a, b, w, pen in sorted(sc.crosses, key=lambda x: x[0]):
            key = (j, min(a, b), max(a, b))
            if key in seen_cross:
                continue
            seen_cross.add(key)
            rep.crossings += 1
            rep.crossing_events.append(CrossingEvent(t, sc.index, (a, b), w, pen))
            if strict:
                raise CrossingFound(t, (a, b), w)
        times = {0: m.t0, n_samples_per_move: m.t1}
        for j, a, b in sorted(sc.endpoint_hinge):
            if j == 0:
                clf.remember(times[j], a, b, HINGE_ADJACENT)
        for j, t, a, b, w in sorted(sc.touches, key=lambda x: x[0]):
            cls = clf.classify(sc.index, j, t, a, b, w, dt)
            rep.touch_counts[cls] += 1
            ev = TouchEvent(t, sc.index, (a, b), w, cls, cls == PREDICTED or clf.predicted(sc.index, j, t, w, dt))
            rep.touch_events.append(ev)
            if strict and cls == UNEXPECTED:
                raise UnexpectedTouch(t, ev)
        for j, a, b in sorted(sc.endpoint_hinge):
            if j == n_samples_per_move:
                clf.remember(times[j], a, b, HINGE_ADJACENT)
        rep.uncertified_gaps += len({(j, min(a, b), max(a, b)) for j, a, b in sc.uncertified})
        for j, a, b in sc.uncertified[:5]:
            if len(rep.uncertified_examples) < 50:
                rep.uncertified_examples.append((sc.index, j, a, b))
    return rep


# ----------------------------------------------------------------------
def run_lemma_suite(seed: int = 0, n_instances: int = 100, trapezoid_instances: int = 1000,
                    subtree_instances: int | None = None):
    """Randomized lemma property checks; see :mod:`bloomkit.lemmas`."""
    from .lemmas import run_lemma_suite as run

    return run(seed, n_instances, trapezoid_instances, subtree_instances)
