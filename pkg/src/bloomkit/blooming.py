"""Plate-and-hinge model, opening schedules and pose evaluation."""
from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .errors import DeltaTooLarge, EpsilonTooLarge, TimeOutOfRange, VerificationBudgetExceeded
from .geometry import RigidTransform, unit
from .unfolding import SerpentineCertificate, Unfolding

TIME_TOL = 1e-12


@dataclass(frozen=True)
class HingeStructure:
    """Faces of an unfolding as rigid plates hinged along the dual tree, rooted at ``root``.

    ``parent[f] = (p, h)`` gives the parent face and the hinge joining them.
    Axes are stored in rest (polyhedron) coordinates, oriented so that a
    positive rotation of the child about its axis opens the dihedral.
    """

    unfolding: Unfolding
    root: int
    parent: dict
    order: tuple  # faces, root first, parents before children
    rest: np.ndarray  # rest dihedral per hinge
    axis_point: np.ndarray  # (H, 3)
    axis_dir: np.ndarray  # (H, 3)
    child: np.ndarray  # (H,) face on the far side of each hinge from the root
    subtree: tuple = field(repr=False)  # hinge -> frozenset of faces moved by it

    @classmethod
    def build(cls, U: Unfolding, root: int | None = None) -> "HingeStructure":
        root = U.root if root is None else int(root)
        Q = U.base
        H = len(U.hinges)
        parent = {}
        order = [root]
        for p, c in nx.bfs_edges(U.dual, root):
            parent[c] = (p, U.dual.edges[p, c]["hinge"])
            order.append(c)
        rest = np.array([h.dihedral for h in U.hinges], dtype=float)
        ap = np.zeros((H, 3))
        ad = np.zeros((H, 3))
        child = np.full(H, -1, dtype=int)
        for c, (p, h) in parent.items():
            a, b = U.hinges[h].endpoints
            u = unit(b - a)
            nc = Q.planes[U.faces[c].facet].normal
            npar = Q.planes[U.faces[p].facet].normal
            if u @ np.cross(nc, npar) < 0:
                u = -u
            ap[h], ad[h], child[h] = a, u, c
        kids = {f: [] for f in order}
        for c, (p, _) in parent.items():
            kids[p].append(c)
        below = {}
        for f in reversed(order):
            below[f] = frozenset([f]).union(*(below[c] for c in kids[f]))
        subtree = tuple(below[int(child[h])] if child[h] >= 0 else frozenset() for h in range(H))
        return cls(U, root, parent, tuple(order), rest, ap, ad, child, subtree)

    @property
    def n_faces(self) -> int:
        return self.unfolding.n_faces

    def moving_faces(self, h: int) -> frozenset:
        return self.subtree[h]

    def transforms(self, dihedrals) -> tuple[np.ndarray, np.ndarray]:
        """Per-face rotations (F, 3, 3) and translations (F, 3) for the given hinge dihedrals."""
        dihedrals = np.asarray(dihedrals, dtype=float)
        F = self.n_faces
        R = np.zeros((F, 3, 3))
        t = np.zeros((F, 3))
        R[self.root] = np.eye(3)
        for f in self.order[1:]:
            p, h = self.parent[f]
            step = RigidTransform.about_axis(self.axis_point[h], self.axis_dir[h], dihedrals[h] - self.rest[h])
            R[f] = R[p] @ step.rotation
            t[f] = R[p] @ step.translation + t[p]
        return R, t

    def world_axis(self, h: int, R, t):
        """Axis of hinge ``h`` in world coordinates for a pose given by ``R, t``."""
        p = self.parent[int(self.child[h])][0]
        return R[p] @ self.axis_point[h] + t[p], R[p] @ self.axis_dir[h]


@dataclass(frozen=True)
class Move:
    hinge: int
    start: float  # dihedral at t0
    end: float  # dihedral at t1
    t0: float
    t1: float

    @property
    def speed(self) -> float:
        return (self.end - self.start) / (self.t1 - self.t0)

    def value(self, t: float) -> float:
        if t <= self.t0:
            return self.start
        if t >= self.t1:
            return self.end
        s = (t - self.t0) / (self.t1 - self.t0)
        return self.start + s * (self.end - self.start)


@dataclass(frozen=True)
class Schedule:
    algorithm: str
    moves: tuple[Move, ...]
    root: int
    epsilon: float | None = None
    delta: float | None = None

    @property
    def end(self) -> float:
        return max((m.t1 for m in self.moves), default=0.0)

    def dihedrals(self, rest, t: float) -> np.ndarray:
        """Dihedral of every hinge at time ``t``.

        Before its first move a hinge holds that move's start value; hinges
        that never move keep their rest value.
        """
        if t < -TIME_TOL or t > self.end + TIME_TOL:
            raise TimeOutOfRange(f"t={t} outside [0, {self.end}]")
        out = np.array(rest, dtype=float)
        seen = set()
        for m in sorted(self.moves, key=lambda m: m.t0):
            if m.hinge not in seen:
                out[m.hinge] = m.start
                seen.add(m.hinge)
            if m.t0 <= t + TIME_TOL:
                out[m.hinge] = m.value(t)
        return out

    def final_dihedrals(self, rest) -> np.ndarray:
        return self.dihedrals(rest, self.end)

    def active(self, t: float) -> list[int]:
        return [i for i, m in enumerate(self.moves) if m.t0 < t < m.t1]


@dataclass(frozen=True)
class Pose:
    time: float
    dihedrals: np.ndarray
    rotations: np.ndarray
    translations: np.ndarray

    def transform(self, f: int) -> RigidTransform:
        return RigidTransform(self.rotations[f], self.translations[f])

    def apply(self, f: int, points) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.rotations[f].T + self.translations[f]


def pose_at(hs: HingeStructure, sched: Schedule, t: float) -> Pose:
    d = sched.dihedrals(hs.rest, t)
    R, tr = hs.transforms(d)
    return Pose(float(t), d, R, tr)


def structure_for(U: Unfolding, sched: Schedule) -> HingeStructure:
    return HingeStructure.build(U, sched.root)


# ----------------------------------------------------------------------
# serpentine schedules
def _path_data(cert: SerpentineCertificate):
    hinges = list(cert.plate_hinges)
    phi = np.array([cert.unfolding.hinges[h].dihedral for h in hinges])
    psi = np.pi - phi
    Psi = np.concatenate([[0.0], np.cumsum(psi)])
    return hinges, phi, psi, Psi


def _path_root(cert: SerpentineCertificate) -> int:
    return int(cert.faces[-1])


def schedule_path_unroll(cert: SerpentineCertificate) -> Schedule:
    """Open hinges one after another from the start of the path, each until flat."""
    hinges, phi, psi, Psi = _path_data(cert)
    moves = tuple(Move(h, float(phi[i]), np.pi, float(Psi[i]), float(Psi[i + 1])) for i, h in enumerate(hinges))
    return Schedule("path-unroll", moves, _path_root(cert))


def schedule_path_two_step(cert: SerpentineCertificate, epsilon: float) -> Schedule:
    hinges, phi, psi, Psi = _path_data(cert)
    k = len(hinges)
    if k == 0:
        return Schedule("two-step", (), _path_root(cert), epsilon)
    if not 0 < epsilon < psi.min():
        raise EpsilonTooLarge(f"epsilon={epsilon} must lie in (0, {psi.min()})")
    eps = float(epsilon)
    h = [None] + hinges  # 1-based
    ph = [None] + list(phi)
    moves = [Move(h[1], ph[1], np.pi - eps, 0.0, Psi[1] - eps)]
    for i in range(2, k + 1):
        moves.append(Move(h[i], ph[i], np.pi - eps, Psi[i - 1] - eps, Psi[i] - 2 * eps))
        moves.append(Move(h[i - 1], np.pi - eps, np.pi, Psi[i] - 2 * eps, Psi[i] - eps))
    moves.append(Move(h[k], np.pi - eps, np.pi, Psi[k] - eps, Psi[k]))
    return Schedule("two-step", tuple(_floats(m) for m in moves), _path_root(cert), eps)


def schedule_path_waltz(cert: SerpentineCertificate, epsilon: float, delta: float) -> Schedule:
    hinges, phi, psi, Psi = _path_data(cert)
    k = len(hinges)
    if k <= 1:
        s = schedule_path_unroll(cert)
        return Schedule("waltz", s.moves, s.root, epsilon, delta)
    if k == 2:
        s = schedule_path_two_step(cert, epsilon)
        return Schedule("waltz", s.moves, s.root, epsilon, delta)
    if not 0 < epsilon < psi.min():
        raise EpsilonTooLarge(f"epsilon={epsilon} must lie in (0, {psi.min()})")
    eps, dl = float(epsilon), float(delta)
    if not 0 < dl < eps or np.any(psi < eps + dl):
        raise DeltaTooLarge(f"delta={delta} must be positive, below epsilon and leave every fold at least eps+delta")
    h = [None] + hinges
    ph = [None] + list(phi)
    moves = [
        Move(h[1], ph[1], np.pi - eps, 0.0, Psi[1] - eps),
        Move(h[2], ph[2], ph[2] + dl, Psi[1] - eps, Psi[1] - eps + dl),
    ]
    for i in range(2, k):
        moves.append(Move(h[i], ph[i] + dl, np.pi - eps, Psi[i - 1] - eps + dl, Psi[i] - 2 * eps))
        moves.append(Move(h[i + 1], ph[i + 1], ph[i + 1] + dl, Psi[i] - 2 * eps, Psi[i] - 2 * eps + dl))
        moves.append(Move(h[i - 1], np.pi - eps, np.pi, Psi[i] - 2 * eps + dl, Psi[i] - eps + dl))
    moves.append(Move(h[k], ph[k] + dl, np.pi, Psi[k - 1] - eps + dl, Psi[k] - eps))
    moves.append(Move(h[k - 1], np.pi - eps, np.pi, Psi[k] - eps, Psi[k]))
    return Schedule("waltz", tuple(_floats(m) for m in moves), _path_root(cert), eps, dl)


def _floats(m: Move) -> Move:
    return Move(int(m.hinge), float(m.start), float(m.end), float(m.t0), float(m.t1))


# ----------------------------------------------------------------------
# tree schedule
def _loop_position(face, seg) -> float:
    """Position of a boundary segment along the face loop, as edge index plus fraction."""
    loop = face.loop
    n = len(loop)
    x = np.asarray(seg).mean(axis=0)
    best, pos = np.inf, 0.0
    for i in range(n):
        a, b = loop[i], loop[(i + 1) % n]
        d = b - a
        L2 = d @ d
        if L2 == 0:
            continue
        s = np.clip((x - a) @ d / L2, 0.0, 1.0)
        dist = np.linalg.norm(a + s * d - x)
        if dist < best - 1e-12:
            best, pos = dist, i + s
    return pos


def tree_children_order(U: Unfolding, parent: dict, f: int) -> list[int]:
    """Children of ``f`` in counterclockwise order along its boundary, starting after the hinge to its parent."""
    face = U.faces[f]
    n = len(face.loop)
    kids = [(c, h) for c, (p, h) in parent.items() if p == f]
    start = _loop_position(face, U.hinges[parent[f][1]].endpoints) if f in parent else -1e-9
    return [c for c, h in sorted(kids, key=lambda ch: (_loop_position(face, U.hinges[ch[1]].endpoints) - start) % n)]


def schedule_tree_unroll(tree, U: Unfolding | None = None) -> Schedule:
    """Post-order opening of a rooted face tree; every face is flattened onto its parent in turn."""
    U = tree.unfolding if U is None else U
    hs = HingeStructure.build(U, tree.root)
    moves = []
    t = 0.0

    def visit(f):
        nonlocal t
        for c in tree_children_order(U, hs.parent, f):
            visit(c)
        if f == tree.root:
            return
        h = hs.parent[f][1]
        phi = float(hs.rest[h])
        psi = np.pi - phi
        moves.append(Move(int(h), phi, float(np.pi), t, t + psi))
        t += psi

    visit(tree.root)
    return Schedule("tree-unroll", tuple(moves), int(tree.root))


# ----------------------------------------------------------------------
# epsilon / delta
def _suffix_extent(cert: SerpentineCertificate, i: int) -> float:
    """Wedge angle about line l_{i-1} spanned by plates i-1..k once plate i-1 is flattened onto plate i."""
    U = cert.unfolding
    Q = U.base
    hinges = cert.plate_hinges
    hi, hprev = U.hinges[hinges[i - 1]], U.hinges[hinges[i - 2]]
    f_prev = U.faces[cert.plates[i - 1][0]]
    f_cur = U.faces[cert.plates[i][0]]
    n_cur = Q.planes[f_cur.facet].normal
    n_prev = Q.planes[f_prev.facet].normal
    a, b = hi.endpoints
    u = unit(b - a)
    if u @ np.cross(n_prev, n_cur) < 0:
        u = -u
    flat = RigidTransform.about_axis(a, u, np.pi - hi.dihedral)
    p0, p1 = flat.apply(hprev.endpoints)
    L = unit(p1 - p0)
    inside = flat.apply(f_prev.loop.mean(axis=0))
    d0 = inside - p0
    d0 = unit(d0 - (d0 @ L) * L)
    down = -n_cur
    pts = [U.faces[g].loop for plate in cert.plates[i:] for g in plate]
    P = np.vstack(pts) - p0
    W = P - np.outer(P @ L, L)
    keep = np.linalg.norm(W, axis=1) > 1e-9 * max(1.0, Q.diameter)
    if not np.any(keep):
        return 0.0
    ang = np.arctan2(W[keep] @ down, W[keep] @ d0)
    ang = np.where(ang < -1e-12, ang + 2 * np.pi, np.maximum(ang, 0.0))
    return float(ang.max())


def epsilon_bound(cert: SerpentineCertificate) -> float:
    """Half the smallest of the fold angles and the suffix clearances ``pi - extent`` about each line l_{i-1}.

    Lines about which the suffix wraps past pi give no usable clearance and
    are skipped; :func:`pick_epsilon_delta` shrinks epsilon when that matters.
    """
    psi = cert.fold_angles
    if len(psi) == 0:
        return 0.0
    terms = [float(psi.min())]
    for i in range(2, cert.k + 1):
        ext = _suffix_extent(cert, i)
        if ext < np.pi - 1e-12:
            terms.append(np.pi - ext)
    return 0.5 * min(terms)


def pick_epsilon_delta(cert: SerpentineCertificate, samples: int = 64, retries: int = 8, verify=True):
    """Choose (epsilon, delta) for Path-Waltz by sampled verification.

    Starts from :func:`epsilon_bound` and delta = epsilon / 4. A candidate
    is accepted when the check finds no crossing and certifies every sample
    gap. Otherwise delta is halved when every failure lies in a
    delta-advance move, and epsilon is halved (delta following) when not.
    """
    eps = epsilon_bound(cert)
    delta = eps / 4
    if not verify or cert.k <= 2:
        return eps, delta
    from .verify import verify_schedule

    hs = HingeStructure.build(cert.unfolding, _path_root(cert))
    report = None
    for _ in range(retries + 1):
        sched = schedule_path_waltz(cert, eps, delta)
        report = verify_schedule(hs, sched, samples, raise_on_crossing=False)
        if report.crossings == 0 and report.certified:
            return eps, delta
        advance = {j for j, m in enumerate(sched.moves) if abs(abs(m.end - m.start) - delta) < 1e-12}
        bad = [ev.move for ev in report.crossing_events] + [g[0] for g in report.uncertified_examples]
        if all(mv in advance for mv in bad):
            delta /= 2
        else:
            eps /= 2
            delta = min(delta, eps / 4)
    raise VerificationBudgetExceeded(eps, delta, report)
