"""Cut sets, face extraction, dual trees, planar developments and serpentine refinement."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import networkx as nx
import numpy as np
import shapely
from shapely.geometry import LineString, Point, Polygon
from shapely.strtree import STRtree

from .errors import CutsNotSpanningTree, DegenerateInput, NonTreeDual, NotSerpentine, OverlapDetected
from .geometry import Polyhedron, RigidTransform, polygon_area, polygon_centroid

FLAT_TOL = 1e-9
OVERLAP_AREA = 1e-10


@dataclass(frozen=True)
class Face:
    index: int
    facet: int
    nodes: tuple[int, ...]  # boundary loop of node ids, counterclockwise from outside; slits appear twice
    loop: np.ndarray  # 3D positions of ``nodes``
    loop2d: np.ndarray  # the same loop in the facet frame
    outline2d: np.ndarray  # loop with slits removed

    @property
    def area(self) -> float:
        return polygon_area(self.outline2d)

    def polygon(self) -> Polygon:
        pg = Polygon(self.outline2d)
        return pg if pg.is_valid else shapely.make_valid(pg)

    def interior_point_2d(self) -> np.ndarray:
        pg = self.polygon()
        c = polygon_centroid(self.outline2d)
        if pg.contains(Point(c)) and pg.exterior.distance(Point(c)) > 1e-9 * max(1.0, np.sqrt(abs(self.area))):
            return c
        p = pg.representative_point()
        return np.array([p.x, p.y])


@dataclass(frozen=True)
class Hinge:
    index: int
    faces: tuple[int, int]  # face on the edge's first facet, face on its second facet
    edge: int
    endpoints: np.ndarray  # (2, 3)
    dihedral: float

    @property
    def midpoint(self) -> np.ndarray:
        return self.endpoints.mean(axis=0)

    def other(self, f: int) -> int:
        a, b = self.faces
        return b if f == a else a

    @property
    def is_flat(self) -> bool:
        return self.dihedral >= np.pi - FLAT_TOL


@dataclass(frozen=True)
class Unfolding:
    """Cuts on a polyhedron together with the faces and dual tree they induce."""

    base: Polyhedron
    cuts: tuple  # polylines, each an (m, 3) array
    faces: tuple[Face, ...]
    hinges: tuple[Hinge, ...]
    root: int
    dual: nx.Graph = field(compare=False)
    added_cuts: int = 0
    nodes: np.ndarray | None = field(default=None, compare=False)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def hinges_of(self, f: int) -> list[int]:
        return sorted(d["hinge"] for _, _, d in self.dual.edges(f, data=True))

    def is_serpentine(self) -> bool:
        return self.n_faces == 1 or (max(d for _, d in self.dual.degree) <= 2 and nx.is_tree(self.dual))

    def with_root(self, root: int) -> "Unfolding":
        return replace(self, root=int(root))

    def face_at(self, x) -> int:
        """Face containing the surface point ``x`` (first match on shared boundaries)."""
        Q = self.base
        x = np.asarray(x, dtype=float)
        best, bd = None, np.inf
        for face in self.faces:
            if abs(Q.planes[face.facet].signed_distance(x)) > 1e-7 * max(1.0, Q.diameter):
                continue
            d = face.polygon().distance(Point(Q.to_2d(face.facet, x)))
            if d < bd - 1e-12:
                best, bd = face.index, d
        if best is None:
            raise ValueError("point is not on the surface")
        return best


# ----------------------------------------------------------------------
# face extraction
class _NodeTable:
    def __init__(self, Q: Polyhedron, tol: float):
        self.Q = Q
        self.tol = tol
        self.pos = [Q.vertices[i].copy() for i in range(Q.n_vertices)]
        self.kind = [("vertex", i) for i in range(Q.n_vertices)]
        self.on_edge: dict[int, list[tuple[float, int]]] = {}
        self.in_facet: dict[int, list[int]] = {}

    def snap(self, x) -> int:
        Q = self.Q
        x = np.asarray(x, dtype=float)
        v = Q.vertex_at(x, self.tol)
        if v is not None:
            return v
        e = Q.edge_at(x, self.tol)
        if e is not None:
            a, b = Q.edges[e]
            pa, pb = Q.vertices[a], Q.vertices[b]
            L = np.linalg.norm(pb - pa)
            t = float(np.clip((x - pa) @ (pb - pa) / (L * L), 0.0, 1.0))
            for t2, nid in self.on_edge.get(e, []):
                if abs(t2 - t) * L <= self.tol:
                    return nid
            nid = self._add(pa + t * (pb - pa), ("edge", e, t))
            self.on_edge.setdefault(e, []).append((t, nid))
            return nid
        fs = Q.locate(x, self.tol)
        if not fs:
            raise DegenerateInput(f"cut point {x} is not on the surface")
        f = fs[0]
        for nid in self.in_facet.get(f, []):
            if np.linalg.norm(self.pos[nid] - x) <= self.tol:
                return nid
        nid = self._add(x, ("facet", f))
        self.in_facet.setdefault(f, []).append(nid)
        return nid

    def _add(self, x, kind):
        self.pos.append(np.asarray(x, dtype=float))
        self.kind.append(kind)
        return len(self.pos) - 1

    def edges_of(self, n):
        k = self.kind[n]
        if k[0] == "vertex":
            return {e for e, (a, b) in enumerate(self.Q.edges) if a == k[1] or b == k[1]}
        if k[0] == "edge":
            return {k[1]}
        return set()

    def facets_of(self, n):
        k = self.kind[n]
        if k[0] == "vertex":
            return set(self.Q.vertex_facets(k[1]))
        if k[0] == "edge":
            return {int(f) for f in self.Q.edge_facets[k[1]]}
        return {k[1]}

    def edge_param(self, n, e):
        k = self.kind[n]
        if k[0] == "edge":
            return k[2]
        return 0.0 if self.Q.edges[e][0] == k[1] else 1.0


def _face_cycles(nodes2d: dict, graph_edges):
    """Bounded faces of a connected plane graph, as node loops with the face on the left."""
    out_edges: dict[int, list[int]] = {}
    for u, w in graph_edges:
        out_edges.setdefault(u, []).append(w)
        out_edges.setdefault(w, []).append(u)
    order = {}
    for u, nbrs in out_edges.items():
        ang = [np.arctan2(*(nodes2d[w] - nodes2d[u])[::-1]) for w in nbrs]
        srt = [nbrs[i] for i in np.argsort(ang)]
        order[u] = srt
    pos_in = {(u, w): i for u, srt in order.items() for i, w in enumerate(srt)}
    seen = set()
    cycles = []
    for u, srt in order.items():
        for w in srt:
            if (u, w) in seen:
                continue
            cyc = []
            h = (u, w)
            while h not in seen:
                seen.add(h)
                cyc.append(h[0])
                a, b = h
                lst = order[b]
                i = pos_in[(b, a)]
                h = (b, lst[(i - 1) % len(lst)])
            pts = np.array([nodes2d[n] for n in cyc])
            if polygon_area(pts) > 0:
                cycles.append(cyc)
    return cycles


def _remove_slits(loop):
    loop = list(loop)
    changed = True
    while changed and len(loop) > 3:
        changed = False
        n = len(loop)
        for i in range(n):
            if loop[i - 1] == loop[(i + 1) % n]:
                j = (i + 1) % n
                for k in sorted({i, j}, reverse=True):
                    loop.pop(k)
                changed = True
                break
    return loop


def faces_from_cuts(Q: Polyhedron, cuts, root: int | None = None, root_point=None, tol: float | None = None,
                    added_cuts: int = 0) -> Unfolding:
    """Faces, hinges and dual tree induced by cutting ``Q`` along ``cuts`` (polylines on the surface)."""
    tol = Q.tol if tol is None else tol
    cuts = tuple(np.asarray(c, dtype=float).reshape(-1, 3) for c in cuts)
    nt = _NodeTable(Q, tol)
    edge_cuts: dict[int, list[tuple[float, float]]] = {}
    facet_segs: dict[int, list[tuple[int, int]]] = {}
    for poly in cuts:
        ids = [nt.snap(x) for x in poly]
        for u, w in zip(ids[:-1], ids[1:]):
            if u == w:
                continue
            common_e = nt.edges_of(u) & nt.edges_of(w)
            if common_e:
                e = min(common_e)
                t0, t1 = sorted((nt.edge_param(u, e), nt.edge_param(w, e)))
                edge_cuts.setdefault(e, []).append((t0, t1))
                continue
            common_f = nt.facets_of(u) & nt.facets_of(w)
            if not common_f:
                raise DegenerateInput("cut segment does not lie on a single facet or edge")
            f = min(common_f)
            facet_segs.setdefault(f, []).append((u, w))

    # split every edge at its breakpoints
    sub = {}  # edge -> list of (t0, t1, n0, n1, is_cut)
    for e, (a, b) in enumerate(Q.edges):
        pts = sorted([(0.0, int(a)), (1.0, int(b))] + nt.on_edge.get(e, []))
        L = np.linalg.norm(Q.vertices[b] - Q.vertices[a])
        pieces = []
        for (t0, n0), (t1, n1) in zip(pts[:-1], pts[1:]):
            mid = 0.5 * (t0 + t1)
            is_cut = any(c0 - tol / L <= mid <= c1 + tol / L and c0 <= t0 + tol / L and c1 >= t1 - tol / L
                         for c0, c1 in edge_cuts.get(e, []))
            pieces.append((t0, t1, n0, n1, is_cut))
        sub[e] = pieces

    cut_graph = nx.Graph()
    cut_graph.add_nodes_from(range(Q.n_vertices))
    for e, pieces in sub.items():
        for t0, t1, n0, n1, is_cut in pieces:
            if is_cut:
                cut_graph.add_edge(n0, n1)
    for f, segs in facet_segs.items():
        for u, w in segs:
            cut_graph.add_edge(u, w)
    n_seg = sum(1 for p in sub.values() for q in p if q[4]) + sum(len(set(map(frozenset, s))) for s in facet_segs.values())
    if not nx.is_connected(cut_graph) or cut_graph.number_of_edges() != cut_graph.number_of_nodes() - 1 \
            or n_seg != cut_graph.number_of_edges():
        raise CutsNotSpanningTree(
            f"cuts do not form a tree spanning all vertices "
            f"({cut_graph.number_of_nodes()} nodes, {cut_graph.number_of_edges()} arcs, "
            f"{nx.number_connected_components(cut_graph)} components)")

    # faces per facet
    faces = []
    half_face = {}  # (edge, piece index, facet) -> face
    for f in range(Q.n_facets):
        loop = Q.facets[f]
        gedges = []
        piece_of = {}
        for j, a in enumerate(loop):
            b = loop[(j + 1) % len(loop)]
            e = Q.edge_id(a, b)
            for k, (t0, t1, n0, n1, _) in enumerate(sub[e]):
                gedges.append((n0, n1))
                piece_of[(n0, n1)] = piece_of[(n1, n0)] = (e, k)
        for u, w in set(tuple(sorted(s)) for s in facet_segs.get(f, [])):
            gedges.append((u, w))
        node_ids = {n for ed in gedges for n in ed}
        nodes2d = {n: Q.to_2d(f, nt.pos[n]) for n in node_ids}
        for cyc in _face_cycles(nodes2d, gedges):
            idx = len(faces)
            pts3 = np.array([nt.pos[n] for n in cyc])
            pts2 = np.array([nodes2d[n] for n in cyc])
            clean = _remove_slits(cyc)
            faces.append(Face(idx, f, tuple(cyc), pts3, pts2, np.array([nodes2d[n] for n in clean])))
            for i, u in enumerate(cyc):
                w = cyc[(i + 1) % len(cyc)]
                if (u, w) in piece_of:
                    half_face[(*piece_of[(u, w)], f)] = idx

    # hinges: uncut edge pieces, merging contiguous pieces with the same face pair
    hinges = []
    for e, pieces in sub.items():
        f0, f1 = (int(x) for x in Q.edge_facets[e])
        runs = []
        for k, (t0, t1, n0, n1, is_cut) in enumerate(pieces):
            if is_cut:
                runs.append(None)
                continue
            pair = (half_face[(e, k, f0)], half_face[(e, k, f1)])
            if runs and runs[-1] is not None and runs[-1][0] == pair:
                runs[-1] = (pair, runs[-1][1], n1)
            else:
                runs.append((pair, n0, n1))
        dihedral = Q.dihedral(e)
        hinges.extend((*r, e, dihedral) for r in runs if r is not None)
    hinge_objs = tuple(Hinge(i, pair, e, np.array([nt.pos[n0], nt.pos[n1]]), dih)
                       for i, (pair, n0, n1, e, dih) in enumerate(hinges))
    dual = nx.MultiGraph()
    dual.add_nodes_from(range(len(faces)))
    for h in hinge_objs:
        dual.add_edge(*h.faces, hinge=h.index)
    if not nx.is_tree(dual):
        raise NonTreeDual(f"dual graph of {len(faces)} faces and {len(hinge_objs)} hinges is not a tree")
    dual = nx.Graph(dual)
    faces = tuple(faces)
    U = Unfolding(Q, cuts, faces, hinge_objs, 0, dual, added_cuts, np.array(nt.pos))
    if root is not None:
        return U.with_root(root)
    if root_point is not None:
        return U.with_root(U.face_at(root_point))
    return U


# ----------------------------------------------------------------------
# development
def _rigid2(p_src, q_src, p_dst, q_dst):
    d1, d2 = q_src - p_src, q_dst - p_dst
    ang = np.arctan2(d2[1], d2[0]) - np.arctan2(d1[1], d1[0])
    c, s = np.cos(ang), np.sin(ang)
    R = np.array([[c, -s], [s, c]])
    return R, p_dst - R @ p_src


@dataclass(frozen=True)
class Development:
    """Planar placement of every face; ``placements[f]`` maps facet-frame coordinates to the plane."""

    unfolding: Unfolding
    placements: tuple

    def outline(self, f: int) -> np.ndarray:
        R, t = self.placements[f]
        return self.unfolding.faces[f].outline2d @ R.T + t

    def place(self, f: int, points3d) -> np.ndarray:
        U = self.unfolding
        R, t = self.placements[f]
        return U.base.to_2d(U.faces[f].facet, points3d) @ R.T + t

    def transform(self, f: int) -> RigidTransform:
        """3D rigid motion carrying face ``f`` from the surface into the plane ``z = 0``."""
        U = self.unfolding
        o, u, v, n = U.base.frame(U.faces[f].facet)
        R2, t2 = self.placements[f]
        R = np.eye(3)
        R[:2, :2] = R2
        F = np.vstack([u, v, n])
        rot = R @ F
        trans = -rot @ o + np.array([t2[0], t2[1], 0.0])
        return RigidTransform(rot, trans)

    def polygons(self):
        out = []
        for f in range(self.unfolding.n_faces):
            pg = Polygon(self.outline(f))
            out.append(pg if pg.is_valid else shapely.make_valid(pg))
        return out

    @property
    def grid(self) -> float:
        # fixed-precision overlay; floating GEOS overlay misreports nearly coincident vertices
        return 1e-12 * max(1.0, self.unfolding.base.diameter)

    def union(self):
        return shapely.union_all(self.polygons(), grid_size=self.grid)

    def union_area(self) -> float:
        return float(self.union().area)

    def overlaps(self, area_tol: float = OVERLAP_AREA):
        pgs = self.polygons()
        tree = STRtree(pgs)
        out = []
        for i, j in zip(*tree.query(pgs, predicate="intersects")):
            if i < j:
                a = pgs[i].intersection(pgs[j], grid_size=self.grid).area
                if a > area_tol:
                    out.append((int(i), int(j), float(a)))
        return out


def develop(U: Unfolding, check: bool = True) -> Development:
    """Unroll every face into the plane about its hinges, starting from the root."""
    Q = U.base
    place = {U.root: (np.eye(2), np.zeros(2))}
    for parent, child in nx.bfs_edges(U.dual, U.root):
        h = U.hinges[U.dual.edges[parent, child]["hinge"]]
        Rp, tp = place[parent]
        fp, fc = U.faces[parent].facet, U.faces[child].facet
        p, q = h.endpoints
        P = Rp @ Q.to_2d(fp, p) + tp
        Qd = Rp @ Q.to_2d(fp, q) + tp
        place[child] = _rigid2(Q.to_2d(fc, p), Q.to_2d(fc, q), P, Qd)
    dev = Development(U, tuple(place[f] for f in range(U.n_faces)))
    if check:
        bad = dev.overlaps()
        if bad:
            i, j, a = max(bad, key=lambda x: x[2])
            raise OverlapDetected((i, j), a)
    return dev


# ----------------------------------------------------------------------
# serpentine structure
@dataclass(frozen=True)
class SerpentineCertificate:
    """Dual path ``faces[0] .. faces[k]`` of a serpentine unfolding.

    Consecutive faces joined by a flat hinge form one rigid plate; ``plates``
    lists them and ``plate_hinges[i]`` joins ``plates[i]`` and ``plates[i+1]``.
    """

    unfolding: Unfolding
    faces: tuple[int, ...]
    hinges: tuple[int, ...]
    dihedrals: tuple[float, ...]
    plates: tuple[tuple[int, ...], ...]
    plate_hinges: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.plate_hinges)

    @property
    def fold_angles(self) -> np.ndarray:
        return np.array([np.pi - self.unfolding.hinges[h].dihedral for h in self.plate_hinges])

    @property
    def prefix_sums(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.fold_angles)])


def dual_path(U: Unfolding, start: int | None = None) -> SerpentineCertificate:
    """Ordered dual path of a serpentine unfolding."""
    D = U.dual
    if U.n_faces == 1:
        return SerpentineCertificate(U, (0,), (), (), ((0,),), ())
    if not U.is_serpentine():
        deg = max(d for _, d in D.degree)
        raise NotSerpentine(f"dual tree has a node of degree {deg}")
    ends = sorted(n for n, d in D.degree if d == 1)
    if start is None:
        start = U.root if U.root in ends else ends[0]
    if start not in ends:
        raise NotSerpentine(f"face {start} is not an end of the dual path")
    order = [start]
    prev = None
    while True:
        nxt = [n for n in D.neighbors(order[-1]) if n != prev]
        if not nxt:
            break
        prev = order[-1]
        order.append(nxt[0])
    hinges = tuple(D.edges[a, b]["hinge"] for a, b in zip(order[:-1], order[1:]))
    dih = tuple(U.hinges[h].dihedral for h in hinges)
    plates = [[order[0]]]
    plate_hinges = []
    for h, f in zip(hinges, order[1:]):
        if U.hinges[h].is_flat:
            plates[-1].append(f)
        else:
            plates.append([f])
            plate_hinges.append(h)
    return SerpentineCertificate(U, tuple(order), hinges, dih, tuple(map(tuple, plates)), tuple(plate_hinges))


def _sees(face: Face, c, m, tol):
    """Whether the open segment ``c m`` stays inside the face, avoiding its slits."""
    pg = face.polygon()
    seg = LineString([c, m])
    if not pg.buffer(tol).covers(seg):
        return False
    # pull back from m, which lies on the boundary itself
    short = LineString([c, c + (1 - 1e-6) * (np.asarray(m) - c)])
    loop = face.loop2d
    n = len(loop)
    for i in range(n):
        if LineString([loop[i], loop[(i + 1) % n]]).distance(short) < tol:
            return False
    return True


def _centre_candidates(face: Face, c, n: int = 12):
    """The centroid first, then interior grid points by distance from it."""
    yield c
    if len(face.loop2d) == len(face.outline2d):
        return  # no slits; the triangulation routes below are safe
    lo, hi = face.outline2d.min(axis=0), face.outline2d.max(axis=0)
    g = np.stack(np.meshgrid(*(np.linspace(a, b, n + 2)[1:-1] for a, b in zip(lo, hi))), axis=-1).reshape(-1, 2)
    yield from g[np.argsort(np.linalg.norm(g - c, axis=1))]


def _hinge_routes(U: Unfolding, f: int):
    """Centre of face ``f`` and a polyline inside the face from it to each hinge midpoint.

    The area centroid is used with straight segments when it sees every
    midpoint. Otherwise routes follow the dual tree of a triangulation of the
    face (triangle centroids and shared-edge midpoints), so that the routes
    only share common prefixes and their union is a tree.
    """
    Q = U.base
    face = U.faces[f]
    hs = U.hinges_of(f)
    mids = {h: Q.to_2d(face.facet, U.hinges[h].midpoint) for h in hs}
    tol = 1e-9 * max(1.0, Q.diameter)
    c = polygon_centroid(face.outline2d)
    for c in _centre_candidates(face, c):
        if face.polygon().contains(Point(c)) and all(_sees(face, c, m, tol) for m in mids.values()):
            return c, {h: [c, m] for h, m in mids.items()}
    from .contact import triangulate_polygon

    P = face.outline2d
    tris = [tuple(int(i) for i in t) for t in triangulate_polygon(P)]
    G = nx.Graph()
    owner = {}
    for k, t in enumerate(tris):
        G.add_node(k)
        for i in range(3):
            key = frozenset((t[i], t[(i + 1) % 3]))
            if key in owner:
                G.add_edge(owner[key], k, shared=tuple(key))
            else:
                owner[key] = k
    T = nx.bfs_tree(G, max(range(len(tris)), key=lambda k: polygon_area(P[list(tris[k])])))
    root = next(iter(T.nodes))
    cent = {k: P[list(t)].mean(axis=0) for k, t in enumerate(tris)}
    routes = {}
    for h, m in mids.items():
        near = [k for k, t in enumerate(tris)
                if LineString(P[list(t) + [t[0]]]).distance(Point(m)) < 10 * tol]
        if not near:
            raise DegenerateInput(f"hinge {h} midpoint not on face {f}")
        path = nx.shortest_path(T, root, near[0])
        pts = [cent[path[0]]]
        for u, v in zip(path, path[1:]):
            i, j = G.edges[u, v]["shared"]
            pts += [0.5 * (P[i] + P[j]), cent[v]]
        routes[h] = pts + [m]
    return cent[root], routes


def refine_to_serpentine(U: Unfolding, force: bool = False):
    """Add cuts so the dual tree becomes a path; returns ``(refined, certificate)``.

    Every hinge receives cuts from the interior points of its two faces to
    its midpoint, which turns the dual into a cycle through all subfaces; one
    more cut along half a hinge of the root face opens the cycle into a path.
    """
    Q = U.base
    if U.n_faces == 1 or (not force and U.is_serpentine()):
        return U, dual_path(U)
    routed = {f: _hinge_routes(U, f) for f in range(U.n_faces)}
    centers = {f: r[0] for f, r in routed.items()}
    new_cuts = []
    seen = set()
    for f, (_, routes) in routed.items():
        for h, pts in routes.items():
            pts3 = [Q.to_3d(U.faces[f].facet, x) for x in pts[:-1]] + [U.hinges[h].midpoint]
            for x, y in zip(pts3, pts3[1:]):
                key = tuple(np.round(np.concatenate([x, y]), 12))
                if key not in seen:
                    seen.add(key)
                    new_cuts.append(np.array([x, y]))
    # the tour around the added cut tree starts at the root face's centre,
    # leaving along the cut to its lowest-index hinge
    root = U.faces[U.root]
    c = centers[U.root]
    rh = U.hinges_of(U.root)
    ang = {h: np.arctan2(*(Q.to_2d(root.facet, U.hinges[h].midpoint) - c)[::-1]) for h in rh}
    h0 = rh[0]
    ccw = sorted(rh, key=lambda h: (ang[h] - ang[h0]) % (2 * np.pi))
    h_next = ccw[1] if len(ccw) > 1 else h0
    hn = U.hinges[h_next]
    # the half of h_next met first when walking the root boundary counterclockwise
    p, q = hn.endpoints
    loop = list(root.nodes)
    ip = _loop_index(U, root, p)
    iq = _loop_index(U, root, q)
    n = len(loop)
    first = p if (iq - ip) % n == 1 or ((iq - ip) % n != 0 and (iq - ip) % n < (ip - iq) % n) else q
    m = hn.midpoint
    new_cuts.append(np.array([first, m]))
    cuts = U.cuts + tuple(new_cuts)
    R = faces_from_cuts(Q, cuts, added_cuts=U.added_cuts + len(new_cuts))
    # the refined path starts at the root subface bordering the cycle-breaking cut
    probe2 = Q.to_2d(root.facet, 0.5 * (first + m))
    start = None
    for face in R.faces:
        if face.facet != root.facet:
            continue
        if face.polygon().distance(Point(probe2)) < 1e-9 * max(1.0, Q.diameter) and R.dual.degree(face.index) <= 1:
            start = face.index
            break
    R = R.with_root(start if start is not None else 0)
    if not R.is_serpentine():
        raise NotSerpentine("refinement did not produce a dual path")
    return R, dual_path(R, start)


def _loop_index(U: Unfolding, face: Face, x) -> int:
    d = np.linalg.norm(face.loop - np.asarray(x), axis=1)
    return int(np.argmin(d))
