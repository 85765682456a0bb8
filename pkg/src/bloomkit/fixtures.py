"""Standard polyhedra, cut sets and random instances used by tests and the CLI."""
from __future__ import annotations

import itertools

import networkx as nx
import numpy as np

from .errors import OverlapDetected
from .geometry import Polyhedron, build_convex_polyhedron
from .unfolding import develop, faces_from_cuts


def unit_cube() -> Polyhedron:
    return build_convex_polyhedron(list(itertools.product([0.0, 1.0], repeat=3)))


def regular_tetrahedron() -> Polyhedron:
    return build_convex_polyhedron([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]])


def octahedron() -> Polyhedron:
    pts = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]]
    return build_convex_polyhedron(pts)


def facet_with_normal(Q: Polyhedron, n) -> int:
    n = np.asarray(n, dtype=float)
    return int(np.argmax([p.normal @ n for p in Q.planes]))


def edge_between(Q: Polyhedron, f: int, g: int) -> int:
    for e, (a, b) in enumerate(Q.edge_facets):
        if {int(a), int(b)} == {f, g}:
            return e
    raise KeyError((f, g))


CUBE_SIDES = {
    "front": (0, -1, 0), "back": (0, 1, 0), "left": (-1, 0, 0),
    "right": (1, 0, 0), "bottom": (0, 0, -1), "top": (0, 0, 1),
}


def latin_cross_cuts(Q: Polyhedron | None = None):
    """Cut edges of the cube whose development is a Latin cross (front face at the centre)."""
    Q = unit_cube() if Q is None else Q
    side = {k: facet_with_normal(Q, v) for k, v in CUBE_SIDES.items()}
    hinge_pairs = [("front", "top"), ("front", "bottom"), ("front", "left"), ("front", "right"), ("bottom", "back")]
    hinge_edges = {edge_between(Q, side[a], side[b]) for a, b in hinge_pairs}
    return [Q.vertices[Q.edges[e]] for e in range(Q.n_edges) if e not in hinge_edges]


def edge_cuts(Q: Polyhedron, edges):
    return [Q.vertices[Q.edges[e]] for e in edges]


def random_hull(rng: np.random.Generator, n_points: int = 12, max_facets: int | None = None,
                sphere: bool = False) -> Polyhedron:
    """Convex hull of random points, resampled until it has at most ``max_facets`` facets."""
    for _ in range(1000):
        pts = rng.normal(size=(n_points, 3))
        if sphere:
            pts /= np.linalg.norm(pts, axis=1)[:, None]
        Q = build_convex_polyhedron(pts)
        if max_facets is None or Q.n_facets <= max_facets:
            return Q
    raise RuntimeError("could not sample a hull with the requested facet count")


def random_spanning_tree_cuts(Q: Polyhedron, rng: np.random.Generator, max_tries: int = 200):
    """Edge cuts along a random spanning tree of the vertex graph whose development does not overlap."""
    G = nx.Graph()
    for e, (a, b) in enumerate(Q.edges):
        G.add_edge(int(a), int(b), e=e)
    for _ in range(max_tries):
        for u, v in G.edges:
            G.edges[u, v]["w"] = rng.random()
        T = nx.minimum_spanning_tree(G, weight="w")
        cuts = edge_cuts(Q, sorted(G.edges[u, v]["e"] for u, v in T.edges))
        U = faces_from_cuts(Q, cuts)
        try:
            develop(U)
        except OverlapDetected:
            continue
        return cuts
    raise RuntimeError("no non-overlapping edge unfolding found")


def random_surface_point(Q: Polyhedron, rng: np.random.Generator, margin: float = 0.05) -> np.ndarray:
    """Point in the interior of a random facet (area weighted), away from its boundary."""
    areas = np.array([Q.facet_area(f) for f in range(Q.n_facets)])
    f = int(rng.choice(Q.n_facets, p=areas / areas.sum()))
    poly = Q.facet_polygon(f)
    c = poly.mean(axis=0)
    w = rng.dirichlet(np.ones(len(poly)))
    x = w @ poly
    return (1 - margin) * x + margin * c
