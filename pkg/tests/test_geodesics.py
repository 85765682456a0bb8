import numpy as np
import pytest

from bloomkit.errors import SourceIsVertex
from bloomkit.fixtures import random_hull, random_surface_point, regular_tetrahedron
from bloomkit.geodesics import (DistanceMap, cut_locus, geodesic_distance, grown_polyhedron, locate, shortest_path,
                                source_unfolding)
from bloomkit.unfolding import develop
from oracles import geodesic_candidates, geodesic_length


def test_cube_bottom_to_top(cube):
    P = shortest_path(cube, [0.5, 0.5, 0.0], [0.5, 0.5, 1.0])
    assert P.length == pytest.approx(2.0, abs=1e-9)
    assert len(P.faces) == 3


def test_same_facet_is_straight(cube):
    assert geodesic_distance(cube, [0.1, 0.2, 0], [0.7, 0.9, 0]) == pytest.approx(np.hypot(0.6, 0.7), abs=1e-12)


def test_locate_classes(cube):
    assert locate(cube, [0, 0, 0]).kind == "vertex"
    assert locate(cube, [0.5, 0, 0]).kind == "edge"
    assert locate(cube, [0.5, 0.5, 0]).kind == "facet"
    with pytest.raises(ValueError):
        locate(cube, [0.5, 0.5, 0.5])


def test_matches_edge_sequence_oracle():
    rng = np.random.default_rng(11)
    for _ in range(8):
        Q = random_hull(rng, int(rng.integers(5, 21)), max_facets=20)
        for _ in range(5):
            p, q = random_surface_point(Q, rng), random_surface_point(Q, rng)
            P = shortest_path(Q, p, q)
            assert P.length == pytest.approx(geodesic_length(Q.vertices, Q.facets, p, q), abs=1e-9)


def test_path_develops_to_a_straight_segment():
    rng = np.random.default_rng(12)
    Q = random_hull(rng, 18)
    for _ in range(5):
        P = shortest_path(Q, random_surface_point(Q, rng), random_surface_point(Q, rng))
        D = P.development(Q)
        chord = np.linalg.norm(D[-1] - D[0])
        assert chord == pytest.approx(P.length, abs=1e-9)
        assert np.sum(np.linalg.norm(np.diff(P.points, axis=0), axis=1)) == pytest.approx(P.length, abs=1e-9)


def test_distance_map_agrees_with_paths():
    rng = np.random.default_rng(13)
    Q = random_hull(rng, 15)
    s = random_surface_point(Q, rng)
    dm = DistanceMap(Q, s)
    for _ in range(10):
        x = random_surface_point(Q, rng)
        assert dm.distance(x) == pytest.approx(shortest_path(Q, s, x).length, abs=1e-9)


def test_cut_locus_points_have_several_shortest_paths():
    rng = np.random.default_rng(14)
    Q = random_hull(rng, 12)
    s = random_surface_point(Q, rng)
    loc = cut_locus(Q, s)
    checked = 0
    for a, b in list(loc.segments)[:15]:
        x = 0.5 * (a + b)
        if min(np.linalg.norm(Q.vertices - x, axis=1)) < 1e-3:
            continue
        cands = geodesic_candidates(Q.vertices, Q.facets, s, x, slack=1e-7)
        assert len(cands) >= 2, cands
        checked += 1
    assert checked >= 3


def test_points_off_the_cut_locus_have_one_shortest_path():
    rng = np.random.default_rng(15)
    Q = random_hull(rng, 12)
    s = random_surface_point(Q, rng)
    loc = cut_locus(Q, s)
    n = 0
    while n < 10:
        x = random_surface_point(Q, rng)
        if loc.distance_to(x) < 1e-2:
            continue
        assert len(geodesic_candidates(Q.vertices, Q.facets, s, x, slack=1e-9)) == 1
        n += 1


def test_cut_locus_is_a_tree_through_all_vertices(cube):
    loc = cut_locus(cube, [0.5, 0.5, 0.0])
    import networkx as nx
    assert nx.is_tree(loc.graph)
    pos = loc.nodes()
    for v in cube.vertices:
        assert np.min(np.linalg.norm(pos - v, axis=1)) < 1e-9


def test_source_at_vertex_rejected(cube):
    with pytest.raises(SourceIsVertex):
        source_unfolding(cube, [0.0, 0.0, 0.0])


def test_source_unfolding_develops_without_overlap():
    rng = np.random.default_rng(16)
    for Q in (regular_tetrahedron(), random_hull(rng, 14), random_hull(rng, 25)):
        s = random_surface_point(Q, rng)
        U, T = source_unfolding(Q, s)
        dev = develop(U)
        area = sum(Q.facet_area(f) for f in range(Q.n_facets))
        assert dev.union_area() == pytest.approx(area, abs=1e-9)
        assert T.root == U.face_at(s)
        assert all(T.path_to(f)[0] == T.root for f in range(U.n_faces))


def test_source_unfolding_distances_are_straight_lines():
    rng = np.random.default_rng(17)
    Q = random_hull(rng, 14)
    s = random_surface_point(Q, rng)
    U, T = source_unfolding(Q, s)
    dev = develop(U)
    s2 = dev.place(T.root, s[None])[0]
    for face in U.faces:
        y = Q.to_3d(face.facet, face.interior_point_2d())
        d = np.linalg.norm(dev.place(face.index, y[None])[0] - s2)
        assert d == pytest.approx(shortest_path(Q, s, y).length, abs=1e-9)


def test_grown_polyhedron_contains_q():
    rng = np.random.default_rng(18)
    Q = random_hull(rng, 14)
    P = shortest_path(Q, random_surface_point(Q, rng), random_surface_point(Q, rng))
    G = grown_polyhedron(Q, P)
    assert all(np.max(pl.signed_distance(Q.vertices)) <= 1e-9 for pl in G.planes)
    assert shortest_path(G, P.points[0], P.points[-1]).length == pytest.approx(P.length, abs=1e-9)
