import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bloomkit.contact import ContactKind, triangle_contact, triangle_distance
from bloomkit.errors import DegenerateInput, DegenerateTriangle, EmptyIntersection
from bloomkit.fixtures import octahedron, random_hull, regular_tetrahedron, unit_cube
from bloomkit.geometry import (Plane, Polyhedron, RigidTransform, build_convex_polyhedron, halfspace_intersection,
                               polygon_area, scaled_box)
from oracles import triangle_distance_sampled

finite = st.floats(-10, 10, allow_nan=False)
vec = st.tuples(finite, finite, finite).map(np.array)


def test_cube_combinatorics(cube):
    assert (cube.n_vertices, cube.n_edges, cube.n_facets) == (8, 12, 6)
    assert all(abs(cube.dihedral(e) - np.pi / 2) < 1e-12 for e in range(cube.n_edges))
    assert sum(cube.facet_area(f) for f in range(6)) == pytest.approx(6.0, abs=1e-12)


@pytest.mark.parametrize("make,v,e,f", [(regular_tetrahedron, 4, 6, 4), (octahedron, 6, 12, 8)])
def test_platonic_euler(make, v, e, f):
    Q = make()
    assert (Q.n_vertices, Q.n_edges, Q.n_facets) == (v, e, f)
    assert Q.is_convex()


def test_random_hulls_are_closed_and_convex(rng):
    for _ in range(20):
        Q = random_hull(rng, int(rng.integers(5, 30)))
        assert Q.n_vertices - Q.n_edges + Q.n_facets == 2
        assert Q.is_convex()
        assert np.all(Q.edge_facets >= 0)


def test_coplanar_points_collapse_into_one_facet():
    pts = [[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)] + [[0.5, 0.5, 1.0], [0.5, 0, 0.5]]
    Q = build_convex_polyhedron(pts)
    assert Q.n_facets == 6


def test_open_surface_rejected():
    V = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]
    with pytest.raises(DegenerateInput):
        Polyhedron(V, [[0, 2, 1], [0, 1, 3], [0, 3, 2]])


def test_flat_point_set_rejected():
    with pytest.raises(DegenerateInput):
        build_convex_polyhedron([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]])


def test_halfspace_intersection_recovers_hull(rng):
    Q = random_hull(rng, 14)
    R = halfspace_intersection(Q.planes, scaled_box(*Q.bbox()))
    assert R.n_facets == Q.n_facets
    assert not any(R.artificial)
    assert np.max(np.abs(np.sort(R.vertices, axis=0) - np.sort(Q.vertices, axis=0))) < 1e-9


def test_halfspace_intersection_flags_box_facets():
    R = halfspace_intersection([Plane(np.array([0, 0, 1.0]), 1.0)], (np.full(3, -2.0), np.full(3, 2.0)))
    assert R.n_facets == 6
    assert sum(R.artificial) == 5


def test_empty_intersection():
    planes = [Plane(np.array([0, 0, 1.0]), -1.0), Plane(np.array([0, 0, -1.0]), -1.0)]
    with pytest.raises(EmptyIntersection):
        halfspace_intersection(planes, (np.full(3, -2.0), np.full(3, 2.0)))


def test_facet_frames_round_trip(cube):
    for f in range(cube.n_facets):
        P = cube.facet_polygon(f)
        assert np.allclose(cube.to_3d(f, cube.to_2d(f, P)), P, atol=1e-12)
        assert polygon_area(cube.polygon_2d(f)) == pytest.approx(1.0)


@settings(max_examples=60, deadline=None)
@given(vec, vec, st.floats(-7, 7), vec)
def test_rotation_is_rigid(p, d, ang, x):
    if np.linalg.norm(d) < 1e-3:
        d = np.array([0, 0, 1.0])
    T = RigidTransform.about_axis(p, d, ang)
    assert T.is_proper()
    # the axis is fixed
    assert np.allclose(T.apply(p + 0.5 * d), p + 0.5 * d, atol=1e-9)
    y = T.apply(x)
    assert np.allclose(T.inverse().apply(y), x, atol=1e-8)
    assert np.linalg.norm(y - p) == pytest.approx(np.linalg.norm(x - p), abs=1e-8)


# ----------------------------------------------------------------------
# triangle contact
T0 = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)


def test_contact_clear_touch_cross():
    up = T0 + [0, 0, 0.5]
    assert triangle_contact(T0, up).kind == ContactKind.CLEAR
    share = np.array([[1, 0, 0], [0, 1, 0], [1, 1, 0.3]], dtype=float)
    c = triangle_contact(T0, share)
    assert c.kind == ContactKind.TOUCH
    assert c.plane is not None
    pierce = np.array([[0.2, 0.2, -1], [0.3, 0.2, 1], [0.2, 0.3, 1]], dtype=float)
    c = triangle_contact(T0, pierce)
    assert c.kind == ContactKind.CROSS
    assert c.penetration > 1e-7
    assert abs(c.witness[2]) < 1e-9


def test_coplanar_overlap_is_not_a_cross():
    # coplanar overlap keeps both triangles in a common closed halfspace
    c = triangle_contact(T0, T0 + [0.2, 0.2, 0])
    assert c.kind == ContactKind.TOUCH


def test_degenerate_triangle_rejected():
    with pytest.raises(DegenerateTriangle):
        triangle_contact(T0, np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0]], dtype=float))


@settings(max_examples=40, deadline=None)
@given(st.lists(finite, min_size=18, max_size=18))
def test_triangle_distance_matches_sampling(xs):
    A = np.array(xs[:9]).reshape(3, 3)
    B = np.array(xs[9:]).reshape(3, 3) + [25.0, 0, 0]  # disjoint by construction
    for T in (A, B):
        if np.linalg.norm(np.cross(T[1] - T[0], T[2] - T[0])) < 1e-2:
            return
    d, xa, xb = (v[0] for v in triangle_distance(A[None], B[None]))
    ds = triangle_distance_sampled(A, B, 30)
    assert d <= ds + 1e-9
    assert np.linalg.norm(xa - xb) == pytest.approx(d, abs=1e-9)
    # sampling converges from above; the gap is bounded by the sampling pitch
    pitch = max(np.linalg.norm(np.roll(T, 1, 0) - T, axis=1).max() for T in (A, B)) / 29
    assert ds - d <= 2 * pitch
