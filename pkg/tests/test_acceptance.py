"""Acceptance criteria; each test prints one PASS/FAIL line with its measured values."""
import time

import numpy as np
import pytest

from bloomkit.blooming import (HingeStructure, epsilon_bound, pick_epsilon_delta, pose_at, schedule_path_two_step,
                               schedule_path_unroll, schedule_path_waltz, schedule_tree_unroll)
from bloomkit.fixtures import (latin_cross_cuts, random_hull, random_spanning_tree_cuts, random_surface_point,
                               regular_tetrahedron, unit_cube)
from bloomkit.geodesics import shortest_path, source_unfolding
from bloomkit.lemmas import check_growing, check_trapezoid
from bloomkit.unfolding import develop, faces_from_cuts, refine_to_serpentine
from bloomkit.verify import HINGE_ADJACENT, ORIGINAL, verify_schedule
from oracles import geodesic_length

# pinned tolerances
TAU_TOUCH = 1e-7
GEODESIC_TOL = 1e-9
GROWING_TOL = 1e-9
TRAPEZOID_TOL = 1e-12
CONGRUENCE_TOL = 1e-8
CLOSURE_TOL = 1e-9
TIME_TOL = 1e-12
SAMPLES = 256
MONOTONE_SAMPLES = 1000


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail
    return emit


# ----------------------------------------------------------------------
# fixtures shared by several criteria
@pytest.fixture(scope="module")
def latin():
    Q = unit_cube()
    U = faces_from_cuts(Q, latin_cross_cuts(Q))
    t = time.perf_counter()
    R, cert = refine_to_serpentine(U)
    return U, R, cert, time.perf_counter() - t


@pytest.fixture(scope="module")
def tetra():
    Q = regular_tetrahedron()
    U, _ = source_unfolding(Q, random_surface_point(Q, np.random.default_rng(0)))
    R, cert = refine_to_serpentine(U)
    return U, R, cert


@pytest.fixture(scope="module")
def random_serpentine():
    rng = np.random.default_rng(1)
    out = []
    for _ in range(20):
        Q = random_hull(rng, int(rng.integers(5, 17)))
        U = faces_from_cuts(Q, random_spanning_tree_cuts(Q, rng))
        R, cert = refine_to_serpentine(U)
        out.append((U, R, cert))
    return out


@pytest.fixture(scope="module")
def source_trees():
    Q = unit_cube()
    cases = [source_unfolding(Q, np.array([0.5, 0.5, 0.0]))]
    rng = np.random.default_rng(7)
    for _ in range(20):
        Q = random_hull(rng, int(rng.integers(6, 40)), max_facets=30)
        cases.append(source_unfolding(Q, random_surface_point(Q, rng)))
    return cases


# ----------------------------------------------------------------------
def test_criterion_1_refinement_count(latin, report):
    U, R, cert, dt = latin
    ok = R.added_cuts == 11 and R.is_serpentine() and len(cert.faces) == R.n_faces and dt < 1.0
    report(1, ok, f"Latin cross refine added {R.added_cuts} cuts, dual path {R.is_serpentine()}, {dt:.3f} s")


def test_criterion_2_waltz(latin, tetra, random_serpentine, report):
    t = time.perf_counter()
    cases = [("latin-cross", latin[2]), ("tetrahedron-source", tetra[2])]
    cases += [(f"random-{i}", c) for i, (_, _, c) in enumerate(random_serpentine)]
    bad = []
    for name, cert in cases:
        eps, delta = pick_epsilon_delta(cert)
        sched = schedule_path_waltz(cert, eps, delta)
        rep = verify_schedule(HingeStructure.build(cert.unfolding, sched.root), sched, SAMPLES, TAU_TOUCH)
        if rep.crossings or rep.unexpected or not rep.certified:
            bad.append((name, rep.summary()))
    dt = time.perf_counter() - t
    report(2, not bad and dt < 300, f"{len(cases)} Path-Waltz instances at {SAMPLES} samples/move, "
                                    f"failures {bad}, {dt:.1f} s")


def test_criterion_3_path_unroll_taxonomy(latin, report):
    cert = latin[2]
    sched = schedule_path_unroll(cert)
    rep = verify_schedule(HingeStructure.build(cert.unfolding, sched.root), sched, SAMPLES, TAU_TOUCH)
    ends = np.array(sorted({m.t0 for m in sched.moves} | {m.t1 for m in sched.moves}))
    # hinge-adjacent contacts are hinge-edge-localized by construction; all others must sit at a step end
    off = [ev for ev in rep.touch_events if ev.kind != HINGE_ADJACENT and np.min(np.abs(ends - ev.time)) > TIME_TOL]
    ok = rep.crossings == 0 and rep.unexpected == 0 and not off
    report(3, ok, f"Path-Unroll: {rep.crossings} crossings, {len(rep.touch_events)} non-hinge touches, "
                  f"{len(off)} away from step ends, counts {rep.touch_counts}")


def test_criterion_4_two_step_taxonomy(latin, report):
    cert = latin[2]
    eps = epsilon_bound(cert)
    sched = schedule_path_two_step(cert, eps)
    rep = verify_schedule(HingeStructure.build(cert.unfolding, sched.root), sched, SAMPLES, TAU_TOUCH)
    stray = [ev for ev in rep.touch_events if ev.kind not in (HINGE_ADJACENT, ORIGINAL) and not ev.lemma]
    ok = rep.crossings == 0 and rep.unexpected == 0 and not stray
    report(4, ok, f"Path-TwoStep eps={eps:.4g}: {rep.crossings} crossings, "
                  f"{sum(ev.lemma for ev in rep.touch_events)} touches at Psi_i - eps hinges, {len(stray)} elsewhere")


def _final_congruence(U, T, hs, sched):
    pose = pose_at(hs, sched, sched.end)
    dev = develop(U.with_root(T.root))
    X = np.vstack([pose.apply(f.index, f.loop) for f in U.faces])
    Y = np.vstack([dev.transform(f.index).apply(f.loop) for f in U.faces])
    DX = np.linalg.norm(X[:, None] - X[None], axis=2)
    DY = np.linalg.norm(Y[:, None] - Y[None], axis=2)
    return float(np.max(np.abs(DX - DY)))


def test_criterion_5_tree_unroll(source_trees, report):
    bad, worst = [], 0.0
    for i, (U, T) in enumerate(source_trees):
        sched = schedule_tree_unroll(T)
        hs = HingeStructure.build(U, T.root)
        rep = verify_schedule(hs, sched, tau_touch=TAU_TOUCH)
        err = _final_congruence(U, T, hs, sched)
        worst = max(worst, err)
        if rep.crossings or rep.unexpected or not rep.certified or err > CONGRUENCE_TOL:
            bad.append((i, rep.summary(), err))
    report(5, not bad, f"Tree-Unroll on cube + {len(source_trees) - 1} hulls: failures {bad}, "
                       f"worst final-pose distance error {worst:.2e}")


def test_criterion_6_geodesic_oracle(report):
    Q = unit_cube()
    cube = shortest_path(Q, [0.5, 0.5, 0.0], [0.5, 0.5, 1.0]).length
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(50):
        Q = random_hull(rng, int(rng.integers(5, 21)), max_facets=20)
        for _ in range(10):
            p, q = random_surface_point(Q, rng), random_surface_point(Q, rng)
            worst = max(worst, abs(shortest_path(Q, p, q).length - geodesic_length(Q.vertices, Q.facets, p, q)))
    ok = worst <= GEODESIC_TOL and abs(cube - 2.0) <= GEODESIC_TOL
    report(6, ok, f"500 pairs on 50 hulls, max |length - oracle| = {worst:.2e}; cube bottom-top = {cube:.12f}")


def test_criterion_7_growing(report):
    r = check_growing(np.random.default_rng(70), 100)
    # check_growing records length(Q') - length(Q) + tol, so worst >= 0 means within tolerance
    report(7, r.failed == 0 and r.passed == 100,
           f"growing: {r.passed}/100 pass, min length(Q') - length(Q) = {r.worst - GROWING_TOL:.2e}")


def test_criterion_8_trapezoid(report):
    r = check_trapezoid(np.random.default_rng(80), 1000)
    report(8, r.failed == 0 and r.passed == 1000,
           f"trapezoid: {r.passed}/1000 pass, min |p0' pt| - |p0 pt| = {r.worst - TRAPEZOID_TOL:.2e}")


def _monotone(sched, rest):
    moves = sorted(sched.moves, key=lambda m: m.t0)
    overlap = any(a.t1 > b.t0 + TIME_TOL for a, b in zip(moves, moves[1:]))
    ts = np.concatenate([np.linspace(m.t0, m.t1, MONOTONE_SAMPLES) for m in moves])
    D = np.array([sched.dihedrals(rest, t) for t in np.sort(ts)])
    return not overlap and bool(np.all(np.diff(D, axis=0) >= -TIME_TOL))


def test_criterion_9_monotone(latin, tetra, random_serpentine, source_trees, report):
    certs = [latin[2], tetra[2]] + [c for _, _, c in random_serpentine[:5]]
    checked, bad = 0, 0
    for cert in certs:
        rest = np.array([h.dihedral for h in cert.unfolding.hinges])
        eps = epsilon_bound(cert)
        for s in (schedule_path_unroll(cert), schedule_path_two_step(cert, eps),
                  schedule_path_waltz(cert, eps, eps / 4)):
            checked += 1
            bad += not _monotone(s, rest)
    for U, T in source_trees[:5]:
        checked += 1
        bad += not _monotone(schedule_tree_unroll(T), np.array([h.dihedral for h in U.hinges]))
    report(9, bad == 0, f"{checked} schedules, {bad} with overlapping moves or decreasing dihedrals "
                        f"at {MONOTONE_SAMPLES} samples/move")


def test_criterion_10_closure(latin, tetra, random_serpentine, report):
    pairs = [(latin[0], latin[1]), (tetra[0], tetra[1])] + [(U, R) for U, R, _ in random_serpentine]
    worst = max(abs(develop(R).union_area() - develop(U).union_area()) for U, R in pairs)
    report(10, worst <= CLOSURE_TOL, f"{len(pairs)} refinements, max union-area change {worst:.2e}")
