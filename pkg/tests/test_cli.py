import json

import numpy as np
import pytest

from bloomkit.blooming import pick_epsilon_delta, schedule_path_waltz
from bloomkit.cli import main
from bloomkit.errors import DegenerateInput
from bloomkit.fixtures import facet_with_normal, random_hull, random_spanning_tree_cuts, unit_cube
from bloomkit.meshio import load_mesh, obj_text, parse_obj
from bloomkit.serialize import (dumps, schedule_from_dict, schedule_to_dict, unfolding_from_dict, unfolding_to_dict)
from bloomkit.unfolding import faces_from_cuts, refine_to_serpentine


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def cube_obj(tmp_path):
    Q = unit_cube()
    p = tmp_path / "cube.obj"
    p.write_text("\n".join(["v " + " ".join(map(str, v)) for v in Q.vertices]
                           + ["f " + " ".join(str(i + 1) for i in f) for f in Q.facets]) + "\n")
    return p


def test_unfold_refine_bloom_verify(tmp_path, capsys, cube_obj):
    lc, lcr, w = tmp_path / "lc.json", tmp_path / "lcr.json", tmp_path / "w.json"
    code, _, err = run(capsys, "unfold", cube_obj, "--cuts", "latin-cross", "-o", lc, "--svg", tmp_path / "lc.svg")
    assert code == 0 and (tmp_path / "lc.svg").read_text().count("<polygon") == 6
    code, out, _ = run(capsys, "refine", lc, "-o", lcr)
    assert code == 0 and out.strip() == "added 11 cuts"
    code, out, _ = run(capsys, "refine", lcr)
    assert out.splitlines()[0] == "added 0 cuts"
    code, _, _ = run(capsys, "bloom", lc, "--algo", "path-unroll")
    assert code == 2
    code, _, _ = run(capsys, "bloom", lcr, "--algo", "waltz", "-o", w)
    k = json.loads(lcr.read_text())["n_faces"] - 1
    assert code == 0 and len(json.loads(w.read_text())["moves"]) == 3 * k - 2
    code, out, _ = run(capsys, "verify", lcr, w)
    rep = json.loads(out)
    assert code == 0 and rep["status"] == "certified" and rep["schema"] == "bloomkit/1"


def test_force_refine(tmp_path, capsys):
    lc, lcr = tmp_path / "lc.json", tmp_path / "lcr.json"
    run(capsys, "unfold", "cube", "--cuts", "latin-cross", "-o", lc)
    run(capsys, "refine", lc, "-o", lcr)
    code, out, _ = run(capsys, "refine", lcr, "--force-refine")
    assert code == 0 and int(out.split()[1]) > 0


def test_source_and_tree_unroll(tmp_path, capsys, cube_obj):
    src, t = tmp_path / "src.json", tmp_path / "t.json"
    code, _, _ = run(capsys, "unfold", cube_obj, "--source", "bottom-center", "-o", src)
    assert code == 0
    doc = json.loads(src.read_text())
    assert doc["source"] == [0.5, 0.5, 0.0]
    code, _, _ = run(capsys, "bloom", src, "--algo", "tree-unroll", "-o", t)
    assert code == 0 and len(json.loads(t.read_text())["moves"]) == doc["n_faces"] - 1
    code, _, _ = run(capsys, "verify", src, t, "--samples", "16")
    assert code == 0
    lc = tmp_path / "lc.json"
    run(capsys, "unfold", "cube", "--cuts", "latin-cross", "-o", lc)
    assert run(capsys, "bloom", lc, "--algo", "tree-unroll")[0] == 2


def test_source_forms(capsys):
    bottom = facet_with_normal(unit_cube(), (0, 0, -1))
    assert run(capsys, "unfold", "cube", "--source", f"0.5,0.5,0,{bottom}")[0] == 0
    assert run(capsys, "unfold", "cube", "--source", f"0.5,0.5,0,{(bottom + 1) % 6}")[0] == 1
    assert run(capsys, "unfold", "cube", "--source", "facet:2")[0] == 0
    assert run(capsys, "unfold", "cube", "--source", "0.5,0.5,0.5")[0] == 1
    assert run(capsys, "unfold", "cube", "--source", "a,b")[0] == 1
    assert run(capsys, "unfold", "cube")[0] == 1


def test_parse_errors(tmp_path, capsys):
    bad = tmp_path / "bad.obj"
    bad.write_text("v 0 0\nf 1 2 3\n")
    code, _, err = run(capsys, "unfold", bad, "--source", "0,0,0")
    assert code == 1 and "line 1" in err
    bad.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n")
    assert run(capsys, "unfold", bad, "--source", "0,0,0")[0] == 1
    assert run(capsys, "unfold", tmp_path / "missing.obj", "--source", "0,0,0")[0] == 1
    js = tmp_path / "x.json"
    js.write_text("{not json")
    assert run(capsys, "refine", js)[0] == 1


def test_overlap_exit_code(tmp_path, capsys):
    rng = np.random.default_rng(22)
    import networkx as nx
    from bloomkit.fixtures import edge_cuts
    from bloomkit.unfolding import develop
    for _ in range(400):
        Q = random_hull(rng, 30, sphere=True)
        G = nx.Graph()
        for e, (a, b) in enumerate(Q.edges):
            G.add_edge(int(a), int(b), e=e, w=rng.random())
        edges = sorted(G.edges[u, v]["e"] for u, v in nx.minimum_spanning_tree(G, weight="w").edges)
        if develop(faces_from_cuts(Q, edge_cuts(Q, edges)), check=False).overlaps():
            break
    mesh = tmp_path / "m.json"
    mesh.write_text(json.dumps({"vertices": Q.vertices.tolist(), "facets": [list(f) for f in Q.facets]}))
    cuts = tmp_path / "c.json"
    cuts.write_text(json.dumps({"edges": edges}))
    code, _, err = run(capsys, "unfold", mesh, "--cuts", cuts)
    assert code == 2 and "overlap" in err


def test_closing_schedule_exit_2(tmp_path, capsys):
    lc, lcr, s = tmp_path / "lc.json", tmp_path / "lcr.json", tmp_path / "s.json"
    run(capsys, "unfold", "cube", "--cuts", "latin-cross", "-o", lc)
    run(capsys, "refine", lc, "-o", lcr)
    run(capsys, "bloom", lcr, "--algo", "path-unroll", "-o", s)
    doc = json.loads(s.read_text())
    t = 0.0
    moves = []
    for m in doc["moves"][::-1]:
        dur = np.pi - (m["from"] - 0.4)
        moves.append({"hinge": m["hinge"], "from": np.pi, "to": m["from"] - 0.4, "t0": t, "t1": t + dur})
        t += dur
    doc["moves"] = moves
    s.write_text(json.dumps(doc))
    assert run(capsys, "verify", lcr, s, "--samples", "16")[0] == 2


def test_few_samples_exit_4(tmp_path, capsys):
    # a random serpentine instance whose gaps need more than 8 samples per move to certify
    rng = np.random.default_rng(1)
    for i in range(5):
        Q = random_hull(rng, int(rng.integers(5, 17)))
        U = faces_from_cuts(Q, random_spanning_tree_cuts(Q, rng))
    R, cert = refine_to_serpentine(U)
    eps, delta = pick_epsilon_delta(cert)
    (tmp_path / "u.json").write_text(dumps(unfolding_to_dict(R)))
    (tmp_path / "s.json").write_text(dumps(schedule_to_dict(schedule_path_waltz(cert, eps, delta))))
    assert run(capsys, "verify", tmp_path / "u.json", tmp_path / "s.json", "--samples", "8")[0] == 4
    assert run(capsys, "verify", tmp_path / "u.json", tmp_path / "s.json", "--samples", "64")[0] == 0


def test_frames(tmp_path, capsys):
    lc, lcr, w = tmp_path / "lc.json", tmp_path / "lcr.json", tmp_path / "w.json"
    run(capsys, "unfold", "cube", "--cuts", "latin-cross", "-o", lc)
    run(capsys, "refine", lc, "-o", lcr)
    run(capsys, "bloom", lcr, "--algo", "waltz", "-o", w)
    out = tmp_path / "frames"
    assert run(capsys, "frames", lcr, w, "--fps", 30, "--duration", 10, "--out", out)[0] == 0
    files = sorted(out.glob("*.obj"))
    assert len(files) == 300
    first, _ = parse_obj(files[0].read_text())
    last, _ = parse_obj(files[-1].read_text())
    # frame 0 is the cube surface, the last frame is planar
    assert np.all((first > -1e-12) & (first < 1 + 1e-12))
    assert np.all(np.any(np.isclose(first, 0, atol=1e-12) | np.isclose(first, 1, atol=1e-12), axis=1))
    assert np.linalg.svd(last - last.mean(axis=0))[1][-1] < 1e-8
    assert run(capsys, "frames", lcr, w, "--out", lc / "sub")[0] == 1


def test_frame_zero_matches_faces(tmp_path, capsys):
    lc = tmp_path / "lc.json"
    run(capsys, "unfold", "cube", "--source", "bottom-center", "-o", lc)
    run(capsys, "bloom", lc, "--algo", "tree-unroll", "-o", tmp_path / "t.json")
    run(capsys, "frames", lc, tmp_path / "t.json", "--fps", 2, "--duration", 1, "--out", tmp_path / "f")
    U, _ = unfolding_from_dict(json.loads(lc.read_text()))
    X, faces = parse_obj(sorted((tmp_path / "f").glob("*.obj"))[0].read_text())
    for face, idx in zip(U.faces, faces):
        poly = U.base.to_3d(face.facet, face.outline2d)
        assert np.allclose(X[idx], poly, atol=1e-12)


def test_lemmas_command(capsys):
    code, out, err = run(capsys, "--seed", 4, "lemmas", "--instances", 3, "--trapezoid", 30, "--subtree", 1)
    assert code == 0 and json.loads(out)["ok"] and err.count("PASS") == 5


# ----------------------------------------------------------------------
# serialization
def test_round_trips_are_exact(refined_cross):
    R, cert = refined_cross
    d = unfolding_to_dict(R)
    R2, src = unfolding_from_dict(json.loads(dumps(d)))
    assert src is None and unfolding_to_dict(R2) == d
    for a, b in zip(R.faces, R2.faces):
        assert np.array_equal(a.loop, b.loop)
    s = schedule_path_waltz(cert, 0.3, 0.05)
    s2 = schedule_from_dict(json.loads(dumps(schedule_to_dict(s))))
    assert s2 == s


def test_outputs_are_byte_identical(tmp_path, capsys):
    texts = []
    for k in range(2):
        run(capsys, "unfold", "cube", "--source", "bottom-center", "-o", tmp_path / f"u{k}.json")
        run(capsys, "bloom", tmp_path / f"u{k}.json", "--algo", "tree-unroll", "-o", tmp_path / f"s{k}.json")
        texts.append((tmp_path / f"u{k}.json").read_bytes() + (tmp_path / f"s{k}.json").read_bytes())
    assert texts[0] == texts[1]


def test_schema_checked():
    with pytest.raises(DegenerateInput):
        schedule_from_dict({"schema": "other", "kind": "schedule"})
    with pytest.raises(DegenerateInput):
        unfolding_from_dict({"schema": "bloomkit/1", "kind": "schedule"})


def test_obj_round_trip(tmp_path):
    Q = unit_cube()
    text = obj_text([Q.facet_polygon(f) for f in range(Q.n_facets)])
    V, F = parse_obj(text)
    assert len(F) == 6 and V.shape == (24, 3)
    p = tmp_path / "c.obj"
    p.write_text("# cube\n" + "\n".join("v " + " ".join(map(str, v)) for v in Q.vertices) + "\n"
                 + "\n".join("f " + " ".join(f"{i + 1}/1" for i in f) for f in Q.facets))
    assert load_mesh(p).n_facets == 6
    assert load_mesh(p, hull=True).n_facets == 6
